//! Sphere tracing against exact SDFs.

use crate::error::{Error, Result};
use crate::math::Vec3;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Shading {
    /// Lambertian with one directional light riding the camera plus 0.2 ambient.
    LambertFixedLight,
    /// Raw albedo, no lighting.
    AlbedoFlat,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarchConfig {
    pub max_steps: usize,
    pub hit_epsilon: f64,
    pub far_limit: f64,
    pub shading: Shading,
}

impl Default for MarchConfig {
    fn default() -> Self {
        MarchConfig {
            max_steps: 192,
            hit_epsilon: 1e-4,
            far_limit: 50.0,
            shading: Shading::LambertFixedLight,
        }
    }
}

impl MarchConfig {
    pub fn validate(&self, scene_diameter: f64) -> Result<()> {
        if self.hit_epsilon <= 0.0 {
            return Err(Error::InvalidInput("hit epsilon must be > 0".into()));
        }
        if self.far_limit <= scene_diameter {
            return Err(Error::InvalidInput(format!(
                "far limit {} must exceed scene diameter {scene_diameter}",
                self.far_limit
            )));
        }
        Ok(())
    }
}

/// March a ray against `sdf`, returning the hit parameter `t` or `None`.
///
/// Exact SDFs never let the step cross the surface, so the first `t` with
/// `sdf < eps` is the first intersection along the ray.
pub fn sphere_trace(
    sdf: impl Fn(Vec3) -> f64,
    origin: Vec3,
    dir: Vec3,
    cfg: &MarchConfig,
) -> Result<Option<f64>> {
    let mut t = 0.0f64;
    for _ in 0..cfg.max_steps {
        let p = origin + dir * t;
        let d = sdf(p);
        if !d.is_finite() {
            return Err(Error::GeometryNan(p.x, p.y, p.z));
        }
        if d < cfg.hit_epsilon {
            return Ok(Some(t + d.max(0.0)));
        }
        t += d;
        if t > cfg.far_limit {
            return Ok(None);
        }
    }
    // Step budget exhausted while still outside the hit band: grazing ray.
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::vec3;

    #[test]
    fn hits_unit_sphere_head_on() {
        let cfg = MarchConfig::default();
        let t = sphere_trace(
            |p| p.norm() - 1.0,
            vec3(0.0, 0.0, 3.0),
            vec3(0.0, 0.0, -1.0),
            &cfg,
        )
        .unwrap()
        .unwrap();
        assert!((t - 2.0).abs() < 1e-3);
    }

    #[test]
    fn misses_off_axis() {
        let cfg = MarchConfig::default();
        let hit = sphere_trace(
            |p| p.norm() - 1.0,
            vec3(0.0, 2.0, 3.0),
            vec3(0.0, 0.0, -1.0),
            &cfg,
        )
        .unwrap();
        assert!(hit.is_none());
    }

    #[test]
    fn nan_geometry_detected() {
        let cfg = MarchConfig::default();
        let err = sphere_trace(
            |_| f64::NAN,
            vec3(0.0, 0.0, 3.0),
            vec3(0.0, 0.0, -1.0),
            &cfg,
        );
        assert!(matches!(err, Err(Error::GeometryNan(..))));
    }
}
