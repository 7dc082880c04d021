//! Analytic signed-distance primitives.
//!
//! Every kind has an exact (not merely bounded) signed distance in its local
//! frame, and poses are rigid, so world-space evaluations stay exact. The
//! `scale` vector is interpreted per kind as the shape's defining lengths.

use crate::error::{Error, Result};
use crate::math::{vec3, Aabb, Pose, Vec3};
use serde::{Deserialize, Serialize};

/// Primitive shape selector. `scale` components are read as:
///
/// * `Sphere`       — radius `sx` (sy, sz unused but kept positive)
/// * `Box`          — half-extents `(sx, sy, sz)`
/// * `Capsule`      — radius `sx`, half-height `sy` along local Y
/// * `Torus`        — major radius `sx`, minor radius `sy`, in the local XZ plane
/// * `RoundedCone`  — base radius `sx` at the origin, top radius `sy` at local
///   height `sz` (requires `sz > |sx - sy|`)
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PrimitiveKind {
    Sphere,
    Box,
    Capsule,
    Torus,
    RoundedCone,
}

/// One SDF primitive with pose, shape lengths and flat albedo.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartPrimitive {
    pub kind: PrimitiveKind,
    pub pose: Pose,
    pub scale: Vec3,
    pub albedo: [f64; 3],
}

impl PartPrimitive {
    pub fn new(kind: PrimitiveKind, pose: Pose, scale: Vec3, albedo: [f64; 3]) -> PartPrimitive {
        PartPrimitive {
            kind,
            pose,
            scale,
            albedo,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.scale.x > 0.0 && self.scale.y > 0.0 && self.scale.z > 0.0) {
            return Err(Error::InvalidInput(format!(
                "primitive scale must be positive, got ({}, {}, {})",
                self.scale.x, self.scale.y, self.scale.z
            )));
        }
        if self.pose.rotation.unit_error() > 1e-6 {
            return Err(Error::InvalidInput(
                "primitive rotation is not orthonormal within 1e-6".into(),
            ));
        }
        for c in self.albedo {
            if !(0.0..=1.0).contains(&c) {
                return Err(Error::InvalidInput(format!("albedo {c} outside [0,1]")));
            }
        }
        if self.kind == PrimitiveKind::RoundedCone
            && self.scale.z <= (self.scale.x - self.scale.y).abs()
        {
            return Err(Error::InvalidInput(
                "rounded-cone height must exceed |base - top| radius difference".into(),
            ));
        }
        Ok(())
    }

    /// Exact signed distance from `p` (world units) to this primitive.
    pub fn sdf(&self, p: Vec3) -> f64 {
        let q = self.pose.apply_inv(p);
        let s = self.scale;
        match self.kind {
            PrimitiveKind::Sphere => q.norm() - s.x,
            PrimitiveKind::Box => {
                let d = q.abs() - s;
                let outside = d.max(Vec3::ZERO).norm();
                let inside = d.max_component().min(0.0);
                outside + inside
            }
            PrimitiveKind::Capsule => {
                let y = q.y - q.y.clamp(-s.y, s.y);
                vec3(q.x, y, q.z).norm() - s.x
            }
            PrimitiveKind::Torus => {
                let ring = (q.x * q.x + q.z * q.z).sqrt() - s.x;
                (ring * ring + q.y * q.y).sqrt() - s.y
            }
            PrimitiveKind::RoundedCone => {
                let (r1, r2, h) = (s.x, s.y, s.z);
                let b = (r1 - r2) / h;
                let a = (1.0 - b * b).sqrt();
                let qx = (q.x * q.x + q.z * q.z).sqrt();
                let k = qx * (-b) + q.y * a;
                if k < 0.0 {
                    (qx * qx + q.y * q.y).sqrt() - r1
                } else if k > a * h {
                    (qx * qx + (q.y - h) * (q.y - h)).sqrt() - r2
                } else {
                    qx * a + q.y * b - r1
                }
            }
        }
    }

    /// Local-frame bounding box of the primitive.
    fn local_aabb(&self) -> Aabb {
        let s = self.scale;
        match self.kind {
            PrimitiveKind::Sphere => Aabb::new(vec3(-s.x, -s.x, -s.x), vec3(s.x, s.x, s.x)),
            PrimitiveKind::Box => Aabb::new(-s, s),
            PrimitiveKind::Capsule => {
                Aabb::new(vec3(-s.x, -(s.y + s.x), -s.x), vec3(s.x, s.y + s.x, s.x))
            }
            PrimitiveKind::Torus => {
                let r = s.x + s.y;
                Aabb::new(vec3(-r, -s.y, -r), vec3(r, s.y, r))
            }
            PrimitiveKind::RoundedCone => {
                let r = s.x.max(s.y);
                Aabb::new(vec3(-r, -s.x, -r), vec3(r, s.z + s.y, r))
            }
        }
    }

    /// Conservative world-space bounding box (AABB of the rotated local box;
    /// exact for spheres, which are rotation invariant).
    pub fn world_aabb(&self) -> Aabb {
        if self.kind == PrimitiveKind::Sphere {
            let r = vec3(self.scale.x, self.scale.x, self.scale.x);
            let c = self.pose.translation;
            return Aabb::new(c - r, c + r);
        }
        let l = self.local_aabb();
        let mut out = Aabb::empty();
        for &x in &[l.min.x, l.max.x] {
            for &y in &[l.min.y, l.max.y] {
                for &z in &[l.min.z, l.max.z] {
                    out.include(self.pose.apply(vec3(x, y, z)));
                }
            }
        }
        out
    }

    /// Analytic volume of the primitive in isolation.
    pub fn volume(&self) -> f64 {
        use std::f64::consts::PI;
        let s = self.scale;
        match self.kind {
            PrimitiveKind::Sphere => 4.0 / 3.0 * PI * s.x.powi(3),
            PrimitiveKind::Box => 8.0 * s.x * s.y * s.z,
            PrimitiveKind::Capsule => PI * s.x * s.x * (2.0 * s.y) + 4.0 / 3.0 * PI * s.x.powi(3),
            PrimitiveKind::Torus => 2.0 * PI * PI * s.x * s.y * s.y,
            PrimitiveKind::RoundedCone => {
                // Truncated cone plus the two cap contributions; used only as
                // a sizing heuristic by the generator.
                let (r1, r2, h) = (s.x, s.y, s.z);
                PI * h / 3.0 * (r1 * r1 + r1 * r2 + r2 * r2)
                    + 2.0 / 3.0 * PI * (r1.powi(3) + r2.powi(3))
            }
        }
    }
}
