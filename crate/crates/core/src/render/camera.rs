//! Pinhole cameras on the fixed-elevation orbit rig.

use crate::math::{vec3, Vec3};
use serde::{Deserialize, Serialize};

/// Elevation shared by every rig camera, in degrees.
pub const RIG_ELEVATION_DEG: f64 = 20.0;
/// The four rig azimuths in grid order: top row (0, 90), bottom row (180, 270).
pub const RIG_AZIMUTHS_DEG: [f64; 4] = [0.0, 90.0, 180.0, 270.0];

/// Look-at pinhole camera. Y is up; azimuth 0 places the eye on +Z.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Camera {
    pub azimuth_deg: f64,
    pub elevation_deg: f64,
    pub distance: f64,
    pub fov_deg: f64,
    pub width: usize,
    pub height: usize,
    pub target: Vec3,
}

impl Camera {
    pub fn new(
        azimuth_deg: f64,
        elevation_deg: f64,
        distance: f64,
        fov_deg: f64,
        width: usize,
        height: usize,
    ) -> Camera {
        Camera {
            azimuth_deg,
            elevation_deg,
            distance,
            fov_deg,
            width,
            height,
            target: Vec3::ZERO,
        }
    }

    pub fn eye(&self) -> Vec3 {
        let az = self.azimuth_deg.to_radians();
        let el = self.elevation_deg.to_radians();
        self.target
            + vec3(
                self.distance * el.cos() * az.sin(),
                self.distance * el.sin(),
                self.distance * el.cos() * az.cos(),
            )
    }

    /// Orthonormal view basis (right, up, forward); forward points at the target.
    pub fn basis(&self) -> (Vec3, Vec3, Vec3) {
        let forward = (self.target - self.eye()).normalized();
        let right = forward.cross(Vec3::Y).normalized();
        let up = right.cross(forward);
        (right, up, forward)
    }

    fn tan_half_fov(&self) -> f64 {
        (self.fov_deg.to_radians() * 0.5).tan()
    }

    /// Ray through the center of pixel (row, col): origin and unit direction.
    pub fn ray(&self, row: f64, col: f64) -> (Vec3, Vec3) {
        let (right, up, forward) = self.basis();
        let aspect = self.width as f64 / self.height as f64;
        let th = self.tan_half_fov();
        let x = ((col + 0.5) / self.width as f64 * 2.0 - 1.0) * th * aspect;
        let y = (1.0 - (row + 0.5) / self.height as f64 * 2.0) * th;
        let dir = (forward + right * x + up * y).normalized();
        (self.eye(), dir)
    }

    /// Project a world point to continuous pixel coordinates (row, col) plus
    /// the view-space depth; `None` when the point is behind the eye.
    pub fn project(&self, p: Vec3) -> Option<(f64, f64, f64)> {
        let (right, up, forward) = self.basis();
        let v = p - self.eye();
        let z = v.dot(forward);
        if z <= 1e-12 {
            return None;
        }
        let aspect = self.width as f64 / self.height as f64;
        let th = self.tan_half_fov();
        let x_ndc = v.dot(right) / (z * th * aspect);
        let y_ndc = v.dot(up) / (z * th);
        let col = (x_ndc + 1.0) * 0.5 * self.width as f64 - 0.5;
        let row = (1.0 - y_ndc) * 0.5 * self.height as f64 - 0.5;
        Some((row, col, z))
    }

    /// Per-camera light direction used by the shaded render: rides above the
    /// camera with no sideways component, so congruent (asset, camera) pairs
    /// shade identically.
    pub fn light_dir(&self) -> Vec3 {
        let (_, up, forward) = self.basis();
        (up * 0.5 - forward).normalized()
    }
}

/// Four cameras at the orthogonal azimuths and 20 degrees elevation, equal
/// distance and fov, aimed at the origin.
pub fn make_rig(height: usize, width: usize, distance: f64, fov_deg: f64) -> [Camera; 4] {
    RIG_AZIMUTHS_DEG.map(|az| Camera::new(az, RIG_ELEVATION_DEG, distance, fov_deg, width, height))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rig_geometry() {
        let rig = make_rig(64, 64, 5.0, 40.0);
        let azimuths: Vec<f64> = rig.iter().map(|c| c.azimuth_deg).collect();
        assert_eq!(azimuths, vec![0.0, 90.0, 180.0, 270.0]);
        for cam in &rig {
            assert_eq!(cam.elevation_deg, RIG_ELEVATION_DEG);
            assert_eq!(cam.distance, 5.0);
            // Forward ray passes through the origin.
            let (_, _, forward) = cam.basis();
            let eye = cam.eye();
            let closest = eye + forward * (-eye).dot(forward);
            assert!(closest.norm() < 1e-9);
        }
    }

    #[test]
    fn project_inverts_ray() {
        let cam = Camera::new(35.0, 20.0, 4.0, 45.0, 96, 96);
        for &(r, c) in &[(0usize, 0usize), (47, 13), (95, 95), (10, 80)] {
            let (o, d) = cam.ray(r as f64, c as f64);
            let p = o + d * 2.5;
            let (pr, pc, z) = cam.project(p).unwrap();
            assert!((pr - r as f64).abs() < 1e-9, "row {pr} vs {r}");
            assert!((pc - c as f64).abs() < 1e-9, "col {pc} vs {c}");
            assert!(z > 0.0 && z < 2.5 + 1e-9);
        }
    }

    #[test]
    fn behind_camera_rejected() {
        let cam = Camera::new(0.0, 20.0, 4.0, 40.0, 32, 32);
        let eye = cam.eye();
        let (_, _, forward) = cam.basis();
        assert!(cam.project(eye - forward).is_none());
    }
}
