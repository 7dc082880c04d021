//! Emission-absorption rendering of a single part field.

use crate::math::Vec3;
use crate::raster::{ImageRgb, Mask};
use crate::recon::field::PartField;
use crate::render::camera::Camera;
use rayon::prelude::*;

/// Rendered field: RGB plus per-pixel alpha (1 - final transmittance).
#[derive(Debug, Clone)]
pub struct FieldRender {
    pub rgb: ImageRgb,
    pub alpha: Vec<f32>,
    pub width: usize,
    pub height: usize,
}

impl FieldRender {
    pub fn alpha_at(&self, row: usize, col: usize) -> f32 {
        self.alpha[row * self.width + col]
    }

    /// Silhouette at an alpha threshold.
    pub fn silhouette(&self, threshold: f32) -> Mask {
        Mask::from_fn(self.width, self.height, |r, c| {
            self.alpha_at(r, c) >= threshold
        })
    }
}

/// Number of uniform steps covering `[t0, t1]` with spacing `delta`.
/// Guarded against float noise pushing an exact division up a step.
pub fn step_count(t0: f64, t1: f64, delta: f64) -> usize {
    if t1 <= t0 {
        return 0;
    }
    (((t1 - t0) / delta) - 1e-9).ceil().max(1.0) as usize
}

/// One step of a per-ray transmittance profile.
#[derive(Debug, Clone, Copy)]
pub struct ProfileStep {
    pub t: f64,
    pub sigma: f64,
    pub transmittance: f64,
}

/// Per-step transmittance along a single ray; diagnostic companion to
/// [`render_field`] that exposes the quadrature internals.
pub fn ray_profile(field: &PartField, origin: Vec3, dir: Vec3, delta: f64) -> Vec<ProfileStep> {
    let Some((t_in, t_out)) = field.bbox.ray_range(origin, dir) else {
        return Vec::new();
    };
    let t0 = t_in.max(0.0);
    let n = step_count(t0, t_out, delta);
    let mut out = Vec::with_capacity(n);
    let mut optical_depth = 0.0f64;
    for j in 0..n {
        let t = t0 + (j as f64 + 0.5) * delta;
        let s = field.sample(origin + dir * t);
        optical_depth += delta * s.sigma;
        out.push(ProfileStep {
            t,
            sigma: s.sigma,
            transmittance: (-optical_depth).exp(),
        });
    }
    out
}

fn render_ray(field: &PartField, origin: Vec3, dir: Vec3, delta: f64) -> ([f64; 3], f64) {
    let Some((t_in, t_out)) = field.bbox.ray_range(origin, dir) else {
        return ([0.0; 3], 0.0);
    };
    let t0 = t_in.max(0.0);
    let n = step_count(t0, t_out, delta);
    let mut rgb = [0.0f64; 3];
    let mut optical_depth = 0.0f64;
    let mut t_prev = 1.0f64;
    for j in 0..n {
        let t = t0 + (j as f64 + 0.5) * delta;
        let s = field.sample(origin + dir * t);
        optical_depth += delta * s.sigma;
        let t_cur = (-optical_depth).exp();
        let weight = t_prev - t_cur;
        if s.sigma > 0.0 {
            for (o, p) in rgb.iter_mut().zip(&s.premult) {
                *o += weight * (p / s.sigma);
            }
        }
        t_prev = t_cur;
    }
    (rgb, 1.0 - t_prev)
}

/// Render a field from a camera with uniform step length `delta`.
pub fn render_field(field: &PartField, camera: &Camera, delta: f64) -> FieldRender {
    assert!(delta > 0.0, "step length must be positive");
    let (w, h) = (camera.width, camera.height);
    let rows: Vec<Vec<([f64; 3], f64)>> = (0..h)
        .into_par_iter()
        .map(|r| {
            (0..w)
                .map(|c| {
                    let (o, d) = camera.ray(r as f64, c as f64);
                    render_ray(field, o, d, delta)
                })
                .collect()
        })
        .collect();
    let mut rgb = ImageRgb::new(w, h);
    let mut alpha = vec![0.0f32; w * h];
    for (r, row) in rows.into_iter().enumerate() {
        for (c, (color, a)) in row.into_iter().enumerate() {
            rgb.set(r, c, [color[0] as f32, color[1] as f32, color[2] as f32]);
            alpha[r * w + c] = a as f32;
        }
    }
    FieldRender {
        rgb,
        alpha,
        width: w,
        height: h,
    }
}
