//! Generalised emission-absorption compositing of several part fields.
//!
//! All parts share the per-ray sampling lattice. At each sample the composite
//! transmittance uses the summed opacity, and each part's feature enters with
//! weight sigma_h / sum_l sigma_l (zero where the total opacity vanishes).

use crate::error::{Error, Result};
use crate::math::{Aabb, Vec3};
use crate::raster::ImageRgb;
use crate::recon::field::PartField;
use crate::recon::render::step_count;
use crate::render::camera::Camera;
use rayon::prelude::*;

/// A set of part fields in a shared world frame.
#[derive(Debug, Clone)]
pub struct Assembly {
    pub fields: Vec<PartField>,
    pub labels: Vec<String>,
}

impl Assembly {
    pub fn new(fields: Vec<PartField>, labels: Vec<String>) -> Result<Assembly> {
        if fields.is_empty() {
            return Err(Error::InvalidInput(
                "assembly needs at least one field".into(),
            ));
        }
        if labels.len() != fields.len() {
            return Err(Error::InvalidInput("labels must align with fields".into()));
        }
        for f in &fields {
            if !f.is_all_finite() {
                return Err(Error::InvalidInput(
                    "assembly field holds non-finite values".into(),
                ));
            }
        }
        Ok(Assembly { fields, labels })
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn union_bbox(&self) -> Aabb {
        self.fields
            .iter()
            .fold(Aabb::empty(), |acc, f| acc.union(f.bbox))
    }
}

/// Composite render: RGB, alpha, and per-part accumulated visibility.
#[derive(Debug, Clone)]
pub struct CompositeRender {
    pub rgb: ImageRgb,
    pub alpha: Vec<f32>,
    /// Per part, per pixel: total visibility weight contributed.
    pub part_visibility: Vec<Vec<f32>>,
    pub width: usize,
    pub height: usize,
}

impl CompositeRender {
    pub fn alpha_at(&self, row: usize, col: usize) -> f32 {
        self.alpha[row * self.width + col]
    }
}

struct RayOut {
    rgb: [f64; 3],
    alpha: f64,
    vis: Vec<f64>,
}

fn compose_ray(assembly: &Assembly, bbox: &Aabb, origin: Vec3, dir: Vec3, delta: f64) -> RayOut {
    let n_parts = assembly.len();
    let mut out = RayOut {
        rgb: [0.0; 3],
        alpha: 0.0,
        vis: vec![0.0; n_parts],
    };
    let Some((t_in, t_out)) = bbox.ray_range(origin, dir) else {
        return out;
    };
    let t0 = t_in.max(0.0);
    let steps = step_count(t0, t_out, delta);
    let mut optical_depth = 0.0f64;
    let mut t_prev = 1.0f64;
    let mut samples = Vec::with_capacity(n_parts);
    for j in 0..steps {
        let t = t0 + (j as f64 + 0.5) * delta;
        let p = origin + dir * t;
        samples.clear();
        let mut sigma_total = 0.0f64;
        for field in &assembly.fields {
            let s = field.sample(p);
            sigma_total += s.sigma;
            samples.push(s);
        }
        optical_depth += delta * sigma_total;
        let t_cur = (-optical_depth).exp();
        let visibility = t_prev - t_cur;
        if sigma_total > 0.0 {
            for (h, s) in samples.iter().enumerate() {
                if s.sigma > 0.0 {
                    let weight = s.sigma / sigma_total;
                    let feature = [
                        s.premult[0] / s.sigma,
                        s.premult[1] / s.sigma,
                        s.premult[2] / s.sigma,
                    ];
                    for (o, f) in out.rgb.iter_mut().zip(&feature) {
                        *o += visibility * weight * f;
                    }
                    out.vis[h] += visibility * weight;
                }
            }
        }
        t_prev = t_cur;
    }
    out.alpha = 1.0 - t_prev;
    out
}

/// Render an assembly from a camera on a shared sampling lattice.
pub fn compose_render(assembly: &Assembly, camera: &Camera, delta: f64) -> CompositeRender {
    assert!(delta > 0.0, "step length must be positive");
    let bbox = assembly.union_bbox();
    let (w, h) = (camera.width, camera.height);
    let rows: Vec<Vec<RayOut>> = (0..h)
        .into_par_iter()
        .map(|r| {
            (0..w)
                .map(|c| {
                    let (o, d) = camera.ray(r as f64, c as f64);
                    compose_ray(assembly, &bbox, o, d, delta)
                })
                .collect()
        })
        .collect();
    let mut rgb = ImageRgb::new(w, h);
    let mut alpha = vec![0.0f32; w * h];
    let mut part_visibility = vec![vec![0.0f32; w * h]; assembly.len()];
    for (r, row) in rows.into_iter().enumerate() {
        for (c, ray) in row.into_iter().enumerate() {
            rgb.set(
                r,
                c,
                [ray.rgb[0] as f32, ray.rgb[1] as f32, ray.rgb[2] as f32],
            );
            alpha[r * w + c] = ray.alpha as f32;
            for (h_idx, &v) in ray.vis.iter().enumerate() {
                part_visibility[h_idx][r * w + c] = v as f32;
            }
        }
    }
    CompositeRender {
        rgb,
        alpha,
        part_visibility,
        width: w,
        height: h,
    }
}

/// Merge an assembly into one field: summed opacity and density-weighted
/// colour per voxel. On a shared lattice the merged field's render equals
/// the composite render; otherwise fields are resampled onto the union
/// bounding box at the maximum member resolution.
pub fn merge_fields(assembly: &Assembly) -> PartField {
    let shared = assembly
        .fields
        .iter()
        .all(|f| f.same_lattice(&assembly.fields[0]));
    let (resolution, bbox) = if shared {
        (assembly.fields[0].resolution, assembly.fields[0].bbox)
    } else {
        (
            assembly.fields.iter().map(|f| f.resolution).max().unwrap(),
            assembly.union_bbox(),
        )
    };
    let kappa = assembly
        .fields
        .iter()
        .map(|f| f.kappa)
        .fold(0.0f64, f64::max);
    let mut merged = PartField::new(resolution, bbox, kappa);
    for iz in 0..resolution {
        for iy in 0..resolution {
            for ix in 0..resolution {
                let mut sigma = 0.0f64;
                let mut premult = [0.0f64; 3];
                if shared {
                    for f in &assembly.fields {
                        let s = f.sigma_at(ix, iy, iz) as f64;
                        let c = f.color_at(ix, iy, iz);
                        sigma += s;
                        for ch in 0..3 {
                            premult[ch] += s * c[ch] as f64;
                        }
                    }
                } else {
                    let p = merged.voxel_center(ix, iy, iz);
                    for f in &assembly.fields {
                        let s = f.sample(p);
                        sigma += s.sigma;
                        for (acc, v) in premult.iter_mut().zip(&s.premult) {
                            *acc += v;
                        }
                    }
                }
                if sigma > 0.0 {
                    merged.set_voxel(
                        ix,
                        iy,
                        iz,
                        sigma as f32,
                        [
                            (premult[0] / sigma) as f32,
                            (premult[1] / sigma) as f32,
                            (premult[2] / sigma) as f32,
                        ],
                    );
                }
            }
        }
    }
    merged
}
