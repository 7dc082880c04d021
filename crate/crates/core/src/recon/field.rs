//! Discretised opacity + colour fields on a bounding grid.

use crate::math::{vec3, Aabb, Vec3};

/// Cubic-resolution voxel grid holding opacity and colour. Voxel values sit
/// at cell centers; `x` varies fastest in the linear layout.
#[derive(Debug, Clone, PartialEq)]
pub struct PartField {
    pub resolution: usize,
    pub bbox: Aabb,
    /// Carve density constant the field was built with (metadata).
    pub kappa: f64,
    sigma: Vec<f32>,
    color: Vec<[f32; 3]>,
}

/// One field sample: interpolated opacity and premultiplied emission.
///
/// Colour is interpolated density-weighted (trilinear over sigma*rgb), so
/// summing fields voxel-wise commutes with sampling. The plain colour at a
/// point is `premult / sigma` where sigma > 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub sigma: f64,
    pub premult: [f64; 3],
}

impl FieldSample {
    pub const EMPTY: FieldSample = FieldSample {
        sigma: 0.0,
        premult: [0.0; 3],
    };
}

impl PartField {
    pub fn new(resolution: usize, bbox: Aabb, kappa: f64) -> PartField {
        let n = resolution * resolution * resolution;
        PartField {
            resolution,
            bbox,
            kappa,
            sigma: vec![0.0; n],
            color: vec![[0.0; 3]; n],
        }
    }

    #[inline]
    pub fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        (iz * self.resolution + iy) * self.resolution + ix
    }

    pub fn voxel_size(&self) -> Vec3 {
        self.bbox.extent() / self.resolution as f64
    }

    pub fn voxel_center(&self, ix: usize, iy: usize, iz: usize) -> Vec3 {
        let vs = self.voxel_size();
        self.bbox.min
            + vec3(
                (ix as f64 + 0.5) * vs.x,
                (iy as f64 + 0.5) * vs.y,
                (iz as f64 + 0.5) * vs.z,
            )
    }

    pub fn sigma_at(&self, ix: usize, iy: usize, iz: usize) -> f32 {
        self.sigma[self.index(ix, iy, iz)]
    }

    pub fn color_at(&self, ix: usize, iy: usize, iz: usize) -> [f32; 3] {
        self.color[self.index(ix, iy, iz)]
    }

    pub fn set_voxel(&mut self, ix: usize, iy: usize, iz: usize, sigma: f32, color: [f32; 3]) {
        let i = self.index(ix, iy, iz);
        self.sigma[i] = sigma;
        self.color[i] = color;
    }

    pub fn sigma_data(&self) -> &[f32] {
        &self.sigma
    }

    pub fn color_data(&self) -> &[[f32; 3]] {
        &self.color
    }

    pub fn occupied_count(&self) -> usize {
        self.sigma.iter().filter(|&&s| s > 0.0).count()
    }

    pub fn total_sigma(&self) -> f64 {
        self.sigma.iter().map(|&s| s as f64).sum()
    }

    pub fn is_all_finite(&self) -> bool {
        self.sigma.iter().all(|s| s.is_finite())
            && self.color.iter().flatten().all(|c| c.is_finite())
    }

    pub fn same_lattice(&self, other: &PartField) -> bool {
        self.resolution == other.resolution
            && (self.bbox.min - other.bbox.min).norm() < 1e-12
            && (self.bbox.max - other.bbox.max).norm() < 1e-12
    }

    /// Trilinear sample of opacity and premultiplied emission; zero outside
    /// the bounding box.
    pub fn sample(&self, p: Vec3) -> FieldSample {
        if !self.bbox.contains(p) {
            return FieldSample::EMPTY;
        }
        let vs = self.voxel_size();
        let r = self.resolution as isize;
        let ux = (p.x - self.bbox.min.x) / vs.x - 0.5;
        let uy = (p.y - self.bbox.min.y) / vs.y - 0.5;
        let uz = (p.z - self.bbox.min.z) / vs.z - 0.5;
        let (ix, iy, iz) = (ux.floor(), uy.floor(), uz.floor());
        let (fx, fy, fz) = (ux - ix, uy - iy, uz - iz);
        let clamp = |v: isize| -> usize { v.clamp(0, r - 1) as usize };
        let mut sigma = 0.0f64;
        let mut premult = [0.0f64; 3];
        for (dz, wz) in [(0isize, 1.0 - fz), (1, fz)] {
            for (dy, wy) in [(0isize, 1.0 - fy), (1, fy)] {
                for (dx, wx) in [(0isize, 1.0 - fx), (1, fx)] {
                    let w = wx * wy * wz;
                    if w == 0.0 {
                        continue;
                    }
                    let idx = self.index(
                        clamp(ix as isize + dx),
                        clamp(iy as isize + dy),
                        clamp(iz as isize + dz),
                    );
                    let s = self.sigma[idx] as f64;
                    sigma += w * s;
                    let c = self.color[idx];
                    premult[0] += w * s * c[0] as f64;
                    premult[1] += w * s * c[1] as f64;
                    premult[2] += w * s * c[2] as f64;
                }
            }
        }
        FieldSample { sigma, premult }
    }
}
