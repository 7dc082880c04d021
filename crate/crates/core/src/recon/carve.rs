//! Shape-from-silhouette voxel carving over the 2x2 view grid.

use crate::error::{Error, Result};
use crate::math::{vec3, Aabb};
use crate::raster::{ImageRgb, Mask};
use crate::recon::field::PartField;
use crate::render::camera::Camera;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Which views must confirm a voxel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConsistencyRule {
    /// Voxel kept only if inside the silhouette in all 4 views; projecting
    /// outside a view counts as a miss.
    AllViews,
    /// Out-of-frame views abstain; at least one view must confirm.
    VisibleViews,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CarveConfig {
    pub resolution: usize,
    /// Opacity assigned to occupied voxels, per scene unit.
    pub kappa: f64,
    pub rule: ConsistencyRule,
}

impl Default for CarveConfig {
    fn default() -> Self {
        CarveConfig {
            resolution: 128,
            kappa: 50.0,
            rule: ConsistencyRule::AllViews,
        }
    }
}

impl CarveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(32..=256).contains(&self.resolution) {
            return Err(Error::InvalidInput(format!(
                "carve resolution {} outside [32, 256]",
                self.resolution
            )));
        }
        if self.kappa <= 0.0 {
            return Err(Error::InvalidInput("kappa must be > 0".into()));
        }
        Ok(())
    }
}

/// Carve output plus the empty-input flag.
#[derive(Debug, Clone)]
pub struct Carved {
    pub field: PartField,
    /// Set when the silhouette was empty and nothing could be carved.
    pub empty_input: bool,
}

/// Cube centered on the rig target sized to the region seen by every view.
pub fn default_carve_bbox(rig: &[Camera; 4]) -> Aabb {
    let cam = &rig[0];
    let half = cam.distance * (cam.fov_deg.to_radians() * 0.5).tan() * 0.95;
    Aabb::new(
        cam.target - vec3(half, half, half),
        cam.target + vec3(half, half, half),
    )
}

/// Does the voxel center project inside the silhouette of view `t`?
/// Returns `None` when the projection misses the view frustum entirely.
fn silhouette_test(
    mask: &Mask,
    cam: &Camera,
    tile: usize,
    tile_h: usize,
    tile_w: usize,
    p: crate::math::Vec3,
) -> Option<bool> {
    let (row, col, _z) = cam.project(p)?;
    let (r, c) = (row.round() as isize, col.round() as isize);
    if r < 0 || r >= tile_h as isize || c < 0 || c >= tile_w as isize {
        return None;
    }
    let (gr, gc) = (
        (tile / 2) * tile_h + r as usize,
        (tile % 2) * tile_w + c as usize,
    );
    Some(mask.get(gr, gc))
}

/// Build a part field from a completed multi-view image and its silhouette.
///
/// Occupancy follows the consistency rule over the 4 views; occupied voxels
/// get opacity `kappa`. Colour comes from averaging the image RGB over the
/// views in which the voxel is the first occupied cell along the pixel ray;
/// interior voxels fall back to the mean of the coloured surface.
pub fn carve(
    part_image: &ImageRgb,
    part_mask: &Mask,
    rig: &[Camera; 4],
    bbox: Aabb,
    cfg: &CarveConfig,
) -> Result<Carved> {
    cfg.validate()?;
    let (tile_h, tile_w) = (rig[0].height, rig[0].width);
    if part_mask.width() != tile_w * 2 || part_mask.height() != tile_h * 2 {
        return Err(Error::BadResolution(format!(
            "mask {}x{} does not match the rig grid {}x{}",
            part_mask.width(),
            part_mask.height(),
            tile_w * 2,
            tile_h * 2
        )));
    }
    let mut field = PartField::new(cfg.resolution, bbox, cfg.kappa);
    if part_mask.is_empty() {
        return Ok(Carved {
            field,
            empty_input: true,
        });
    }

    // Occupancy pass, parallel over z-slices.
    let r = cfg.resolution;
    let kappa = cfg.kappa as f32;
    let probe = field.clone(); // geometry only, for voxel centers
    let slices: Vec<Vec<bool>> = (0..r)
        .into_par_iter()
        .map(|iz| {
            let mut slice = vec![false; r * r];
            for iy in 0..r {
                for ix in 0..r {
                    let p = probe.voxel_center(ix, iy, iz);
                    let mut confirmed = 0usize;
                    let mut denied = false;
                    for (t, cam) in rig.iter().enumerate() {
                        match silhouette_test(part_mask, cam, t, tile_h, tile_w, p) {
                            Some(true) => confirmed += 1,
                            Some(false) => {
                                denied = true;
                                break;
                            }
                            None => {
                                if cfg.rule == ConsistencyRule::AllViews {
                                    denied = true;
                                    break;
                                }
                            }
                        }
                    }
                    let occupied = match cfg.rule {
                        ConsistencyRule::AllViews => !denied && confirmed == 4,
                        ConsistencyRule::VisibleViews => !denied && confirmed >= 1,
                    };
                    slice[iy * r + ix] = occupied;
                }
            }
            slice
        })
        .collect();
    for (iz, slice) in slices.iter().enumerate() {
        for iy in 0..r {
            for ix in 0..r {
                if slice[iy * r + ix] {
                    field.set_voxel(ix, iy, iz, kappa, [0.0; 3]);
                }
            }
        }
    }
    if field.occupied_count() == 0 {
        return Ok(Carved {
            field,
            empty_input: false,
        });
    }

    // Colour pass: march every silhouette pixel's ray to its first occupied
    // voxel and deposit the pixel colour there.
    let step = field.voxel_size().min_component() * 0.5;
    let mut sums = vec![[0.0f64; 3]; r * r * r];
    let mut counts = vec![0u32; r * r * r];
    for (t, cam) in rig.iter().enumerate() {
        let (r0, c0) = ((t / 2) * tile_h, (t % 2) * tile_w);
        for tr in 0..tile_h {
            for tc in 0..tile_w {
                if !part_mask.get(r0 + tr, c0 + tc) {
                    continue;
                }
                let (o, d) = cam.ray(tr as f64, tc as f64);
                let Some((t_in, t_out)) = bbox.ray_range(o, d) else {
                    continue;
                };
                let mut t = t_in.max(0.0) + step * 0.5;
                while t < t_out {
                    let p = o + d * t;
                    let vs = field.voxel_size();
                    let ix = ((p.x - bbox.min.x) / vs.x).floor() as isize;
                    let iy = ((p.y - bbox.min.y) / vs.y).floor() as isize;
                    let iz = ((p.z - bbox.min.z) / vs.z).floor() as isize;
                    if ix >= 0 && iy >= 0 && iz >= 0 {
                        let (ix, iy, iz) = (ix as usize, iy as usize, iz as usize);
                        if ix < r && iy < r && iz < r && field.sigma_at(ix, iy, iz) > 0.0 {
                            let px = part_image.get(r0 + tr, c0 + tc);
                            let idx = field.index(ix, iy, iz);
                            for ch in 0..3 {
                                sums[idx][ch] += px[ch] as f64;
                            }
                            counts[idx] += 1;
                            break;
                        }
                    }
                    t += step;
                }
            }
        }
    }

    // Mean per voxel; voxels no ray reached inherit the colour of their
    // nearest coloured neighbour (6-neighbour BFS, deterministic order).
    let mut colors: Vec<Option<[f32; 3]>> = vec![None; r * r * r];
    let mut queue = std::collections::VecDeque::new();
    for iz in 0..r {
        for iy in 0..r {
            for ix in 0..r {
                let idx = field.index(ix, iy, iz);
                if counts[idx] > 0 {
                    let n = counts[idx] as f64;
                    colors[idx] = Some([
                        (sums[idx][0] / n) as f32,
                        (sums[idx][1] / n) as f32,
                        (sums[idx][2] / n) as f32,
                    ]);
                    queue.push_back((ix, iy, iz));
                }
            }
        }
    }
    while let Some((ix, iy, iz)) = queue.pop_front() {
        let here = colors[field.index(ix, iy, iz)].unwrap();
        let neighbours = [
            (ix.wrapping_sub(1), iy, iz),
            (ix + 1, iy, iz),
            (ix, iy.wrapping_sub(1), iz),
            (ix, iy + 1, iz),
            (ix, iy, iz.wrapping_sub(1)),
            (ix, iy, iz + 1),
        ];
        for (nx, ny, nz) in neighbours {
            if nx >= r || ny >= r || nz >= r {
                continue;
            }
            let idx = field.index(nx, ny, nz);
            if field.sigma_at(nx, ny, nz) > 0.0 && colors[idx].is_none() {
                colors[idx] = Some(here);
                queue.push_back((nx, ny, nz));
            }
        }
    }
    for iz in 0..r {
        for iy in 0..r {
            for ix in 0..r {
                if field.sigma_at(ix, iy, iz) > 0.0 {
                    let idx = field.index(ix, iy, iz);
                    let color = colors[idx].unwrap_or([0.5; 3]);
                    field.set_voxel(ix, iy, iz, kappa, color);
                }
            }
        }
    }

    Ok(Carved {
        field,
        empty_input: false,
    })
}
