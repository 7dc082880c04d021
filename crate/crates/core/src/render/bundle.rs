//! Multi-view rendering into the 2x2 grid with per-part depths and masks.
//!
//! Per-part depths are traced with each part in isolation, so occluded parts
//! keep finite depth wherever they exist along a ray. The grid RGB, the part
//! masks and the foreground are all derived from those same depth buffers,
//! which makes the mask partition and mask/RGB consistency hold by
//! construction.

use crate::error::Result;
use crate::forge::asset::{Asset, Part};
use crate::math::Vec3;
use crate::raster::{DepthMap, ImageRgb, Mask};
use crate::render::camera::Camera;
use crate::render::march::{sphere_trace, MarchConfig, Shading};
use rayon::prelude::*;

/// Rendered views of one asset: grid image, per-part depth grids, masks and
/// the isolated per-part renders used as completion ground truth.
#[derive(Debug, Clone)]
pub struct ViewBundle {
    pub tile_width: usize,
    pub tile_height: usize,
    pub grid_rgb: ImageRgb,
    /// Per-part depth over the whole grid; infinity marks a miss.
    pub part_depth: Vec<DepthMap>,
    /// Depth-argmin visibility masks, pairwise disjoint.
    pub masks: Vec<Mask>,
    /// Union of the part masks.
    pub foreground: Mask,
    /// Isolated render of each part from the same rig.
    pub part_views: Vec<ImageRgb>,
    /// Silhouette of each isolated part render.
    pub part_view_masks: Vec<Mask>,
    pub rig: [Camera; 4],
}

impl ViewBundle {
    pub fn grid_width(&self) -> usize {
        self.tile_width * 2
    }

    pub fn grid_height(&self) -> usize {
        self.tile_height * 2
    }

    pub fn part_count(&self) -> usize {
        self.masks.len()
    }

    /// Fraction of a part's silhouette hidden by other parts across the grid.
    pub fn occlusion_fraction(&self, part: usize) -> f64 {
        let full = self.part_view_masks[part].count();
        if full == 0 {
            return 0.0;
        }
        let visible = self.masks[part].count();
        1.0 - visible as f64 / full as f64
    }
}

/// Map a grid pixel to (tile index, row in tile, col in tile).
pub fn grid_to_tile(row: usize, col: usize, tile_h: usize, tile_w: usize) -> (usize, usize, usize) {
    let tr = row / tile_h;
    let tc = col / tile_w;
    (tr * 2 + tc, row % tile_h, col % tile_w)
}

/// Depth-argmin masks: pixel (i, j) lands in the mask of the part with the
/// smallest finite depth; ties go to the lowest part index.
pub fn derive_masks(depths: &[DepthMap]) -> Vec<Mask> {
    if depths.is_empty() {
        return Vec::new();
    }
    let (w, h) = (depths[0].width, depths[0].height);
    let mut masks: Vec<Mask> = (0..depths.len()).map(|_| Mask::new(w, h)).collect();
    for r in 0..h {
        for c in 0..w {
            let mut best = f32::INFINITY;
            let mut arg = None;
            for (k, d) in depths.iter().enumerate() {
                let v = d.get(r, c);
                if v < best {
                    best = v;
                    arg = Some(k);
                }
            }
            if let Some(k) = arg {
                masks[k].set(r, c, true);
            }
        }
    }
    masks
}

fn part_normal(part: &Part, p: Vec3) -> Vec3 {
    let h = 1e-4;
    let dx = part.sdf(p + Vec3::X * h).0 - part.sdf(p - Vec3::X * h).0;
    let dy = part.sdf(p + Vec3::Y * h).0 - part.sdf(p - Vec3::Y * h).0;
    let dz = part.sdf(p + Vec3::Z * h).0 - part.sdf(p - Vec3::Z * h).0;
    let g = Vec3 {
        x: dx,
        y: dy,
        z: dz,
    };
    let n = g.norm();
    if n > 0.0 {
        g / n
    } else {
        Vec3::Y
    }
}

fn shade(part: &Part, p: Vec3, light: Vec3, shading: Shading) -> [f32; 3] {
    let (_, albedo) = part.sdf(p);
    match shading {
        Shading::AlbedoFlat => [albedo[0] as f32, albedo[1] as f32, albedo[2] as f32],
        Shading::LambertFixedLight => {
            let n = part_normal(part, p);
            let intensity = 0.2 + 0.8 * n.dot(light).max(0.0);
            [
                (albedo[0] * intensity) as f32,
                (albedo[1] * intensity) as f32,
                (albedo[2] * intensity) as f32,
            ]
        }
    }
}

/// Trace one part alone from one camera; returns the tile depth buffer.
fn trace_part_tile(part: &Part, cam: &Camera, cfg: &MarchConfig) -> Result<DepthMap> {
    let (h, w) = (cam.height, cam.width);
    let rows: Result<Vec<Vec<f32>>> = (0..h)
        .into_par_iter()
        .map(|r| {
            let mut row = vec![f32::INFINITY; w];
            for (c, out) in row.iter_mut().enumerate() {
                let (o, d) = cam.ray(r as f64, c as f64);
                if let Some(t) = sphere_trace(|p| part.sdf(p).0, o, d, cfg)? {
                    *out = t as f32;
                }
            }
            Ok(row)
        })
        .collect();
    let mut depth = DepthMap::new(w, h);
    for (r, row) in rows?.into_iter().enumerate() {
        for (c, v) in row.into_iter().enumerate() {
            depth.set(r, c, v);
        }
    }
    Ok(depth)
}

/// Render an asset from a single camera: shaded RGB plus foreground mask.
/// Same tracing and shading path as the grid render.
pub fn render_single_view(
    asset: &Asset,
    cam: &Camera,
    cfg: &MarchConfig,
) -> Result<(ImageRgb, Mask)> {
    cfg.validate(asset.bounds.radius() * 2.0)?;
    let depths: Vec<DepthMap> = asset
        .parts
        .iter()
        .map(|part| trace_part_tile(part, cam, cfg))
        .collect::<Result<_>>()?;
    let (w, h) = (cam.width, cam.height);
    let mut rgb = ImageRgb::new(w, h);
    let mut fg = Mask::new(w, h);
    for r in 0..h {
        for c in 0..w {
            let mut best = f32::INFINITY;
            let mut arg = None;
            for (k, d) in depths.iter().enumerate() {
                let v = d.get(r, c);
                if v < best {
                    best = v;
                    arg = Some(k);
                }
            }
            if let Some(k) = arg {
                let (o, d) = cam.ray(r as f64, c as f64);
                let p = o + d * best as f64;
                rgb.set(
                    r,
                    c,
                    shade(&asset.parts[k], p, cam.light_dir(), cfg.shading),
                );
                fg.set(r, c, true);
            }
        }
    }
    Ok((rgb, fg))
}

/// Render an asset into a [`ViewBundle`] from the given rig.
pub fn render_views(asset: &Asset, rig: &[Camera; 4], cfg: &MarchConfig) -> Result<ViewBundle> {
    cfg.validate(asset.bounds.radius() * 2.0)?;
    let (tile_h, tile_w) = (rig[0].height, rig[0].width);
    let (gw, gh) = (tile_w * 2, tile_h * 2);
    let n_parts = asset.parts.len();

    // Per-part depth grids from isolated traces.
    let mut part_depth: Vec<DepthMap> = Vec::with_capacity(n_parts);
    for part in &asset.parts {
        let mut grid = DepthMap::new(gw, gh);
        for (t, cam) in rig.iter().enumerate() {
            let tile = trace_part_tile(part, cam, cfg)?;
            let (r0, c0) = ((t / 2) * tile_h, (t % 2) * tile_w);
            for r in 0..tile_h {
                for c in 0..tile_w {
                    grid.set(r0 + r, c0 + c, tile.get(r, c));
                }
            }
        }
        part_depth.push(grid);
    }

    let masks = derive_masks(&part_depth);
    let mut foreground = Mask::new(gw, gh);
    for m in &masks {
        foreground.union_with(m);
    }

    // Grid RGB from the argmin part's own hit point.
    let mut grid_rgb = ImageRgb::new(gw, gh);
    for r in 0..gh {
        for c in 0..gw {
            let mut best = f32::INFINITY;
            let mut arg = None;
            for (k, d) in part_depth.iter().enumerate() {
                let v = d.get(r, c);
                if v < best {
                    best = v;
                    arg = Some(k);
                }
            }
            if let Some(k) = arg {
                let (tile, tr, tc) = grid_to_tile(r, c, tile_h, tile_w);
                let cam = &rig[tile];
                let (o, d) = cam.ray(tr as f64, tc as f64);
                let p = o + d * best as f64;
                grid_rgb.set(
                    r,
                    c,
                    shade(&asset.parts[k], p, cam.light_dir(), cfg.shading),
                );
            }
        }
    }

    // Isolated part renders (completion ground truth) share the depth buffers.
    let mut part_views = Vec::with_capacity(n_parts);
    let mut part_view_masks = Vec::with_capacity(n_parts);
    for (k, depth) in part_depth.iter().enumerate() {
        let mut img = ImageRgb::new(gw, gh);
        let mut fg = Mask::new(gw, gh);
        for r in 0..gh {
            for c in 0..gw {
                let t = depth.get(r, c);
                if t.is_finite() {
                    let (tile, tr, tc) = grid_to_tile(r, c, tile_h, tile_w);
                    let cam = &rig[tile];
                    let (o, d) = cam.ray(tr as f64, tc as f64);
                    let p = o + d * t as f64;
                    img.set(
                        r,
                        c,
                        shade(&asset.parts[k], p, cam.light_dir(), cfg.shading),
                    );
                    fg.set(r, c, true);
                }
            }
        }
        part_views.push(img);
        part_view_masks.push(fg);
    }

    Ok(ViewBundle {
        tile_width: tile_w,
        tile_height: tile_h,
        grid_rgb,
        part_depth,
        masks,
        foreground,
        part_views,
        part_view_masks,
        rig: *rig,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forge::asset::Part;
    use crate::forge::primitive::{PartPrimitive, PrimitiveKind};
    use crate::math::{vec3, Pose, Quat};
    use crate::render::camera::make_rig;

    fn sphere_asset(centers: &[(Vec3, f64)]) -> Asset {
        let parts = centers
            .iter()
            .map(|&(c, r)| {
                Part::new(vec![PartPrimitive::new(
                    PrimitiveKind::Sphere,
                    Pose::new(Quat::IDENTITY, c),
                    vec3(r, r, r),
                    [0.7, 0.4, 0.2],
                )])
            })
            .collect();
        Asset::new("test", parts).unwrap()
    }

    #[test]
    fn single_sphere_disc_identical_across_tiles() {
        let asset = sphere_asset(&[(Vec3::ZERO, 1.0)]);
        let rig = make_rig(48, 48, 3.5, 40.0);
        let bundle = render_views(&asset, &rig, &MarchConfig::default()).unwrap();
        // Foreground in each tile is a disc of the analytically expected size.
        let expected_disc_r = {
            // Angular radius of a sphere of radius 1 at distance 3.5.
            let sin_a = 1.0 / 3.5f64;
            let tan_a = sin_a / (1.0 - sin_a * sin_a).sqrt();
            tan_a / (20f64.to_radians().tan()) * 24.0
        };
        let mut per_tile = [0usize; 4];
        for (r, c) in bundle.foreground.iter_set() {
            let (t, _, _) = grid_to_tile(r, c, 48, 48);
            per_tile[t] += 1;
        }
        let expected_area = std::f64::consts::PI * expected_disc_r * expected_disc_r;
        for &count in &per_tile {
            let err = (count as f64 - expected_area).abs() / expected_area;
            assert!(err < 0.15, "disc area {count} vs {expected_area}");
        }
        // Identical silhouettes across tiles.
        for t in 1..4 {
            for r in 0..48 {
                for c in 0..48 {
                    let a = bundle.masks[0].get(r, c);
                    let b = bundle.masks[0].get((t / 2) * 48 + r, (t % 2) * 48 + c);
                    assert_eq!(a, b);
                }
            }
        }
    }

    #[test]
    fn empty_pixels_have_no_mask_and_infinite_depth() {
        let asset = sphere_asset(&[(Vec3::ZERO, 0.5)]);
        let rig = make_rig(32, 32, 3.0, 40.0);
        let bundle = render_views(&asset, &rig, &MarchConfig::default()).unwrap();
        assert!(!bundle.foreground.get(0, 0), "corner should be empty space");
        assert_eq!(bundle.part_depth[0].get(0, 0), f32::INFINITY);
    }

    #[test]
    fn stacked_spheres_mask_order_in_tile0() {
        let asset = sphere_asset(&[
            (vec3(0.0, 0.55, 0.0), 0.5),  // upper = part 0
            (vec3(0.0, -0.55, 0.0), 0.5), // lower = part 1
        ]);
        let rig = make_rig(64, 64, 4.0, 40.0);
        let bundle = render_views(&asset, &rig, &MarchConfig::default()).unwrap();
        // In tile 0, every row of the upper sphere's mask lies strictly above
        // the lowest row of the lower sphere's mask centroid region.
        let rows_of = |m: &Mask| -> Vec<usize> {
            m.iter_set()
                .filter(|&(r, c)| r < 64 && c < 64)
                .map(|(r, _)| r)
                .collect()
        };
        let upper_rows = rows_of(&bundle.masks[0]);
        let lower_rows = rows_of(&bundle.masks[1]);
        assert!(!upper_rows.is_empty() && !lower_rows.is_empty());
        let upper_mean = upper_rows.iter().sum::<usize>() as f64 / upper_rows.len() as f64;
        let lower_mean = lower_rows.iter().sum::<usize>() as f64 / lower_rows.len() as f64;
        assert!(upper_mean < lower_mean, "upper part must project higher");
    }

    #[test]
    fn tie_depths_go_to_lower_index() {
        let mut a = DepthMap::new(4, 4);
        let mut b = DepthMap::new(4, 4);
        for r in 0..4 {
            for c in 0..4 {
                a.set(r, c, 1.0);
                b.set(r, c, 1.0);
            }
        }
        let masks = derive_masks(&[a, b]);
        assert_eq!(masks[0].count(), 16);
        assert_eq!(masks[1].count(), 0);
    }

    #[test]
    fn argmin_prefers_nearer_part() {
        let mut a = DepthMap::new(1, 2);
        let mut b = DepthMap::new(1, 2);
        a.set(0, 0, 1.0);
        b.set(0, 0, 2.0);
        // second pixel: only part 1 present
        b.set(1, 0, 0.5);
        let masks = derive_masks(&[a, b]);
        assert!(masks[0].get(0, 0) && !masks[1].get(0, 0));
        assert!(masks[1].get(1, 0) && !masks[0].get(1, 0));
    }

    #[test]
    fn mask_partition_exact() {
        let asset = sphere_asset(&[
            (vec3(-0.4, 0.0, 0.0), 0.6),
            (vec3(0.4, 0.0, 0.0), 0.6),
            (vec3(0.0, 0.7, 0.0), 0.5),
        ]);
        let rig = make_rig(48, 48, 4.2, 40.0);
        let bundle = render_views(&asset, &rig, &MarchConfig::default()).unwrap();
        // Disjoint and covering the foreground, pixel by pixel.
        for i in 0..bundle.masks.len() {
            for j in (i + 1)..bundle.masks.len() {
                assert!(bundle.masks[i].is_disjoint(&bundle.masks[j]));
            }
        }
        let mut union = Mask::new(bundle.grid_width(), bundle.grid_height());
        for m in &bundle.masks {
            union.union_with(m);
        }
        assert_eq!(union, bundle.foreground);
    }
}
