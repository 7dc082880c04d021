//! End-to-end reassembly evaluation: segment, complete, carve, compose, and
//! compare the part-based composite against the unstructured reconstruction
//! of the whole object at seeded novel views.

use crate::completer::{
    complete_oracle, complete_passthrough, complete_symmetry, CompleterId, CompletionRequest,
};
use crate::composer::compose::{compose_render, Assembly};
use crate::error::{Error, Result};
use crate::forge::asset::Asset;
use crate::math::round_sig;
use crate::metrics::iou;
use crate::proposer::{rank_and_dedup, sample_noisy_oracle, NoiseSpec, RankedProposals};
use crate::raster::foreground_psnr;
use crate::recon::carve::{carve, CarveConfig};
use crate::render::bundle::{render_single_view, render_views, ViewBundle};
use crate::render::camera::{make_rig, Camera};
use crate::render::march::MarchConfig;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Options for one reassembly run.
#[derive(Debug, Clone)]
pub struct ReassemblyOptions {
    pub tile: usize,
    pub fov_deg: f64,
    /// Camera distance as a multiple of the asset's bounding radius.
    pub distance_factor: f64,
    pub march: MarchConfig,
    pub noise: NoiseSpec,
    pub noise_seed: u64,
    pub completer: CompleterId,
    pub carve: CarveConfig,
    /// Ray-march step as a multiple of the carve voxel size.
    pub delta_factor: f64,
    pub novel_views: usize,
    pub novel_seed: u64,
    /// Novel-view elevation range in degrees.
    pub elevation_range: (f64, f64),
}

impl Default for ReassemblyOptions {
    fn default() -> Self {
        ReassemblyOptions {
            tile: 96,
            fov_deg: 40.0,
            distance_factor: 2.7,
            march: MarchConfig::default(),
            noise: NoiseSpec::zero(1),
            noise_seed: 0,
            completer: CompleterId::Oracle,
            carve: CarveConfig {
                resolution: 96,
                ..CarveConfig::default()
            },
            delta_factor: 1.0,
            novel_views: 4,
            novel_seed: 17,
            elevation_range: (0.0, 40.0),
        }
    }
}

/// Per-asset outcome of the reassembly comparison.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AssetReassembly {
    pub id: String,
    pub parts_used: usize,
    pub psnr_compositional: f64,
    pub psnr_unstructured: f64,
    /// compositional minus unstructured, in dB.
    pub delta_db: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReassemblyReport {
    pub per_asset: Vec<AssetReassembly>,
    pub mean_compositional: f64,
    pub mean_unstructured: f64,
    pub mean_abs_delta: f64,
}

impl ReassemblyReport {
    pub fn from_assets(per_asset: Vec<AssetReassembly>) -> ReassemblyReport {
        let n = per_asset.len().max(1) as f64;
        let mean_compositional = round_sig(
            per_asset.iter().map(|a| a.psnr_compositional).sum::<f64>() / n,
            9,
        );
        let mean_unstructured = round_sig(
            per_asset.iter().map(|a| a.psnr_unstructured).sum::<f64>() / n,
            9,
        );
        let mean_abs_delta = round_sig(
            per_asset.iter().map(|a| a.delta_db.abs()).sum::<f64>() / n,
            9,
        );
        ReassemblyReport {
            per_asset,
            mean_compositional,
            mean_unstructured,
            mean_abs_delta,
        }
    }
}

/// Seeded novel viewpoints: uniform azimuth, elevation in the given range.
pub fn novel_cameras(
    count: usize,
    seed: u64,
    tile: usize,
    distance: f64,
    fov_deg: f64,
    elevation_range: (f64, f64),
) -> Vec<Camera> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let az = rng.gen_range(0.0..360.0);
            let el = rng.gen_range(elevation_range.0..elevation_range.1);
            Camera::new(az, el, distance, fov_deg, tile, tile)
        })
        .collect()
}

/// Run the chosen completer for one ranked proposal. The oracle looks up the
/// ground-truth part by best IoU against the proposal mask.
pub fn complete_proposal(
    bundle: &ViewBundle,
    proposal: &crate::raster::Mask,
    completer: CompleterId,
) -> Result<crate::completer::CompletionResult> {
    let req = CompletionRequest::from_context(&bundle.grid_rgb, proposal);
    match completer {
        CompleterId::Passthrough => Ok(complete_passthrough(&req)),
        CompleterId::Symmetry => Ok(complete_symmetry(&req)),
        CompleterId::Oracle => {
            let mut best = 0usize;
            let mut best_iou = f64::NEG_INFINITY;
            for (s, gt) in bundle.masks.iter().enumerate() {
                let m = iou(proposal, gt);
                if m > best_iou {
                    best_iou = m;
                    best = s;
                }
            }
            complete_oracle(
                &req,
                &bundle.part_views[best],
                &bundle.part_view_masks[best],
            )
        }
    }
}

/// Segment the bundle with the noisy-oracle sampler and rank the proposals.
pub fn segment_for_reassembly(
    bundle: &ViewBundle,
    noise: &NoiseSpec,
    seed: u64,
) -> RankedProposals {
    rank_and_dedup(&sample_noisy_oracle(&bundle.masks, noise, seed))
}

/// Full segment -> complete -> carve -> compose run on one asset, compared
/// against the unstructured reconstruction of the whole image.
pub fn reassembly_report(asset: &Asset, opts: &ReassemblyOptions) -> Result<AssetReassembly> {
    let radius = asset.bounds.radius();
    let distance = opts.distance_factor * radius;
    let rig = make_rig(opts.tile, opts.tile, distance, opts.fov_deg);
    let bundle = render_views(asset, &rig, &opts.march)?;

    let ranked = segment_for_reassembly(&bundle, &opts.noise, opts.noise_seed);
    if ranked.is_empty() {
        return Err(Error::InvalidInput(format!(
            "asset {}: segmentation produced no proposals",
            asset.id
        )));
    }

    let carve_bbox = asset.bounds.padded(0.05 * radius.max(1e-6));
    let mut fields = Vec::new();
    let mut labels = Vec::new();
    for (i, proposal) in ranked.masks.iter().enumerate() {
        let completion = complete_proposal(&bundle, proposal, opts.completer)?;
        if completion.part_foreground.is_empty() {
            continue;
        }
        let carved = carve(
            &completion.part_image,
            &completion.part_foreground,
            &rig,
            carve_bbox,
            &opts.carve,
        )?;
        if carved.field.occupied_count() > 0 {
            fields.push(carved.field);
            labels.push(format!("part-{i}"));
        }
    }
    if fields.is_empty() {
        return Err(Error::InvalidInput(format!(
            "asset {}: no parts survived carving",
            asset.id
        )));
    }
    let parts_used = fields.len();
    let assembly = Assembly::new(fields, labels)?;

    // Unstructured route: one carve of the whole object from the full image.
    let unstructured = carve(
        &bundle.grid_rgb,
        &bundle.foreground,
        &rig,
        carve_bbox,
        &opts.carve,
    )?;
    let unstructured_assembly = Assembly::new(vec![unstructured.field], vec!["object".into()])?;

    let delta = assembly.fields[0].voxel_size().min_component() * opts.delta_factor;
    let cams = novel_cameras(
        opts.novel_views,
        opts.novel_seed,
        opts.tile,
        distance,
        opts.fov_deg,
        opts.elevation_range,
    );
    let mut comp_sum = 0.0f64;
    let mut unstr_sum = 0.0f64;
    for cam in &cams {
        let (gt_rgb, gt_fg) = render_single_view(asset, cam, &opts.march)?;
        let comp = compose_render(&assembly, cam, delta);
        let unstr = compose_render(&unstructured_assembly, cam, delta);
        comp_sum += foreground_psnr(&comp.rgb, &gt_rgb, &gt_fg)?;
        unstr_sum += foreground_psnr(&unstr.rgb, &gt_rgb, &gt_fg)?;
    }
    let n = cams.len() as f64;
    let psnr_compositional = round_sig(comp_sum / n, 9);
    let psnr_unstructured = round_sig(unstr_sum / n, 9);
    Ok(AssetReassembly {
        id: asset.id.clone(),
        parts_used,
        psnr_compositional,
        psnr_unstructured,
        delta_db: round_sig(psnr_compositional - psnr_unstructured, 9),
    })
}
