//! Pipeline stages behind the CLI subcommands. Every stage reads its inputs
//! from the output directory and writes file outputs sufficient for the next
//! stage; all randomness derives from seeds in the config.

use crate::completer::{
    complete_oracle, complete_passthrough, complete_symmetry, pack_conditioning, CompleterId,
    CompletionRequest, CompletionResult,
};
use crate::composer::compose::{compose_render, Assembly};
use crate::composer::report::{novel_cameras, AssetReassembly, ReassemblyReport};
use crate::error::{Error, Result};
use crate::forge::asset::Asset;
use crate::forge::generate::{generate_asset, GeneratorSpec, GENERATOR_VERSION};
use crate::forge::manifest::DatasetManifest;
use crate::forge::volume::part_volume_fractions;
use crate::io::pfm::write_pfm;
use crate::io::png::{load_bilevel_png, load_rgb_png, save_bilevel_png, save_rgb_png};
use crate::io::rle::{ProposalFile, RleMask, RleProposal};
use crate::io::{cond_file, field_file};
use crate::math::round_sig;
use crate::metrics::{average_precision, greedy_match, iou, mean_ap, recall_at_k};
use crate::pipeline::config::PipelineConfig;
use crate::proposer::{
    rank_and_dedup, sample_noisy_oracle, seeded_query, ProposalSet, Provenance, RankedProposals,
};
use crate::raster::{foreground_psnr, DepthMap, ImageRgb, Mask};
use crate::recon::carve::carve;
use crate::render::bundle::{render_single_view, render_views};
use crate::render::camera::{make_rig, Camera};
use crate::segmap::{decode, encode, make_palette, random_permutation, Palette};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Segmentation mode for `cmd_segment`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentMode {
    Auto,
    Seeded,
}

impl std::str::FromStr for SegmentMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<SegmentMode> {
        match s {
            "auto" => Ok(SegmentMode::Auto),
            "seeded" => Ok(SegmentMode::Seeded),
            other => Err(Error::InvalidInput(format!("unknown mode '{other}'"))),
        }
    }
}

fn mix_seed(base: u64, a: u64, b: u64) -> u64 {
    let mut x =
        base ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ b.wrapping_mul(0xC2B2_AE3D_27D4_EB4F);
    x ^= x >> 33;
    x = x.wrapping_mul(0xFF51_AFD7_ED55_8CCD);
    x ^= x >> 33;
    x
}

// ---------------------------------------------------------------------------
// On-disk sidecar formats
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct MasksFile {
    width: usize,
    height: usize,
    parts: Vec<RleMask>,
    foreground: RleMask,
    part_silhouettes: Vec<RleMask>,
}

#[derive(Serialize, Deserialize)]
struct SegmapSidecar {
    perm: Vec<usize>,
    palette: Vec<[f64; 3]>,
    min_pixels: usize,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SeededQueryRecord {
    pub part: usize,
    pub pixel: [usize; 2],
    pub proposals: Vec<RleProposal>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SeededFile {
    pub version: u32,
    pub asset_id: String,
    pub queries: Vec<SeededQueryRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompletionRow {
    pub proposal: usize,
    pub matched_part: usize,
    pub iou_with_gt: f64,
    pub part_occlusion: f64,
    pub masked_psnr: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CompletionIndex {
    pub version: u32,
    pub asset_id: String,
    pub completer: CompleterId,
    pub rows: Vec<CompletionRow>,
}

/// Bundle pieces reloaded from the render stage outputs.
pub struct StoredBundle {
    pub rig: [Camera; 4],
    pub grid: ImageRgb,
    pub masks: Vec<Mask>,
    pub foreground: Mask,
    pub part_views: Vec<ImageRgb>,
    pub part_view_masks: Vec<Mask>,
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleMetrics {
    pub id: String,
    /// AP per tau, keyed "0.50" style.
    pub ap: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricsReport {
    pub taus: Vec<f64>,
    pub map: BTreeMap<String, f64>,
    pub recall: BTreeMap<String, BTreeMap<String, f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seeded_map: Option<BTreeMap<String, f64>>,
    pub per_sample: Vec<SampleMetrics>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompletionSummary {
    pub completer: CompleterId,
    pub parts_evaluated: usize,
    pub mean_masked_psnr: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Summary {
    pub version: u32,
    pub config: PipelineConfig,
    pub dataset_size: usize,
    pub total_parts: usize,
    pub segmentation: MetricsReport,
    pub completion: CompletionSummary,
    pub reassembly: ReassemblyReport,
}

fn tau_key(tau: f64) -> String {
    format!("{tau:.2}")
}

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

pub struct Pipeline {
    pub config: PipelineConfig,
    root: PathBuf,
}

impl Pipeline {
    pub fn new(config: PipelineConfig) -> Result<Pipeline> {
        config.validate()?;
        let root = PathBuf::from(&config.out_dir);
        Ok(Pipeline { config, root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn manifest_path(&self) -> PathBuf {
        self.root.join("manifest.json")
    }

    fn renders_dir(&self, id: &str) -> PathBuf {
        self.root.join("renders").join(id)
    }

    fn proposals_path(&self, id: &str) -> PathBuf {
        self.root.join("proposals").join(format!("{id}.json"))
    }

    fn seeded_path(&self, id: &str) -> PathBuf {
        self.root
            .join("proposals")
            .join(format!("{id}.seeded.json"))
    }

    fn completions_dir(&self, id: &str) -> PathBuf {
        self.root.join("completions").join(id)
    }

    fn fields_dir(&self, id: &str) -> PathBuf {
        self.root.join("fields").join(id)
    }

    fn reports_dir(&self) -> PathBuf {
        self.root.join("reports")
    }

    fn load_manifest(&self) -> Result<DatasetManifest> {
        let manifest = DatasetManifest::load(&self.manifest_path())?;
        manifest.validate(&self.root)?;
        Ok(manifest)
    }

    // -----------------------------------------------------------------
    // gen
    // -----------------------------------------------------------------

    /// Generate the dataset and write asset files plus the manifest.
    pub fn cmd_gen(&self) -> Result<DatasetManifest> {
        let d = &self.config.dataset;
        std::fs::create_dir_all(self.root.join("assets"))?;
        let spec = GeneratorSpec {
            template: d.template,
            min_parts: d.min_parts,
            max_parts: d.max_parts,
            volume_samples: d.volume_samples,
        };
        let mut manifest = DatasetManifest::new(d.seed, GENERATOR_VERSION);
        for i in 0..d.size {
            let seed = d.seed.wrapping_add(i as u64);
            let asset = generate_asset(seed, &spec)?;
            let fractions =
                part_volume_fractions(&asset, d.volume_samples, mix_seed(d.seed, i as u64, 0xF0))?;
            let rel = format!("assets/{}.json", asset.id);
            asset.save(&self.root.join(&rel))?;
            manifest.push(asset.id.clone(), rel, asset.parts.len(), &fractions);
        }
        manifest.save(&self.manifest_path())?;
        Ok(manifest)
    }

    // -----------------------------------------------------------------
    // render
    // -----------------------------------------------------------------

    /// Render every manifest asset and persist the view bundles.
    pub fn cmd_render(&self) -> Result<()> {
        let manifest = self.load_manifest()?;
        let march = self.config.march_config();
        let palette = make_palette(self.config.segmap.q, self.config.segmap.palette_seed)?;
        for (i, entry) in manifest.assets.iter().enumerate() {
            let asset = Asset::load(&self.root.join(&entry.path))?;
            let rig = self.rig_for(&asset);
            let bundle = render_views(&asset, &rig, &march)?;
            let dir = self.renders_dir(&entry.id);
            std::fs::create_dir_all(&dir)?;
            save_rgb_png(&dir.join("grid.png"), &bundle.grid_rgb)?;
            std::fs::write(
                dir.join("cameras.json"),
                serde_json::to_string_pretty(&bundle.rig.to_vec())?,
            )?;
            let masks_file = MasksFile {
                width: bundle.grid_width(),
                height: bundle.grid_height(),
                parts: bundle.masks.iter().map(RleMask::encode).collect(),
                foreground: RleMask::encode(&bundle.foreground),
                part_silhouettes: bundle.part_view_masks.iter().map(RleMask::encode).collect(),
            };
            std::fs::write(dir.join("masks.json"), serde_json::to_string(&masks_file)?)?;
            for (k, depth) in bundle.part_depth.iter().enumerate() {
                write_pfm(&dir.join(format!("depth_part{k}.pfm")), depth)?;
            }
            for (k, mask) in bundle.masks.iter().enumerate() {
                save_bilevel_png(&dir.join(format!("mask_part{k}.png")), mask)?;
            }
            save_bilevel_png(&dir.join("foreground.png"), &bundle.foreground)?;
            for (k, view) in bundle.part_views.iter().enumerate() {
                save_rgb_png(&dir.join(format!("part{k}_view.png")), view)?;
                save_bilevel_png(
                    &dir.join(format!("part{k}_mask.png")),
                    &bundle.part_view_masks[k],
                )?;
            }
            // Ground-truth colour-coded segmentation map, seeded naming.
            let perm = random_permutation(
                self.config.segmap.q,
                mix_seed(self.config.segmap.palette_seed, i as u64, 0xC0),
            );
            let seg = encode(&bundle.masks, &palette, &perm)?;
            save_rgb_png(&dir.join("segmap.png"), &seg.image)?;
            let sidecar = SegmapSidecar {
                perm: seg.perm.clone(),
                palette: palette.colors.clone(),
                min_pixels: self.config.segmap.min_pixels,
            };
            std::fs::write(
                dir.join("segmap.json"),
                serde_json::to_string_pretty(&sidecar)?,
            )?;
        }
        Ok(())
    }

    fn rig_for(&self, asset: &Asset) -> [Camera; 4] {
        let r = &self.config.render;
        make_rig(
            r.tile,
            r.tile,
            r.distance_factor * asset.bounds.radius(),
            r.fov_deg,
        )
    }

    /// Reload the render-stage outputs needed by later stages.
    pub fn load_bundle(&self, id: &str) -> Result<StoredBundle> {
        let dir = self.renders_dir(id);
        let cameras_text =
            std::fs::read_to_string(dir.join("cameras.json")).map_err(|_| Error::MissingInput {
                path: dir.join("cameras.json"),
            })?;
        let cams: Vec<Camera> = serde_json::from_str(&cameras_text)?;
        let rig: [Camera; 4] = cams
            .try_into()
            .map_err(|_| Error::BadFormat("cameras.json must hold 4 cameras".into()))?;
        let masks_text =
            std::fs::read_to_string(dir.join("masks.json")).map_err(|_| Error::MissingInput {
                path: dir.join("masks.json"),
            })?;
        let masks_file: MasksFile = serde_json::from_str(&masks_text)?;
        let grid = load_rgb_png(&dir.join("grid.png"))?;
        let masks: Vec<Mask> = masks_file
            .parts
            .iter()
            .map(|m| m.decode())
            .collect::<Result<_>>()?;
        let foreground = masks_file.foreground.decode()?;
        let part_view_masks: Vec<Mask> = masks_file
            .part_silhouettes
            .iter()
            .map(|m| m.decode())
            .collect::<Result<_>>()?;
        let mut part_views = Vec::with_capacity(masks.len());
        for k in 0..masks.len() {
            part_views.push(load_rgb_png(&dir.join(format!("part{k}_view.png")))?);
        }
        Ok(StoredBundle {
            rig,
            grid,
            masks,
            foreground,
            part_views,
            part_view_masks,
        })
    }

    // -----------------------------------------------------------------
    // segment
    // -----------------------------------------------------------------

    /// Sample proposals via the colour-coded map round trip and rank them.
    pub fn cmd_segment(&self, mode: SegmentMode) -> Result<()> {
        let manifest = self.load_manifest()?;
        std::fs::create_dir_all(self.root.join("proposals"))?;
        let palette = make_palette(self.config.segmap.q, self.config.segmap.palette_seed)?;
        for (i, entry) in manifest.assets.iter().enumerate() {
            let bundle = self.load_bundle(&entry.id)?;
            let ranked = self.segment_bundle(&bundle, i as u64, &palette)?;
            ProposalFile::from_ranked(&entry.id, &ranked).save(&self.proposals_path(&entry.id))?;
            if mode == SegmentMode::Seeded {
                let mut queries = Vec::new();
                for (k, mask) in bundle.masks.iter().enumerate() {
                    let Some(pixel) = mask.centroid_pixel() else {
                        continue;
                    };
                    let filtered = seeded_query(&ranked, pixel)?;
                    queries.push(SeededQueryRecord {
                        part: k,
                        pixel: [pixel.0, pixel.1],
                        proposals: filtered
                            .masks
                            .iter()
                            .zip(&filtered.scores)
                            .map(|(m, &score)| RleProposal {
                                mask: RleMask::encode(m),
                                score,
                            })
                            .collect(),
                    });
                }
                let file = SeededFile {
                    version: 1,
                    asset_id: entry.id.clone(),
                    queries,
                };
                std::fs::write(self.seeded_path(&entry.id), serde_json::to_string(&file)?)?;
            }
        }
        Ok(())
    }

    /// Noisy sampler -> per-run colour map encode/decode -> pooled ranking.
    ///
    /// Each run is snapped through the codec exactly as a sampled colour map
    /// would be at test time: run masks are made pixel-disjoint (lowest slot
    /// wins contested pixels, as a colour image can hold one colour per
    /// pixel), painted with a per-run random naming, then decoded with
    /// small-part culling.
    pub fn segment_bundle(
        &self,
        bundle: &StoredBundle,
        asset_index: u64,
        palette: &Palette,
    ) -> Result<RankedProposals> {
        let noise_seed = mix_seed(self.config.noise_seed, asset_index, 0x5E6);
        let raw = sample_noisy_oracle(&bundle.masks, &self.config.noise, noise_seed);
        let mut pool = ProposalSet::default();
        for run in 0..self.config.noise.runs {
            let mut run_masks: Vec<Mask> = Vec::new();
            for (idx, p) in raw.provenance.iter().enumerate() {
                if p.run == run {
                    run_masks.push(raw.masks[idx].clone());
                }
            }
            if run_masks.is_empty() {
                continue;
            }
            // Disjointify in slot order.
            let mut taken = Mask::new(run_masks[0].width(), run_masks[0].height());
            let mut disjoint = Vec::new();
            for mask in run_masks {
                let mut m = mask;
                m.subtract(&taken);
                if !m.is_empty() {
                    taken.union_with(&m);
                    disjoint.push(m);
                }
            }
            if disjoint.is_empty() {
                continue;
            }
            let perm = random_permutation(palette.len(), mix_seed(noise_seed, run as u64, 0x9E12));
            let encoded = encode(&disjoint, palette, &perm)?;
            let decoded = decode(&encoded.image, palette, self.config.segmap.min_pixels);
            for (slot, part) in decoded.into_iter().enumerate() {
                pool.push(part.mask, Provenance { run, slot });
            }
        }
        Ok(rank_and_dedup(&pool))
    }

    // -----------------------------------------------------------------
    // eval
    // -----------------------------------------------------------------

    /// Score stored proposals against ground truth; write metric reports.
    pub fn cmd_eval(&self) -> Result<MetricsReport> {
        let manifest = self.load_manifest()?;
        let taus = self.config.eval.taus.clone();
        let mut per_sample = Vec::new();
        let mut per_tau_aps: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        let mut per_tau_recalls: BTreeMap<String, BTreeMap<String, Vec<f64>>> = BTreeMap::new();
        let mut seeded_aps: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        let mut any_seeded = false;
        for entry in &manifest.assets {
            let bundle = self.load_bundle(&entry.id)?;
            let file = ProposalFile::load(&self.proposals_path(&entry.id))?;
            let mut ranked = file.to_ranked()?;
            if let Some(cap) = self.config.eval.max_proposals {
                ranked.masks.truncate(cap);
                ranked.scores.truncate(cap);
            }
            let mut sample = SampleMetrics {
                id: entry.id.clone(),
                ap: BTreeMap::new(),
            };
            for &tau in &taus {
                let m = greedy_match(&ranked.masks, &bundle.masks, tau);
                let ap = average_precision(&m, bundle.masks.len())?;
                sample.ap.insert(tau_key(tau), ap);
                per_tau_aps.entry(tau_key(tau)).or_default().push(ap);
                let recalls = per_tau_recalls.entry(tau_key(tau)).or_default();
                for &k in &self.config.eval.recall_ks {
                    recalls.entry(k.to_string()).or_default().push(recall_at_k(
                        &ranked.masks,
                        &bundle.masks,
                        tau,
                        k,
                    ));
                }
            }
            per_sample.push(sample);

            // Seeded evaluation when the segment stage produced query files.
            let seeded_path = self.seeded_path(&entry.id);
            if seeded_path.exists() {
                any_seeded = true;
                let text = std::fs::read_to_string(&seeded_path)?;
                let seeded: SeededFile = serde_json::from_str(&text)?;
                for q in &seeded.queries {
                    let masks: Vec<Mask> = q
                        .proposals
                        .iter()
                        .map(|p| p.mask.decode())
                        .collect::<Result<_>>()?;
                    let gt = vec![bundle.masks[q.part].clone()];
                    for &tau in &taus {
                        let m = greedy_match(&masks, &gt, tau);
                        let ap = average_precision(&m, 1)?;
                        seeded_aps.entry(tau_key(tau)).or_default().push(ap);
                    }
                }
            }
        }
        let map: BTreeMap<String, f64> = per_tau_aps
            .iter()
            .map(|(k, v)| (k.clone(), mean_ap(v).unwrap_or(0.0)))
            .collect();
        let recall: BTreeMap<String, BTreeMap<String, f64>> = per_tau_recalls
            .iter()
            .map(|(tau, per_k)| {
                (
                    tau.clone(),
                    per_k
                        .iter()
                        .map(|(k, v)| (k.clone(), v.iter().sum::<f64>() / v.len() as f64))
                        .collect(),
                )
            })
            .collect();
        let seeded_map = if any_seeded {
            Some(
                seeded_aps
                    .iter()
                    .map(|(k, v)| (k.clone(), mean_ap(v).unwrap_or(0.0)))
                    .collect(),
            )
        } else {
            None
        };
        let report = MetricsReport {
            taus,
            map,
            recall,
            seeded_map,
            per_sample,
        };
        std::fs::create_dir_all(self.reports_dir())?;
        std::fs::write(
            self.reports_dir().join("metrics.json"),
            serde_json::to_string_pretty(&report)?,
        )?;
        let mut csv = String::from("asset_id");
        for tau in &report.taus {
            write!(csv, ",ap_{}", tau_key(tau.to_owned())).unwrap();
        }
        csv.push('\n');
        for s in &report.per_sample {
            csv.push_str(&s.id);
            for tau in &report.taus {
                write!(csv, ",{}", s.ap[&tau_key(*tau)]).unwrap();
            }
            csv.push('\n');
        }
        std::fs::write(self.reports_dir().join("per_sample.csv"), csv)?;
        let mut curves = String::from("tau,k,recall\n");
        for (tau, per_k) in &report.recall {
            let mut ks: Vec<&String> = per_k.keys().collect();
            ks.sort_by_key(|k| k.parse::<usize>().unwrap_or(usize::MAX));
            for k in ks {
                writeln!(curves, "{tau},{k},{}", per_k[k]).unwrap();
            }
        }
        std::fs::write(self.reports_dir().join("recall_curves.csv"), curves)?;
        Ok(report)
    }

    // -----------------------------------------------------------------
    // complete
    // -----------------------------------------------------------------

    fn run_completer(
        &self,
        bundle: &StoredBundle,
        proposal: &Mask,
        matched_part: usize,
    ) -> Result<CompletionResult> {
        let req = CompletionRequest::from_context(&bundle.grid, proposal);
        match self.config.completer {
            CompleterId::Passthrough => Ok(complete_passthrough(&req)),
            CompleterId::Symmetry => Ok(complete_symmetry(&req)),
            CompleterId::Oracle => complete_oracle(
                &req,
                &bundle.part_views[matched_part],
                &bundle.part_view_masks[matched_part],
            ),
        }
    }

    fn best_gt_part(bundle: &StoredBundle, proposal: &Mask) -> usize {
        let mut best = 0usize;
        let mut best_iou = f64::NEG_INFINITY;
        for (s, gt) in bundle.masks.iter().enumerate() {
            let m = iou(proposal, gt);
            if m > best_iou {
                best_iou = m;
                best = s;
            }
        }
        best
    }

    /// Complete every stored proposal and write images, masks, conditioning
    /// blocks and a diagnostic index.
    pub fn cmd_complete(&self) -> Result<()> {
        let manifest = self.load_manifest()?;
        for entry in &manifest.assets {
            let bundle = self.load_bundle(&entry.id)?;
            let proposals = ProposalFile::load(&self.proposals_path(&entry.id))?.to_ranked()?;
            let dir = self.completions_dir(&entry.id);
            std::fs::create_dir_all(&dir)?;
            let mut rows = Vec::new();
            for (i, proposal) in proposals.masks.iter().enumerate() {
                let matched = Self::best_gt_part(&bundle, proposal);
                let completion = self.run_completer(&bundle, proposal, matched)?;
                save_rgb_png(&dir.join(format!("prop{i}.png")), &completion.part_image)?;
                save_bilevel_png(
                    &dir.join(format!("prop{i}_mask.png")),
                    &completion.part_foreground,
                )?;
                let req = CompletionRequest::from_context(&bundle.grid, proposal);
                let block = pack_conditioning(&req)?;
                cond_file::write_conditioning(&dir.join(format!("prop{i}_cond.bin")), &block)?;
                let gt_fg = &bundle.part_view_masks[matched];
                let masked_psnr = if gt_fg.is_empty() {
                    0.0
                } else {
                    foreground_psnr(&completion.part_image, &bundle.part_views[matched], gt_fg)?
                };
                let occlusion = if gt_fg.count() == 0 {
                    0.0
                } else {
                    1.0 - bundle.masks[matched].count() as f64 / gt_fg.count() as f64
                };
                rows.push(CompletionRow {
                    proposal: i,
                    matched_part: matched,
                    iou_with_gt: round_sig(iou(proposal, &bundle.masks[matched]), 9),
                    part_occlusion: round_sig(occlusion, 9),
                    masked_psnr: round_sig(masked_psnr, 9),
                });
            }
            let index = CompletionIndex {
                version: 1,
                asset_id: entry.id.clone(),
                completer: self.config.completer,
                rows,
            };
            std::fs::write(
                dir.join("index.json"),
                serde_json::to_string_pretty(&index)?,
            )?;
        }
        Ok(())
    }

    // -----------------------------------------------------------------
    // carve
    // -----------------------------------------------------------------

    /// Carve every completion into a part field; also carve the unstructured
    /// whole-object field from the full grid.
    pub fn cmd_carve(&self) -> Result<()> {
        let manifest = self.load_manifest()?;
        for entry in &manifest.assets {
            let asset = Asset::load(&self.root.join(&entry.path))?;
            let bundle = self.load_bundle(&entry.id)?;
            let index_path = self.completions_dir(&entry.id).join("index.json");
            let index: CompletionIndex =
                serde_json::from_str(&std::fs::read_to_string(&index_path).map_err(|_| {
                    Error::MissingInput {
                        path: index_path.clone(),
                    }
                })?)?;
            let dir = self.fields_dir(&entry.id);
            std::fs::create_dir_all(&dir)?;
            let bbox = asset.bounds.padded(0.05 * asset.bounds.radius().max(1e-6));
            for row in &index.rows {
                let i = row.proposal;
                let cdir = self.completions_dir(&entry.id);
                let image = load_rgb_png(&cdir.join(format!("prop{i}.png")))?;
                let mask = load_bilevel_png(&cdir.join(format!("prop{i}_mask.png")))?;
                let carved = carve(&image, &mask, &bundle.rig, bbox, &self.config.carve)?;
                field_file::write_field(&dir.join(format!("prop{i}.field")), &carved.field)?;
            }
            let unstructured = carve(
                &bundle.grid,
                &bundle.foreground,
                &bundle.rig,
                bbox,
                &self.config.carve,
            )?;
            field_file::write_field(&dir.join("unstructured.field"), &unstructured.field)?;
        }
        Ok(())
    }

    // -----------------------------------------------------------------
    // compose
    // -----------------------------------------------------------------

    /// Compose carved part fields, render novel views, and compare against
    /// ground truth and the unstructured reconstruction.
    pub fn cmd_compose(&self) -> Result<ReassemblyReport> {
        let manifest = self.load_manifest()?;
        let march = self.config.march_config();
        let mut per_asset = Vec::new();
        let composites = self.reports_dir().join("composite");
        std::fs::create_dir_all(&composites)?;
        for entry in &manifest.assets {
            let asset = Asset::load(&self.root.join(&entry.path))?;
            let dir = self.fields_dir(&entry.id);
            let mut fields = Vec::new();
            let mut labels = Vec::new();
            let mut i = 0usize;
            loop {
                let path = dir.join(format!("prop{i}.field"));
                if !path.exists() {
                    break;
                }
                let field = field_file::read_field(&path)?;
                if field.occupied_count() > 0 {
                    fields.push(field);
                    labels.push(format!("prop{i}"));
                }
                i += 1;
            }
            if fields.is_empty() {
                return Err(Error::InvalidInput(format!(
                    "asset {}: no part fields to compose",
                    entry.id
                )));
            }
            let parts_used = fields.len();
            let assembly = Assembly::new(fields, labels)?;
            let unstructured_field = field_file::read_field(&dir.join("unstructured.field"))?;
            let unstructured = Assembly::new(vec![unstructured_field], vec!["object".into()])?;

            let radius = asset.bounds.radius();
            let distance = self.config.render.distance_factor * radius;
            let cams = novel_cameras(
                self.config.compose.novel_views,
                self.config.compose.novel_seed,
                self.config.render.tile,
                distance,
                self.config.render.fov_deg,
                (
                    self.config.compose.elevation_min_deg,
                    self.config.compose.elevation_max_deg,
                ),
            );
            let delta =
                assembly.fields[0].voxel_size().min_component() * self.config.compose.delta_factor;
            let mut comp_sum = 0.0;
            let mut unstr_sum = 0.0;
            for (v, cam) in cams.iter().enumerate() {
                let (gt_rgb, gt_fg) = render_single_view(&asset, cam, &march)?;
                let comp = compose_render(&assembly, cam, delta);
                let unstr = compose_render(&unstructured, cam, delta);
                comp_sum += foreground_psnr(&comp.rgb, &gt_rgb, &gt_fg)?;
                unstr_sum += foreground_psnr(&unstr.rgb, &gt_rgb, &gt_fg)?;
                save_rgb_png(
                    &composites.join(format!("{}_view{v}.png", entry.id)),
                    &comp.rgb,
                )?;
                // Per-part visibility diagnostics.
                let vis_dir = self.reports_dir().join("visibility").join(&entry.id);
                std::fs::create_dir_all(&vis_dir)?;
                for (h, vis) in comp.part_visibility.iter().enumerate() {
                    let mut depth = DepthMap::new(comp.width, comp.height);
                    for r in 0..comp.height {
                        for c in 0..comp.width {
                            depth.set(r, c, vis[r * comp.width + c]);
                        }
                    }
                    write_pfm(&vis_dir.join(format!("part{h}_view{v}.pfm")), &depth)?;
                }
            }
            let n = cams.len() as f64;
            let psnr_compositional = round_sig(comp_sum / n, 9);
            let psnr_unstructured = round_sig(unstr_sum / n, 9);
            per_asset.push(AssetReassembly {
                id: entry.id.clone(),
                parts_used,
                psnr_compositional,
                psnr_unstructured,
                delta_db: round_sig(psnr_compositional - psnr_unstructured, 9),
            });
        }
        let report = ReassemblyReport::from_assets(per_asset);
        std::fs::create_dir_all(self.reports_dir())?;
        std::fs::write(
            self.reports_dir().join("reassembly.json"),
            serde_json::to_string_pretty(&report)?,
        )?;
        let mut csv =
            String::from("asset_id,parts_used,psnr_compositional,psnr_unstructured,delta_db\n");
        for a in &report.per_asset {
            writeln!(
                csv,
                "{},{},{},{},{}",
                a.id, a.parts_used, a.psnr_compositional, a.psnr_unstructured, a.delta_db
            )
            .unwrap();
        }
        std::fs::write(self.reports_dir().join("reassembly.csv"), csv)?;
        Ok(report)
    }

    // -----------------------------------------------------------------
    // all
    // -----------------------------------------------------------------

    /// Run every stage and emit the single JSON summary. Seeded mode adds
    /// the per-part query evaluation to the summary. Failures carry the id
    /// of the stage that aborted.
    pub fn cmd_all(&self, mode: SegmentMode) -> Result<Summary> {
        fn tag<T>(stage: &'static str, r: Result<T>) -> Result<T> {
            r.map_err(|e| Error::Stage {
                stage,
                source: Box::new(e),
            })
        }
        let manifest = tag("gen", self.cmd_gen())?;
        tag("render", self.cmd_render())?;
        tag("segment", self.cmd_segment(mode))?;
        let segmentation = tag("eval", self.cmd_eval())?;
        tag("complete", self.cmd_complete())?;
        tag("carve", self.cmd_carve())?;
        let reassembly = tag("compose", self.cmd_compose())?;

        // Aggregate completion diagnostics.
        let mut psnrs = Vec::new();
        for entry in &manifest.assets {
            let index_path = self.completions_dir(&entry.id).join("index.json");
            let index: CompletionIndex =
                serde_json::from_str(&std::fs::read_to_string(&index_path)?)?;
            for row in &index.rows {
                psnrs.push(row.masked_psnr);
            }
        }
        let completion = CompletionSummary {
            completer: self.config.completer,
            parts_evaluated: psnrs.len(),
            mean_masked_psnr: round_sig(psnrs.iter().sum::<f64>() / psnrs.len().max(1) as f64, 9),
        };
        let summary = Summary {
            version: 1,
            config: self.config.clone(),
            dataset_size: manifest.assets.len(),
            total_parts: manifest.assets.iter().map(|a| a.part_count).sum(),
            segmentation,
            completion,
            reassembly,
        };
        std::fs::write(
            self.root.join("summary.json"),
            serde_json::to_string_pretty(&summary)?,
        )?;
        Ok(summary)
    }
}
