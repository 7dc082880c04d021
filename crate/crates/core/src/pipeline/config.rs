//! Pipeline configuration: one versioned JSON document drives every stage.

use crate::completer::CompleterId;
use crate::error::{Error, Result};
use crate::forge::generate::Template;
use crate::proposer::NoiseSpec;
use crate::recon::carve::{CarveConfig, ConsistencyRule};
use crate::render::march::Shading;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub size: usize,
    pub seed: u64,
    pub template: Template,
    pub min_parts: usize,
    pub max_parts: usize,
    pub volume_samples: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RenderConfig {
    /// Pixels per tile edge; the grid is twice this in each dimension.
    pub tile: usize,
    pub fov_deg: f64,
    /// Camera distance as a multiple of the asset bounding radius.
    pub distance_factor: f64,
    pub max_steps: usize,
    pub hit_epsilon: f64,
    pub far_limit: f64,
    pub shading: Shading,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmapConfig {
    pub q: usize,
    pub palette_seed: u64,
    pub min_pixels: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComposeConfig {
    /// Ray-march step as a multiple of the carve voxel size.
    pub delta_factor: f64,
    pub novel_views: usize,
    pub novel_seed: u64,
    pub elevation_min_deg: f64,
    pub elevation_max_deg: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalConfig {
    pub taus: Vec<f64>,
    pub recall_ks: Vec<usize>,
    /// Optional cap on the number of ranked proposals scored per sample.
    pub max_proposals: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub version: u32,
    pub dataset: DatasetConfig,
    pub render: RenderConfig,
    pub segmap: SegmapConfig,
    pub noise: NoiseSpec,
    pub noise_seed: u64,
    pub completer: CompleterId,
    pub carve: CarveConfig,
    pub compose: ComposeConfig,
    pub eval: EvalConfig,
    pub out_dir: String,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            version: CONFIG_VERSION,
            dataset: DatasetConfig {
                size: 20,
                seed: 42,
                template: Template::Mixed,
                min_parts: 2,
                max_parts: 8,
                volume_samples: 100_000,
            },
            render: RenderConfig {
                tile: 128,
                fov_deg: 40.0,
                distance_factor: 2.7,
                max_steps: 192,
                hit_epsilon: 1e-4,
                far_limit: 50.0,
                shading: Shading::LambertFixedLight,
            },
            segmap: SegmapConfig {
                q: 16,
                palette_seed: 7,
                min_pixels: 10,
            },
            noise: NoiseSpec {
                merge_prob: 0.3,
                drop_prob: 0.3,
                morph_radius: 2,
                runs: 10,
            },
            noise_seed: 11,
            completer: CompleterId::Oracle,
            carve: CarveConfig {
                resolution: 128,
                kappa: 50.0,
                rule: ConsistencyRule::AllViews,
            },
            compose: ComposeConfig {
                delta_factor: 1.0,
                novel_views: 4,
                novel_seed: 17,
                elevation_min_deg: 0.0,
                elevation_max_deg: 40.0,
            },
            eval: EvalConfig {
                taus: vec![0.5, 0.75],
                recall_ks: vec![1, 2, 5, 10],
                max_proposals: None,
            },
            out_dir: "out".into(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::InvalidConfig(m));
        if self.version != CONFIG_VERSION {
            return fail(format!("unsupported config version {}", self.version));
        }
        if self.dataset.size == 0 {
            return fail("dataset.size must be positive".into());
        }
        if self.dataset.min_parts < 2
            || self.dataset.max_parts > 10
            || self.dataset.min_parts > self.dataset.max_parts
        {
            return fail("dataset part bounds must lie in [2, 10]".into());
        }
        if self.dataset.volume_samples < crate::forge::volume::MIN_VOLUME_SAMPLES {
            return fail("dataset.volume_samples below the estimator minimum".into());
        }
        if self.render.tile < 16 || !self.render.tile.is_multiple_of(4) {
            return fail("render.tile must be >= 16 and divisible by 4".into());
        }
        if !(10.0..=120.0).contains(&self.render.fov_deg)
            || self.render.fov_deg <= 10.0
            || self.render.fov_deg >= 120.0
        {
            return fail("render.fov_deg must lie in (10, 120)".into());
        }
        if self.render.distance_factor <= 1.0 {
            return fail("render.distance_factor must exceed 1".into());
        }
        if self.render.hit_epsilon <= 0.0 {
            return fail("render.hit_epsilon must be > 0".into());
        }
        if !(2..=64).contains(&self.segmap.q) {
            return fail("segmap.q must lie in [2, 64]".into());
        }
        if self.segmap.q < crate::forge::filter::MAX_PARTS {
            return fail("segmap.q must cover the maximum part count".into());
        }
        self.noise.validate()?;
        if self.noise.runs == 0 {
            return fail("noise.runs must be positive".into());
        }
        self.carve.validate()?;
        if self.compose.delta_factor <= 0.0 {
            return fail("compose.delta_factor must be > 0".into());
        }
        if self.compose.novel_views == 0 {
            return fail("compose.novel_views must be positive".into());
        }
        if self.compose.elevation_min_deg >= self.compose.elevation_max_deg {
            return fail("compose elevation range is empty".into());
        }
        if self.eval.taus.is_empty()
            || self
                .eval
                .taus
                .iter()
                .any(|&t| !(0.0..=1.0).contains(&t) || t == 0.0)
        {
            return fail("eval.taus must be nonempty values in (0, 1]".into());
        }
        if self.eval.recall_ks.is_empty() {
            return fail("eval.recall_ks must be nonempty".into());
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<PipelineConfig> {
        let text = std::fs::read_to_string(path).map_err(|_| Error::MissingInput {
            path: path.to_path_buf(),
        })?;
        let cfg: PipelineConfig =
            serde_json::from_str(&text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn march_config(&self) -> crate::render::march::MarchConfig {
        crate::render::march::MarchConfig {
            max_steps: self.render.max_steps,
            hit_epsilon: self.render.hit_epsilon,
            far_limit: self.render.far_limit,
            shading: self.render.shading,
        }
    }
}
