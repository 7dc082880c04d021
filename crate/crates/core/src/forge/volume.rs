//! Monte-Carlo part volume estimation with nearest-part attribution.

use crate::error::{Error, Result};
use crate::forge::asset::Asset;
use crate::math::{vec3, Vec3};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const MIN_VOLUME_SAMPLES: usize = 10_000;

/// Attribute a point to a part: among the parts containing it, the one whose
/// surface is nearest (lowest index on ties). `None` outside the union.
pub fn attribute_point(asset: &Asset, p: Vec3) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (k, part) in asset.parts.iter().enumerate() {
        let (d, _) = part.sdf(p);
        if d <= 0.0 {
            let abs = -d;
            if best.is_none_or(|(_, b)| abs < b) {
                best = Some((k, abs));
            }
        }
    }
    best.map(|(k, _)| k)
}

/// Fraction of the union volume occupied by each part.
///
/// Interior points covered by several parts are attributed to the part whose
/// surface is nearest (lowest index on ties), so the fractions always sum to
/// one. Deterministic for a given seed.
pub fn part_volume_fractions(asset: &Asset, samples: usize, seed: u64) -> Result<Vec<f64>> {
    if samples < MIN_VOLUME_SAMPLES {
        return Err(Error::InvalidInput(format!(
            "volume estimation needs at least {MIN_VOLUME_SAMPLES} samples, got {samples}"
        )));
    }
    let bounds = asset.bounds;
    if bounds.is_empty() || bounds.volume() <= 0.0 {
        return Err(Error::EmptyAsset);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0usize; asset.parts.len()];
    let ext = bounds.extent();
    for _ in 0..samples {
        let p = vec3(
            bounds.min.x + rng.gen::<f64>() * ext.x,
            bounds.min.y + rng.gen::<f64>() * ext.y,
            bounds.min.z + rng.gen::<f64>() * ext.z,
        );
        if let Some(k) = attribute_point(asset, p) {
            counts[k] += 1;
        }
    }
    let total: usize = counts.iter().sum();
    if total == 0 {
        return Err(Error::EmptyAsset);
    }
    Ok(counts.iter().map(|&c| c as f64 / total as f64).collect())
}
