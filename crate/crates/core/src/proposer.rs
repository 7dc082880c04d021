//! Stochastic segmentation proposals and the ranking logic applied to them.
//!
//! The sampler perturbs ground-truth masks (merge neighbours, drop parts,
//! morph boundaries) to stand in for repeated draws from a stochastic
//! multi-view segmenter. Ranking scores each proposal by how many others
//! overlap it at IoU > 1/2 (itself included) and suppresses duplicates down
//! the sorted list.

use crate::metrics::iou;
use crate::raster::Mask;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Perturbation levels for the noisy-oracle sampler.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Probability of merging each adjacent part pair, per run.
    pub merge_prob: f64,
    /// Probability of dropping each (merged) part, per run.
    pub drop_prob: f64,
    /// Maximum boundary dilation/erosion radius in pixels.
    pub morph_radius: u32,
    /// Number of sampler runs to pool.
    pub runs: usize,
}

impl NoiseSpec {
    pub fn zero(runs: usize) -> NoiseSpec {
        NoiseSpec {
            merge_prob: 0.0,
            drop_prob: 0.0,
            morph_radius: 0,
            runs,
        }
    }

    pub fn validate(&self) -> crate::error::Result<()> {
        for (name, p) in [
            ("merge_prob", self.merge_prob),
            ("drop_prob", self.drop_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(crate::error::Error::InvalidInput(format!(
                    "{name} = {p} outside [0, 1]"
                )));
            }
        }
        Ok(())
    }
}

/// Where a proposal came from: sampler run and slot within the run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub run: usize,
    pub slot: usize,
}

/// Pool of raw multi-view mask proposals.
#[derive(Debug, Clone, Default)]
pub struct ProposalSet {
    pub masks: Vec<Mask>,
    pub provenance: Vec<Provenance>,
}

impl ProposalSet {
    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    pub fn push(&mut self, mask: Mask, provenance: Provenance) {
        self.masks.push(mask);
        self.provenance.push(provenance);
    }
}

/// Ranked, de-duplicated proposals: scores nonincreasing and pairwise
/// IoU < 1/2 between any two entries.
#[derive(Debug, Clone, Default)]
pub struct RankedProposals {
    pub masks: Vec<Mask>,
    pub scores: Vec<u32>,
}

impl RankedProposals {
    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }
}

fn run_rng(seed: u64, run: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(
        seed ^ (run as u64)
            .wrapping_add(1)
            .wrapping_mul(0x9E37_79B9_7F4A_7C15),
    )
}

/// Union-find for the merge step.
fn find(parent: &mut Vec<usize>, x: usize) -> usize {
    if parent[x] != x {
        let root = find(parent, parent[x]);
        parent[x] = root;
    }
    parent[x]
}

/// One sampler run: merge adjacent pairs, drop parts, morph boundaries.
fn sample_run(gt_masks: &[Mask], noise: &NoiseSpec, rng: &mut ChaCha8Rng) -> Vec<Mask> {
    let n = gt_masks.len();
    if n == 0 {
        return Vec::new();
    }

    // Merge pass over adjacent pairs in fixed (i, j) order. Adjacency means
    // the one-pixel dilation of one mask touches the other.
    let mut parent: Vec<usize> = (0..n).collect();
    if noise.merge_prob > 0.0 {
        let dilated: Vec<Mask> = gt_masks.iter().map(|m| m.dilated()).collect();
        for (i, di) in dilated.iter().enumerate() {
            for (j, gj) in gt_masks.iter().enumerate().skip(i + 1) {
                let adjacent = di.intersection_count(gj) > 0;
                if adjacent && rng.gen_bool(noise.merge_prob) {
                    let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                    if ri != rj {
                        parent[rj.max(ri)] = rj.min(ri);
                    }
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut group_of = vec![usize::MAX; n];
    for k in 0..n {
        let root = find(&mut parent, k);
        if group_of[root] == usize::MAX {
            group_of[root] = groups.len();
            groups.push(Vec::new());
        }
        groups[group_of[root]].push(k);
    }

    let mut out = Vec::new();
    for members in groups {
        // Drop pass.
        if noise.drop_prob > 0.0 && rng.gen_bool(noise.drop_prob) {
            continue;
        }
        let mut mask = gt_masks[members[0]].clone();
        for &m in &members[1..] {
            mask.union_with(&gt_masks[m]);
        }
        // Boundary morph pass.
        if noise.morph_radius > 0 {
            let radius = rng.gen_range(0..=noise.morph_radius);
            let grow = rng.gen_bool(0.5);
            for _ in 0..radius {
                mask = if grow { mask.dilated() } else { mask.eroded() };
            }
        }
        if !mask.is_empty() {
            out.push(mask);
        }
    }
    out
}

/// Pool `noise.runs` perturbed copies of the ground-truth masks.
///
/// At zero noise each run reproduces the ground truth verbatim. Deterministic
/// for a given seed; each run draws from its own derived stream.
pub fn sample_noisy_oracle(gt_masks: &[Mask], noise: &NoiseSpec, seed: u64) -> ProposalSet {
    let mut set = ProposalSet::default();
    for run in 0..noise.runs {
        let mut rng = run_rng(seed, run);
        for (slot, mask) in sample_run(gt_masks, noise, &mut rng)
            .into_iter()
            .enumerate()
        {
            set.push(mask, Provenance { run, slot });
        }
    }
    set
}

/// Reliability score: how many proposals in the pool (itself included)
/// overlap this one at IoU > 1/2.
pub fn reliability_score(mask: &Mask, pool: &ProposalSet) -> u32 {
    pool.masks
        .iter()
        .filter(|other| iou(other, mask) > 0.5)
        .count() as u32
}

/// Score, sort (stable on provenance order) and greedily remove duplicates:
/// a proposal is kept only if its IoU with every kept predecessor is < 1/2.
pub fn rank_and_dedup(pool: &ProposalSet) -> RankedProposals {
    let scores: Vec<u32> = pool
        .masks
        .iter()
        .map(|m| reliability_score(m, pool))
        .collect();
    let mut order: Vec<usize> = (0..pool.len()).collect();
    order.sort_by(|&a, &b| scores[b].cmp(&scores[a]));
    let mut kept = RankedProposals::default();
    for idx in order {
        let candidate = &pool.masks[idx];
        if kept.masks.iter().all(|k| iou(k, candidate) < 0.5) {
            kept.masks.push(candidate.clone());
            kept.scores.push(scores[idx]);
        }
    }
    kept
}

/// Keep only the ranked proposals containing the seed pixel, order preserved.
pub fn seeded_query(
    ranked: &RankedProposals,
    pixel: (usize, usize),
) -> crate::error::Result<RankedProposals> {
    if let Some(first) = ranked.masks.first() {
        if pixel.0 >= first.height() || pixel.1 >= first.width() {
            return Err(crate::error::Error::InvalidInput(format!(
                "seed pixel {pixel:?} outside grid bounds"
            )));
        }
    }
    let mut out = RankedProposals::default();
    for (mask, &score) in ranked.masks.iter().zip(&ranked.scores) {
        if mask.get(pixel.0, pixel.1) {
            out.masks.push(mask.clone());
            out.scores.push(score);
        }
    }
    Ok(out)
}
