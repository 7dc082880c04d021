//! Run-length-encoded binary masks for JSON sidecars and proposal files.
//!
//! Runs alternate starting from background (value 0), row-major order.

use crate::error::{Error, Result};
use crate::raster::Mask;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RleMask {
    pub width: usize,
    pub height: usize,
    pub runs: Vec<u32>,
}

impl RleMask {
    pub fn encode(mask: &Mask) -> RleMask {
        let mut runs = Vec::new();
        let mut current = false;
        let mut len = 0u32;
        for r in 0..mask.height() {
            for c in 0..mask.width() {
                let v = mask.get(r, c);
                if v == current {
                    len += 1;
                } else {
                    runs.push(len);
                    current = v;
                    len = 1;
                }
            }
        }
        runs.push(len);
        RleMask {
            width: mask.width(),
            height: mask.height(),
            runs,
        }
    }

    pub fn decode(&self) -> Result<Mask> {
        let total: u64 = self.runs.iter().map(|&r| r as u64).sum();
        if total != (self.width * self.height) as u64 {
            return Err(Error::BadFormat(format!(
                "rle runs cover {total} pixels, expected {}",
                self.width * self.height
            )));
        }
        let mut mask = Mask::new(self.width, self.height);
        let mut idx = 0usize;
        let mut value = false;
        for &run in &self.runs {
            if value {
                for _ in 0..run {
                    mask.set(idx / self.width, idx % self.width, true);
                    idx += 1;
                }
            } else {
                idx += run as usize;
            }
            value = !value;
        }
        Ok(mask)
    }
}

/// One ranked proposal with its reliability score, as stored on disk.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RleProposal {
    pub mask: RleMask,
    pub score: u32,
}

/// Proposal file: ranked multi-view masks plus scores. External segmenters
/// can be evaluated by writing this format.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProposalFile {
    pub version: u32,
    pub asset_id: String,
    pub proposals: Vec<RleProposal>,
}

pub const PROPOSAL_FILE_VERSION: u32 = 1;

impl ProposalFile {
    pub fn from_ranked(asset_id: &str, ranked: &crate::proposer::RankedProposals) -> ProposalFile {
        ProposalFile {
            version: PROPOSAL_FILE_VERSION,
            asset_id: asset_id.to_string(),
            proposals: ranked
                .masks
                .iter()
                .zip(&ranked.scores)
                .map(|(m, &score)| RleProposal {
                    mask: RleMask::encode(m),
                    score,
                })
                .collect(),
        }
    }

    pub fn to_ranked(&self) -> Result<crate::proposer::RankedProposals> {
        let mut out = crate::proposer::RankedProposals::default();
        for p in &self.proposals {
            out.masks.push(p.mask.decode()?);
            out.scores.push(p.score);
        }
        Ok(out)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string(self)?)?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<ProposalFile> {
        let text = std::fs::read_to_string(path).map_err(|_| Error::MissingInput {
            path: path.to_path_buf(),
        })?;
        let f: ProposalFile = serde_json::from_str(&text)?;
        if f.version != PROPOSAL_FILE_VERSION {
            return Err(Error::BadFormat(format!(
                "unsupported proposal file version {}",
                f.version
            )));
        }
        Ok(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;

    #[test]
    fn random_masks_roundtrip() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let w = rng.gen_range(1..80);
            let h = rng.gen_range(1..40);
            let p = rng.gen_range(0.0..1.0);
            let mask = Mask::from_fn(w, h, |_, _| rng.gen_bool(p));
            let rle = RleMask::encode(&mask);
            assert_eq!(rle.decode().unwrap(), mask);
        }
    }

    #[test]
    fn empty_and_full() {
        let empty = Mask::new(7, 3);
        assert_eq!(RleMask::encode(&empty).runs, vec![21]);
        let full = Mask::from_fn(7, 3, |_, _| true);
        assert_eq!(RleMask::encode(&full).runs, vec![0, 21]);
    }

    #[test]
    fn bad_run_total_rejected() {
        let rle = RleMask {
            width: 4,
            height: 4,
            runs: vec![3, 2],
        };
        assert!(rle.decode().is_err());
    }
}
