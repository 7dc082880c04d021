//! Dataset filtering: cull sub-5% parts, reject monolithic or oversized
//! decompositions.

use crate::forge::asset::Asset;

pub const MIN_PART_FRACTION: f64 = 0.05;
pub const MAX_PARTS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RejectReason {
    /// More than `MAX_PARTS` parts survive culling.
    TooManyParts,
    /// Exactly one part survives culling.
    Monolithic,
    /// Nothing survives culling.
    NoParts,
}

impl std::fmt::Display for RejectReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RejectReason::TooManyParts => write!(f, "too-many-parts"),
            RejectReason::Monolithic => write!(f, "monolithic"),
            RejectReason::NoParts => write!(f, "no-parts"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FilterDecision {
    Accept {
        culled: Vec<usize>,
    },
    Reject {
        reason: RejectReason,
        culled: Vec<usize>,
    },
}

impl FilterDecision {
    pub fn is_accept(&self) -> bool {
        matches!(self, FilterDecision::Accept { .. })
    }

    pub fn culled(&self) -> &[usize] {
        match self {
            FilterDecision::Accept { culled } | FilterDecision::Reject { culled, .. } => culled,
        }
    }
}

/// Apply the dataset rules: parts below 5% of the union volume are culled
/// first, then the asset is rejected if more than 10 or exactly one part
/// remains.
pub fn filter_asset(asset: &Asset, fractions: &[f64]) -> FilterDecision {
    assert_eq!(
        fractions.len(),
        asset.parts.len(),
        "fractions must align with parts"
    );
    let culled: Vec<usize> = fractions
        .iter()
        .enumerate()
        .filter(|(_, &f)| f < MIN_PART_FRACTION)
        .map(|(i, _)| i)
        .collect();
    let remaining = asset.parts.len() - culled.len();
    if remaining > MAX_PARTS {
        FilterDecision::Reject {
            reason: RejectReason::TooManyParts,
            culled,
        }
    } else if remaining == 1 {
        FilterDecision::Reject {
            reason: RejectReason::Monolithic,
            culled,
        }
    } else if remaining == 0 {
        FilterDecision::Reject {
            reason: RejectReason::NoParts,
            culled,
        }
    } else {
        FilterDecision::Accept { culled }
    }
}
