//! Segmentation evaluation: smoothed IoU, rank-order greedy matching,
//! average precision and recall at K.

use crate::error::{Error, Result};
use crate::raster::Mask;

pub const IOU_EPSILON: f64 = 1e-4;

/// Epsilon-smoothed intersection over union; two empty masks score 1.
pub fn iou(a: &Mask, b: &Mask) -> f64 {
    let inter = a.intersection_count(b) as f64;
    let union = a.union_count(b) as f64;
    (inter + IOU_EPSILON) / (union + IOU_EPSILON)
}

/// Outcome of matching a ranked proposal list against ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    /// One label per proposal, rank order.
    pub labels: Vec<bool>,
    /// Matched ground-truth index per proposal, when labelled positive.
    pub matched_gt: Vec<Option<usize>>,
    pub tau: f64,
}

/// Scan proposals in rank order; each takes the best-IoU ground-truth part
/// still unmatched, and counts as positive only when that IoU reaches `tau`
/// (the argmax is taken first, then thresholded).
pub fn greedy_match(ranked: &[Mask], gt: &[Mask], tau: f64) -> MatchResult {
    assert!(tau > 0.0 && tau <= 1.0, "tau must lie in (0, 1]");
    let mut remaining: Vec<usize> = (0..gt.len()).collect();
    let mut labels = Vec::with_capacity(ranked.len());
    let mut matched_gt = Vec::with_capacity(ranked.len());
    for proposal in ranked {
        if remaining.is_empty() {
            labels.push(false);
            matched_gt.push(None);
            continue;
        }
        let mut best_iou = f64::NEG_INFINITY;
        let mut best_slot = 0usize;
        for (slot, &s) in remaining.iter().enumerate() {
            let m = iou(proposal, &gt[s]);
            if m > best_iou {
                best_iou = m;
                best_slot = slot;
            }
        }
        if best_iou >= tau {
            matched_gt.push(Some(remaining[best_slot]));
            remaining.remove(best_slot);
            labels.push(true);
        } else {
            labels.push(false);
            matched_gt.push(None);
        }
    }
    MatchResult {
        labels,
        matched_gt,
        tau,
    }
}

/// Average precision from match labels:
/// `AP = (1/S) * sum_k [y_k] * (sum_{i<=k} y_i) / k`.
///
/// Prefix counts stay integral until the single division per term, so an
/// independent evaluator of the same formula agrees bit-for-bit.
pub fn average_precision(result: &MatchResult, gt_count: usize) -> Result<f64> {
    if gt_count == 0 {
        return Err(Error::NoGroundTruth);
    }
    let mut cum = 0u64;
    let mut total = 0.0f64;
    for (k, &y) in result.labels.iter().enumerate() {
        if y {
            cum += 1;
            total += cum as f64 / (k + 1) as f64;
        }
    }
    Ok(total / gt_count as f64)
}

/// Mean of per-sample APs.
pub fn mean_ap(per_sample: &[f64]) -> Result<f64> {
    if per_sample.is_empty() {
        return Err(Error::NoGroundTruth);
    }
    Ok(per_sample.iter().sum::<f64>() / per_sample.len() as f64)
}

/// Fraction of ground-truth parts whose best IoU within the top-K proposals
/// strictly exceeds `tau`.
pub fn recall_at_k(ranked: &[Mask], gt: &[Mask], tau: f64, k: usize) -> f64 {
    if gt.is_empty() {
        return 0.0;
    }
    let top = &ranked[..k.min(ranked.len())];
    let mut recovered = 0usize;
    for g in gt {
        let best = top
            .iter()
            .map(|p| iou(g, p))
            .fold(f64::NEG_INFINITY, f64::max);
        if best > tau {
            recovered += 1;
        }
    }
    recovered as f64 / gt.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect(w: usize, h: usize, r0: usize, c0: usize, r1: usize, c1: usize) -> Mask {
        Mask::from_fn(w, h, |r, c| r >= r0 && r < r1 && c >= c0 && c < c1)
    }

    #[test]
    fn iou_examples() {
        let a = rect(16, 16, 0, 0, 2, 5); // 10 px
        assert_eq!(iou(&a, &a), 1.0);
        let empty = Mask::new(16, 16);
        assert_eq!(iou(&empty, &empty), 1.0);
        // Disjoint with union 100.
        let b = rect(16, 16, 0, 0, 10, 5);
        let c = rect(16, 16, 10, 5, 15, 15);
        assert_eq!(b.count() + c.count(), 100);
        let m = iou(&b, &c);
        assert!((m - 1e-4 / 100.0001).abs() < 1e-12, "{m}");
        // |A ∩ B| = 1, |A ∪ B| = 3.
        let d = rect(16, 16, 0, 0, 1, 2);
        let e = rect(16, 16, 0, 1, 1, 3);
        let m = iou(&d, &e);
        assert!((m - 1.0001 / 3.0001).abs() < 1e-12, "{m}");
    }

    #[test]
    fn greedy_match_examples() {
        let gt = vec![rect(16, 16, 0, 0, 8, 8)];
        // Exact proposal matches.
        let r = greedy_match(&[gt[0].clone()], &gt, 0.5);
        assert_eq!(r.labels, vec![true]);
        // Junk then exact.
        let junk = rect(16, 16, 12, 12, 16, 16);
        let r = greedy_match(&[junk, gt[0].clone()], &gt, 0.5);
        assert_eq!(r.labels, vec![false, true]);
        // Two proposals chasing the same ground truth: second loses.
        let near = rect(16, 16, 0, 0, 8, 7);
        let r = greedy_match(&[gt[0].clone(), near], &gt, 0.5);
        assert_eq!(r.labels, vec![true, false]);
        assert_eq!(r.matched_gt, vec![Some(0), None]);
    }

    #[test]
    fn ap_hand_cases() {
        let mk = |labels: Vec<bool>| MatchResult {
            matched_gt: labels.iter().map(|_| None).collect(),
            labels,
            tau: 0.5,
        };
        assert_eq!(average_precision(&mk(vec![true]), 1).unwrap(), 1.0);
        assert_eq!(average_precision(&mk(vec![false, true]), 1).unwrap(), 0.5);
        assert_eq!(average_precision(&mk(vec![true, true]), 2).unwrap(), 1.0);
        assert!(average_precision(&mk(vec![true]), 0).is_err());
    }

    #[test]
    fn ap_at_most_one_and_prefix_monotone() {
        let labels = vec![true, false, true, true, false, true];
        let mk = |labels: Vec<bool>| MatchResult {
            matched_gt: labels.iter().map(|_| None).collect(),
            labels,
            tau: 0.5,
        };
        let full = average_precision(&mk(labels.clone()), 6).unwrap();
        assert!(full <= 1.0);
        let mut prev = 0.0;
        for k in 0..=labels.len() {
            let ap = average_precision(&mk(labels[..k].to_vec()), 6).unwrap();
            assert!(
                ap + 1e-15 >= prev,
                "AP must be nondecreasing in list length"
            );
            prev = ap;
        }
    }

    #[test]
    fn mean_ap_examples() {
        assert_eq!(mean_ap(&[1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(mean_ap(&[1.0, 0.0]).unwrap(), 0.5);
        assert!(mean_ap(&[]).is_err());
    }

    #[test]
    fn recall_examples() {
        let gt = vec![rect(16, 16, 0, 0, 8, 8), rect(16, 16, 8, 8, 16, 16)];
        let ranked = vec![rect(16, 16, 0, 0, 8, 7)]; // IoU 0.875 with gt[0]
        assert_eq!(recall_at_k(&ranked, &gt, 0.5, 0), 0.0);
        assert_eq!(recall_at_k(&ranked, &gt, 0.5, 1), 0.5);
        let perfect = gt.clone();
        assert_eq!(recall_at_k(&perfect, &gt, 0.5, 2), 1.0);
        assert_eq!(recall_at_k(&perfect, &gt, 0.5, 10), 1.0);
    }
}
