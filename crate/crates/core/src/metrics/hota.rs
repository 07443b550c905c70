//! Higher Order Tracking Accuracy.
//!
//! A global alignment score between every ground-truth id `g` and predicted
//! id `p` is computed first from soft co-occurrence:
//! `A(g,p) = P / (n_g + n_p - P)` where `P` sums, over frames, the pair's IoU
//! divided by `rowsum + colsum - IoU` of that frame's similarity matrix.
//!
//! Per threshold α and frame, pairs with IoU ≥ α are matched one-to-one,
//! maximizing first the number of matches and then `Σ A(g,p)·IoU(g,p)`
//! (ties resolved by the assignment solver's lexicographic rule). Then
//! `DetA = TP / (TP + FN + FP)`, `AssA` is the mean over TPs of
//! `TPA / (TPA + FNA + FPA)`, and `HOTA_α = sqrt(DetA · AssA)`. Reported
//! values are means over the α set.

use crate::assignment::{solve_assignment, CostMatrix};
use crate::par::Execution;

use super::{EvalFrame, EvalSequence};

/// α ∈ {0.05, 0.10, …, 0.50}.
pub fn default_alphas() -> Vec<f64> {
    (1..=10).map(|i| i as f64 / 20.0).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct HotaAlpha {
    pub alpha: f64,
    pub hota: f64,
    pub det_a: f64,
    pub ass_a: f64,
    pub tp: usize,
    pub fn_: usize,
    pub fp: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HotaResult {
    pub hota: f64,
    pub det_a: f64,
    pub ass_a: f64,
    pub per_alpha: Vec<HotaAlpha>,
    /// Set when the ground truth is empty and all scores default to 0.
    pub warning: Option<String>,
}

/// Matched `(gt position, pred position)` pairs of one frame.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FrameMatch {
    pub pairs: Vec<(usize, usize)>,
}

impl FrameMatch {
    pub fn tp(&self) -> usize {
        self.pairs.len()
    }
}

/// Matches one frame at threshold `alpha`, weighting pairs by `score(g, p)`.
pub fn match_frame(
    frame: &EvalFrame,
    alpha: f64,
    score: impl Fn(usize, usize) -> f64,
) -> FrameMatch {
    let (ng, np) = (frame.gt.len(), frame.pred.len());
    if ng == 0 || np == 0 {
        return FrameMatch::default();
    }
    // every allowed pair outweighs any sum of scores of fewer pairs
    let count_weight = (ng.min(np) + 1) as f64;
    let mut cost = CostMatrix::zeros(ng, np);
    for g in 0..ng {
        for p in 0..np {
            if frame.sim(g, p) >= alpha {
                cost.set(g, p, -(count_weight + score(g, p)));
            }
        }
    }
    let sol = solve_assignment(&cost).expect("finite costs");
    FrameMatch { pairs: sol.pairs.into_iter().filter(|&(g, p)| frame.sim(g, p) >= alpha).collect() }
}

pub fn hota(seq: &EvalSequence, alphas: &[f64], exec: Execution) -> HotaResult {
    let ng = seq.gt_ids().len();
    let np = seq.pred_ids().len();
    let num_gt = seq.num_gt_dets();
    let num_pred = seq.num_pred_dets();
    if num_gt == 0 || num_pred == 0 {
        let per_alpha = alphas
            .iter()
            .map(|&alpha| HotaAlpha { alpha, hota: 0.0, det_a: 0.0, ass_a: 0.0, tp: 0, fn_: num_gt, fp: num_pred })
            .collect();
        let warning = (num_gt == 0).then(|| "empty ground truth".to_string());
        return HotaResult { hota: 0.0, det_a: 0.0, ass_a: 0.0, per_alpha, warning };
    }

    let mut gt_count = vec![0.0f64; ng];
    let mut pred_count = vec![0.0f64; np];
    let mut potential = vec![0.0f64; ng * np];
    for frame in seq.frames() {
        let (fg, fp) = (frame.gt.len(), frame.pred.len());
        let row_sums: Vec<f64> = (0..fg).map(|g| (0..fp).map(|p| frame.sim(g, p)).sum()).collect();
        let col_sums: Vec<f64> = (0..fp).map(|p| (0..fg).map(|g| frame.sim(g, p)).sum()).collect();
        for (g, &(gid, _)) in frame.gt.iter().enumerate() {
            for (p, &(pid, _)) in frame.pred.iter().enumerate() {
                let s = frame.sim(g, p);
                let denom = row_sums[g] + col_sums[p] - s;
                if denom > f64::EPSILON {
                    potential[gid * np + pid] += s / denom;
                }
            }
        }
        for &(gid, _) in &frame.gt {
            gt_count[gid] += 1.0;
        }
        for &(pid, _) in &frame.pred {
            pred_count[pid] += 1.0;
        }
    }
    let alignment: Vec<f64> = (0..ng * np)
        .map(|i| {
            let (g, p) = (i / np, i % np);
            potential[i] / (gt_count[g] + pred_count[p] - potential[i])
        })
        .collect();

    let per_alpha = exec.map(alphas, |&alpha| {
        let mut matches = vec![0.0f64; ng * np];
        let mut tp = 0usize;
        for frame in seq.frames() {
            let m = match_frame(frame, alpha, |g, p| {
                alignment[frame.gt[g].0 * np + frame.pred[p].0] * frame.sim(g, p)
            });
            tp += m.tp();
            for (g, p) in m.pairs {
                matches[frame.gt[g].0 * np + frame.pred[p].0] += 1.0;
            }
        }
        let fn_ = num_gt - tp;
        let fp = num_pred - tp;
        let det_a = tp as f64 / (tp + fn_ + fp) as f64;
        let mut ass_sum = 0.0;
        for (i, &m) in matches.iter().enumerate() {
            if m > 0.0 {
                let (g, p) = (i / np, i % np);
                ass_sum += m * (m / (gt_count[g] + pred_count[p] - m));
            }
        }
        let ass_a = ass_sum / tp.max(1) as f64;
        HotaAlpha { alpha, hota: (det_a * ass_a).sqrt(), det_a, ass_a, tp, fn_, fp }
    });

    let n = per_alpha.len().max(1) as f64;
    HotaResult {
        hota: per_alpha.iter().map(|a| a.hota).sum::<f64>() / n,
        det_a: per_alpha.iter().map(|a| a.det_a).sum::<f64>() / n,
        ass_a: per_alpha.iter().map(|a| a.ass_a).sum::<f64>() / n,
        per_alpha,
        warning: None,
    }
}

#[cfg(test)]
mod tests {
    use super::super::test_support::*;
    use super::super::LabeledBox;
    use super::*;

    #[test]
    fn alpha_grid() {
        let a = default_alphas();
        assert_eq!(a.len(), 10);
        assert_eq!((a[0], a[2], a[9]), (0.05, 0.15, 0.5));
    }

    #[test]
    fn perfect_is_one() {
        let r = hota(&perfect_sequence(), &default_alphas(), Execution::Sequential);
        assert_eq!((r.hota, r.det_a, r.ass_a), (1.0, 1.0, 1.0));
    }

    #[test]
    fn split_prediction() {
        let r = hota(&split_sequence(), &default_alphas(), Execution::Sequential);
        assert_eq!(r.det_a, 1.0);
        assert!((r.ass_a - 0.5).abs() < 1e-12);
        assert!((r.hota - 0.5f64.sqrt()).abs() < 1e-9);
        for a in &r.per_alpha {
            assert!((a.hota - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_predictions_and_gt() {
        let gt = vec![LabeledBox::new(0, "g", cube(0.0))];
        let seq = EvalSequence::new(&gt, &[]).unwrap();
        let r = hota(&seq, &default_alphas(), Execution::Sequential);
        assert_eq!(r.hota, 0.0);
        assert!(r.warning.is_none());
        let seq = EvalSequence::new(&[], &gt).unwrap();
        let r = hota(&seq, &default_alphas(), Execution::Sequential);
        assert_eq!(r.hota, 0.0);
        assert!(r.warning.is_some());
    }

    #[test]
    fn frame_matching_examples() {
        let gt = vec![LabeledBox::new(0, "g", cube(0.0))];
        let seq = EvalSequence::new(&gt, &[]).unwrap();
        assert_eq!(match_frame(&seq.frames()[0], 0.5, |_, _| 0.0).tp(), 0);

        // crossed: g0 overlaps p1 more than p0, g1 the other way round
        let gt = vec![LabeledBox::new(0, "g0", cube(0.0)), LabeledBox::new(0, "g1", cube(2.0))];
        let pred = vec![LabeledBox::new(0, "p0", cube(1.8)), LabeledBox::new(0, "p1", cube(0.3))];
        let seq = EvalSequence::new(&gt, &pred).unwrap();
        let f = &seq.frames()[0];
        let m = match_frame(f, 0.05, |g, p| f.sim(g, p));
        assert_eq!(m.pairs, vec![(0, 1), (1, 0)]);
    }
}
