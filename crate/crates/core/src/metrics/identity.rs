use crate::assignment::{solve_assignment, CostMatrix};

use super::EvalSequence;

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityResult {
    pub idf1: f64,
    pub idp: f64,
    pub idr: f64,
    pub idtp: usize,
    pub idfp: usize,
    pub idfn: usize,
}

/// IDF1 from the globally optimal one-to-one matching between ground-truth
/// and predicted ids, where a pair's value is the number of frames in which
/// their boxes overlap with IoU ≥ `iou_threshold`.
pub fn idf1(seq: &EvalSequence, iou_threshold: f64) -> IdentityResult {
    let ng = seq.gt_ids().len();
    let np = seq.pred_ids().len();
    let mut co = vec![0usize; ng * np];
    for frame in seq.frames() {
        for (g, &(gid, _)) in frame.gt.iter().enumerate() {
            for (p, &(pid, _)) in frame.pred.iter().enumerate() {
                if frame.sim(g, p) >= iou_threshold {
                    co[gid * np + pid] += 1;
                }
            }
        }
    }
    let mut cost = CostMatrix::zeros(ng, np);
    for g in 0..ng {
        for p in 0..np {
            cost.set(g, p, -(co[g * np + p] as f64));
        }
    }
    let idtp: usize = solve_assignment(&cost)
        .expect("finite costs")
        .pairs
        .iter()
        .map(|&(g, p)| co[g * np + p])
        .sum();
    let idfn = seq.num_gt_dets() - idtp;
    let idfp = seq.num_pred_dets() - idtp;
    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    IdentityResult {
        idf1: ratio(2 * idtp, 2 * idtp + idfp + idfn),
        idp: ratio(idtp, idtp + idfp),
        idr: ratio(idtp, idtp + idfn),
        idtp,
        idfp,
        idfn,
    }
}
