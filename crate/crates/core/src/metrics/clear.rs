use crate::assignment::{solve_assignment, CostMatrix};

use super::EvalSequence;

/// Bonus keeping a ground-truth object on the prediction it was matched to
/// at the previous timestep.
const CONTINUATION_BONUS: f64 = 1000.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ClearResult {
    pub mota: f64,
    pub motp: f64,
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub idsw: usize,
    pub num_gt: usize,
}

/// CLEAR MOT at an IoU threshold.
///
/// Per frame, pairs with IoU ≥ threshold are matched maximizing total IoU
/// plus a large bonus for pairs that were matched at the immediately
/// preceding frame. An identity switch is counted when a ground-truth
/// object is matched to a different prediction than the last one it was
/// matched to. `MOTA = 1 - (FN + FP + IDSW) / num_gt` (unclamped).
pub fn clear_mot(seq: &EvalSequence, iou_threshold: f64) -> ClearResult {
    let ng = seq.gt_ids().len();
    let mut last_match: Vec<Option<usize>> = vec![None; ng];
    let mut prev_step: Vec<Option<usize>> = vec![None; ng];
    let mut prev_frame: Option<u64> = None;
    let (mut tp, mut idsw) = (0usize, 0usize);
    let mut iou_sum = 0.0;

    for frame in seq.frames() {
        if prev_frame.is_some_and(|f| f + 1 != frame.index) {
            prev_step.fill(None);
        }
        prev_frame = Some(frame.index);
        let (fg, fp) = (frame.gt.len(), frame.pred.len());
        let mut cost = CostMatrix::zeros(fg, fp);
        for g in 0..fg {
            for p in 0..fp {
                let s = frame.sim(g, p);
                if s >= iou_threshold {
                    let bonus = if prev_step[frame.gt[g].0] == Some(frame.pred[p].0) {
                        CONTINUATION_BONUS
                    } else {
                        0.0
                    };
                    cost.set(g, p, -(s + bonus));
                }
            }
        }
        let sol = solve_assignment(&cost).expect("finite costs");
        let mut current: Vec<Option<usize>> = vec![None; ng];
        for (g, p) in sol.pairs {
            if frame.sim(g, p) < iou_threshold {
                continue;
            }
            let (gid, pid) = (frame.gt[g].0, frame.pred[p].0);
            if last_match[gid].is_some_and(|q| q != pid) {
                idsw += 1;
            }
            last_match[gid] = Some(pid);
            current[gid] = Some(pid);
            tp += 1;
            iou_sum += frame.sim(g, p);
        }
        prev_step = current;
    }

    let num_gt = seq.num_gt_dets();
    let fn_ = num_gt - tp;
    let fp = seq.num_pred_dets() - tp;
    let mota = 1.0 - (fn_ + fp + idsw) as f64 / num_gt.max(1) as f64;
    let motp = if tp > 0 { iou_sum / tp as f64 } else { 0.0 };
    ClearResult { mota, motp, tp, fp, fn_, idsw, num_gt }
}

#[cfg(test)]
mod tests {
    use super::super::test_support::*;
    use super::super::{EvalSequence, LabeledBox};
    use super::*;

    #[test]
    fn perfect() {
        let r = clear_mot(&perfect_sequence(), 0.5);
        assert_eq!((r.mota, r.fp, r.fn_, r.idsw), (1.0, 0, 0, 0));
    }

    /// Ten GT detections of one object; one frame missed, one spurious
    /// prediction, and one identity switch.
    #[test]
    fn ten_detections_three_errors() {
        let gt: Vec<LabeledBox> = (0..10).map(|f| LabeledBox::new(f, "g", cube(f as f64 * 0.1))).collect();
        let mut pred = Vec::new();
        for f in 0..10u64 {
            if f == 3 {
                continue;
            }
            let id = if f < 6 { "a" } else { "b" };
            pred.push(LabeledBox::new(f, id, cube(f as f64 * 0.1)));
        }
        pred.push(LabeledBox::new(8, "c", cube(20.0)));
        let r = clear_mot(&EvalSequence::new(&gt, &pred).unwrap(), 0.5);
        assert_eq!((r.fp, r.fn_, r.idsw, r.num_gt), (1, 1, 1, 10));
        assert!((r.mota - 0.7).abs() < 1e-12);
    }

    #[test]
    fn empty_predictions() {
        let gt: Vec<LabeledBox> = (0..10).map(|f| LabeledBox::new(f, "g", cube(0.0))).collect();
        let r = clear_mot(&EvalSequence::new(&gt, &[]).unwrap(), 0.5);
        assert_eq!((r.mota, r.fn_), (0.0, 10));
    }

    #[test]
    fn mota_can_go_negative() {
        let gt = vec![LabeledBox::new(0, "g", cube(0.0))];
        let pred: Vec<LabeledBox> =
            (0..3).map(|i| LabeledBox::new(0, format!("p{i}"), cube(10.0 + 3.0 * i as f64))).collect();
        let r = clear_mot(&EvalSequence::new(&gt, &pred).unwrap(), 0.5);
        assert_eq!(r.mota, -3.0);
    }

    #[test]
    fn continuation_beats_higher_iou() {
        // frame 0: g matched to a; frame 1: b overlaps g slightly better than a
        let gt = vec![LabeledBox::new(0, "g", cube(0.0)), LabeledBox::new(1, "g", cube(0.0))];
        let pred = vec![
            LabeledBox::new(0, "a", cube(0.0)),
            LabeledBox::new(1, "a", cube(0.2)),
            LabeledBox::new(1, "b", cube(0.1)),
        ];
        let r = clear_mot(&EvalSequence::new(&gt, &pred).unwrap(), 0.5);
        assert_eq!((r.idsw, r.fp), (0, 1));
    }
}
