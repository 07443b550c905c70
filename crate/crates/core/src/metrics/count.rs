use crate::error::{Error, Result};

use super::EvalSequence;

#[derive(Debug, Clone, PartialEq)]
pub struct CountResult {
    /// `100 · predicted detections / ground-truth detections`.
    pub pct_dets: f64,
    /// `100 · distinct predicted ids / distinct ground-truth ids`.
    pub pct_ids: f64,
}

pub fn counting(seq: &EvalSequence) -> Result<CountResult> {
    let gt_dets = seq.num_gt_dets();
    if gt_dets == 0 {
        return Err(Error::Empty("counting metrics need ground truth".into()));
    }
    Ok(CountResult {
        pct_dets: 100.0 * seq.num_pred_dets() as f64 / gt_dets as f64,
        pct_ids: 100.0 * seq.pred_ids().len() as f64 / seq.gt_ids().len() as f64,
    })
}
