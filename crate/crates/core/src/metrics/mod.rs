//! Tracking metrics over paired ground-truth / predicted sequences.
//!
//! Similarity between a ground-truth and a predicted box is their 3D IoU.

mod clear;
mod count;
mod hota;
mod identity;
mod report;

pub use clear::{clear_mot, ClearResult};
pub use count::{counting, CountResult};
pub use hota::{default_alphas, hota, match_frame, FrameMatch, HotaAlpha, HotaResult};
pub use identity::{idf1, IdentityResult};
pub use report::{evaluate, parse_alphas, EvaluationConfig, MetricsReport, REPORT_FORMAT_VERSION};

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::geometry::iou3d;
use crate::model::{BoundingBox3D, Trajectory, Tracklet};

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledBox {
    pub frame: u64,
    pub id: String,
    pub bbox: BoundingBox3D,
}

impl LabeledBox {
    pub fn new(frame: u64, id: impl Into<String>, bbox: BoundingBox3D) -> Self {
        Self { frame, id: id.into(), bbox }
    }
}

/// One timestep: ground-truth and predicted objects with their pairwise IoU.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalFrame {
    pub index: u64,
    /// `(gt id index, box)`.
    pub gt: Vec<(usize, BoundingBox3D)>,
    /// `(pred id index, box)`.
    pub pred: Vec<(usize, BoundingBox3D)>,
    /// Row-major `gt.len() x pred.len()` IoU matrix.
    pub similarity: Vec<f64>,
}

impl EvalFrame {
    #[inline]
    pub fn sim(&self, g: usize, p: usize) -> f64 {
        self.similarity[g * self.pred.len() + p]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalSequence {
    gt_ids: Vec<String>,
    pred_ids: Vec<String>,
    frames: Vec<EvalFrame>,
}

type IdBox = (usize, BoundingBox3D);

impl EvalSequence {
    pub fn new(gt: &[LabeledBox], pred: &[LabeledBox]) -> Result<Self> {
        let gt_ids = sorted_ids(gt)?;
        let pred_ids = sorted_ids(pred)?;
        let mut by_frame: BTreeMap<u64, (Vec<IdBox>, Vec<IdBox>)> = BTreeMap::new();
        for item in gt {
            let id = gt_ids.binary_search(&item.id).expect("id collected");
            by_frame.entry(item.frame).or_default().0.push((id, item.bbox));
        }
        for item in pred {
            let id = pred_ids.binary_search(&item.id).expect("id collected");
            by_frame.entry(item.frame).or_default().1.push((id, item.bbox));
        }
        let mut frames = Vec::with_capacity(by_frame.len());
        for (index, (mut g, mut p)) in by_frame {
            g.sort_by_key(|x| x.0);
            p.sort_by_key(|x| x.0);
            if g.windows(2).any(|w| w[0].0 == w[1].0) || p.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(Error::Schema(format!("frame {index}: duplicate id within a frame")));
            }
            let similarity =
                g.iter().flat_map(|(_, gb)| p.iter().map(move |(_, pb)| iou3d(gb, pb))).collect();
            frames.push(EvalFrame { index, gt: g, pred: p, similarity });
        }
        Ok(Self { gt_ids, pred_ids, frames })
    }

    /// Predictions labeled by the online track id of each tracklet.
    pub fn from_tracklets(gt: &[LabeledBox], tracklets: &[Tracklet]) -> Result<Self> {
        let pred: Vec<LabeledBox> = tracklets
            .iter()
            .flat_map(|t| {
                t.states().iter().map(move |&(f, b)| LabeledBox::new(f, t.track_id.to_string(), b))
            })
            .collect();
        Self::new(gt, &pred)
    }

    /// Predictions labeled by recovered identity.
    pub fn from_trajectories(gt: &[LabeledBox], trajectories: &[Trajectory]) -> Result<Self> {
        let pred: Vec<LabeledBox> = trajectories
            .iter()
            .flat_map(|tr| {
                tr.tracklets().iter().flat_map(move |t| {
                    t.states().iter().map(move |&(f, b)| LabeledBox::new(f, tr.identity(), b))
                })
            })
            .collect();
        Self::new(gt, &pred)
    }

    pub fn gt_ids(&self) -> &[String] {
        &self.gt_ids
    }

    pub fn pred_ids(&self) -> &[String] {
        &self.pred_ids
    }

    pub fn frames(&self) -> &[EvalFrame] {
        &self.frames
    }

    pub fn num_gt_dets(&self) -> usize {
        self.frames.iter().map(|f| f.gt.len()).sum()
    }

    pub fn num_pred_dets(&self) -> usize {
        self.frames.iter().map(|f| f.pred.len()).sum()
    }
}

fn sorted_ids(items: &[LabeledBox]) -> Result<Vec<String>> {
    if let Some(item) = items.iter().find(|i| i.id.is_empty()) {
        return Err(Error::Schema(format!("frame {}: empty id", item.frame)));
    }
    let mut ids: Vec<String> = items.iter().map(|i| i.id.clone()).collect();
    ids.sort();
    ids.dedup();
    Ok(ids)
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;

    pub fn cube(x: f64) -> BoundingBox3D {
        BoundingBox3D::new([x, 0.0, 0.5], [1.0, 1.0, 1.0]).unwrap()
    }

    /// One GT identity over four frames, predicted exactly but split into
    /// ids `a` (frames 1-2) and `b` (frames 3-4).
    pub fn split_sequence() -> EvalSequence {
        let gt: Vec<LabeledBox> = (1..=4).map(|f| LabeledBox::new(f, "g", cube(f as f64))).collect();
        let pred: Vec<LabeledBox> = (1..=4)
            .map(|f| LabeledBox::new(f, if f <= 2 { "a" } else { "b" }, cube(f as f64)))
            .collect();
        EvalSequence::new(&gt, &pred).unwrap()
    }

    pub fn perfect_sequence() -> EvalSequence {
        let mut gt = Vec::new();
        for f in 0..6u64 {
            gt.push(LabeledBox::new(f, "g1", cube(f as f64 * 0.1)));
            gt.push(LabeledBox::new(f, "g2", cube(5.0 - f as f64 * 0.1)));
        }
        EvalSequence::new(&gt, &gt).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::test_support::*;
    use super::*;

    #[test]
    fn rejects_duplicate_ids_in_frame() {
        let gt = vec![LabeledBox::new(0, "g", cube(0.0)), LabeledBox::new(0, "g", cube(3.0))];
        assert!(EvalSequence::new(&gt, &[]).is_err());
    }

    #[test]
    fn similarity_layout() {
        let seq = split_sequence();
        assert_eq!(seq.frames().len(), 4);
        assert_eq!(seq.frames()[0].sim(0, 0), 1.0);
        assert_eq!(seq.pred_ids(), &["a".to_string(), "b".to_string()]);
    }
}
