//! Offline global trajectory recovery.
//!
//! Every tracklet is max-pooled over time into one descriptor, classified by
//! the gallery, and grouped with the other tracklets of its identity. Two
//! tracklets of one identity may not overlap in time: tracklets are placed in
//! order of decreasing classification margin, and one that collides with an
//! already placed tracklet falls back to its second-best identity, or is
//! excluded if that collides too.

use std::collections::BTreeMap;

use crate::error::Result;
use crate::features::temporal_max_pool;
use crate::gallery::{Classification, GalleryModel, UNKNOWN_PREFIX};
use crate::model::{Trajectory, Tracklet};
use crate::par::Execution;

#[derive(Debug, Clone, PartialEq)]
pub enum Resolution {
    Reassigned { identity: String },
    Excluded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Conflict {
    pub tracklet_id: u64,
    /// Identity the classifier preferred.
    pub original: String,
    /// Already placed tracklet it collided with.
    pub conflicting_with: u64,
    pub margin: f64,
    pub resolution: Resolution,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackletAssignment {
    pub tracklet_id: u64,
    pub classification: Classification,
    /// Final identity, `None` when excluded.
    pub identity: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Recovery {
    pub trajectories: Vec<Trajectory>,
    pub conflicts: Vec<Conflict>,
    pub excluded: Vec<u64>,
    pub assignments: Vec<TrackletAssignment>,
}

pub fn recover_trajectories(
    tracklets: &[Tracklet],
    gallery: &GalleryModel,
    exec: Execution,
) -> Result<Recovery> {
    let classifications: Vec<Classification> = exec
        .map(tracklets, |t| gallery.classify(&temporal_max_pool(t.descriptors())?))
        .into_iter()
        .collect::<Result<_>>()?;

    let mut order: Vec<usize> = (0..tracklets.len()).collect();
    order.sort_by(|&a, &b| {
        classifications[b]
            .margin
            .total_cmp(&classifications[a].margin)
            .then(tracklets[a].tracklet_id.cmp(&tracklets[b].tracklet_id))
    });

    // gallery identities keyed by index; open-set tracklets by tracklet id
    let mut known: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut unknown: Vec<usize> = Vec::new();
    let mut final_identity: Vec<Option<String>> = vec![None; tracklets.len()];
    let mut conflicts = Vec::new();
    let mut excluded = Vec::new();

    let collision = |placed: &[usize], idx: usize| {
        placed.iter().copied().find(|&p| tracklets[p].overlaps(&tracklets[idx]))
    };

    for idx in order {
        let c = &classifications[idx];
        let Some(best) = c.identity else {
            final_identity[idx] = Some(unknown_label(&tracklets[idx]));
            unknown.push(idx);
            continue;
        };
        let Some(other) = collision(known.get(&best).map_or(&[][..], Vec::as_slice), idx) else {
            known.entry(best).or_default().push(idx);
            final_identity[idx] = Some(gallery.identities()[best].clone());
            continue;
        };
        let fallback = c.second_best().filter(|&s| {
            collision(known.get(&s).map_or(&[][..], Vec::as_slice), idx).is_none()
        });
        let resolution = match fallback {
            Some(s) => {
                known.entry(s).or_default().push(idx);
                let identity = gallery.identities()[s].clone();
                final_identity[idx] = Some(identity.clone());
                Resolution::Reassigned { identity }
            }
            None => {
                excluded.push(tracklets[idx].tracklet_id);
                Resolution::Excluded
            }
        };
        conflicts.push(Conflict {
            tracklet_id: tracklets[idx].tracklet_id,
            original: c.label.clone(),
            conflicting_with: tracklets[other].tracklet_id,
            margin: c.margin,
            resolution,
        });
    }

    let mut trajectories = Vec::new();
    for (identity, members) in &known {
        let group = members.iter().map(|&i| tracklets[i].clone()).collect();
        trajectories.push(Trajectory::new(gallery.identities()[*identity].clone(), group)?);
    }
    unknown.sort_by_key(|&i| tracklets[i].tracklet_id);
    for idx in unknown {
        trajectories.push(Trajectory::new(unknown_label(&tracklets[idx]), vec![tracklets[idx].clone()])?);
    }
    conflicts.sort_by_key(|c| c.tracklet_id);
    excluded.sort_unstable();

    let assignments = tracklets
        .iter()
        .zip(classifications)
        .zip(final_identity)
        .map(|((t, classification), identity)| TrackletAssignment {
            tracklet_id: t.tracklet_id,
            classification,
            identity,
        })
        .collect();
    Ok(Recovery { trajectories, conflicts, excluded, assignments })
}

fn unknown_label(t: &Tracklet) -> String {
    format!("{UNKNOWN_PREFIX}-{}", t.tracklet_id)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::{GalleryTrainingConfig, ViewClassifier};
    use crate::model::{BoundingBox3D, MultiViewDescriptor, NUM_VIEWS};

    /// Three identities on the coordinate axes of a 3-dim feature space;
    /// identity `j` scores `scale·x_j` in every view.
    fn axis_gallery() -> GalleryModel {
        let views = (0..NUM_VIEWS)
            .map(|_| ViewClassifier {
                weights: vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]],
                biases: vec![0.0; 3],
            })
            .collect();
        GalleryModel::from_parts(
            vec!["A".into(), "B".into(), "C".into()],
            3,
            views,
            GalleryTrainingConfig::default(),
            1.0,
        )
        .unwrap()
    }

    fn tracklet(id: u64, frames: std::ops::RangeInclusive<u64>, feat: [f64; 3]) -> Tracklet {
        let d = MultiViewDescriptor::from_rows(&vec![feat.to_vec(); NUM_VIEWS]).unwrap();
        let b = BoundingBox3D::new([0.0, 0.0, 0.9], [0.6, 0.6, 1.8]).unwrap();
        let states: Vec<_> = frames.map(|f| (f, b)).collect();
        let n = states.len();
        Tracklet::new(id, id, states, vec![d; n]).unwrap()
    }

    fn members(r: &Recovery, identity: &str) -> Vec<u64> {
        r.trajectories
            .iter()
            .find(|t| t.identity() == identity)
            .map(|t| t.tracklets().iter().map(|x| x.tracklet_id).collect())
            .unwrap_or_default()
    }

    #[test]
    fn disjoint_grouping() {
        let ts = vec![
            tracklet(1, 0..=10, [1.0, 0.1, 0.0]),
            tracklet(2, 20..=30, [1.0, 0.0, 0.1]),
            tracklet(3, 5..=15, [0.1, 1.0, 0.0]),
        ];
        let r = recover_trajectories(&ts, &axis_gallery(), Execution::Sequential).unwrap();
        assert_eq!(members(&r, "A"), vec![1, 2]);
        assert_eq!(members(&r, "B"), vec![3]);
        assert!(r.conflicts.is_empty());
    }

    #[test]
    fn single_tracklet() {
        let ts = vec![tracklet(7, 0..=4, [0.0, 0.0, 1.0])];
        let r = recover_trajectories(&ts, &axis_gallery(), Execution::Sequential).unwrap();
        assert_eq!(r.trajectories.len(), 1);
        assert_eq!(members(&r, "C"), vec![7]);
    }

    #[test]
    fn overlapping_same_identity_falls_back_to_second_best() {
        // T1 strongly A; T2 weakly A with B second
        let ts = vec![
            tracklet(1, 0..=10, [1.0, 0.0, 0.0]),
            tracklet(2, 5..=15, [0.6, 0.55, 0.0]),
        ];
        let r = recover_trajectories(&ts, &axis_gallery(), Execution::Sequential).unwrap();
        assert_eq!(members(&r, "A"), vec![1]);
        assert_eq!(members(&r, "B"), vec![2]);
        assert_eq!(r.conflicts.len(), 1);
        let c = &r.conflicts[0];
        assert_eq!((c.tracklet_id, c.conflicting_with, c.original.as_str()), (2, 1, "A"));
        assert_eq!(c.resolution, Resolution::Reassigned { identity: "B".into() });
    }

    #[test]
    fn unresolvable_conflict_is_excluded() {
        let ts = vec![
            tracklet(1, 0..=10, [1.0, 0.0, 0.0]),
            tracklet(2, 0..=10, [0.0, 1.0, 0.0]),
            tracklet(3, 5..=15, [0.6, 0.5, 0.0]),
        ];
        let r = recover_trajectories(&ts, &axis_gallery(), Execution::Sequential).unwrap();
        assert_eq!(r.excluded, vec![3]);
        assert_eq!(r.conflicts[0].resolution, Resolution::Excluded);
        let covered: usize = r.trajectories.iter().map(|t| t.tracklets().len()).sum();
        assert_eq!(covered + r.excluded.len(), ts.len());
    }

    #[test]
    fn open_set_tracklets_get_their_own_trajectory() {
        let ts = vec![tracklet(4, 0..=3, [-1.0, -1.0, -1.0])];
        let r = recover_trajectories(&ts, &axis_gallery(), Execution::Sequential).unwrap();
        assert_eq!(r.trajectories[0].identity(), "unknown-4");
    }
}
