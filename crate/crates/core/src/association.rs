//! Online tracking: weighted cost matrix, optimal assignment, gating and the
//! frame-by-frame track lifecycle.

use crate::assignment::{solve_assignment, CostMatrix, Matching};
use crate::error::{Error, Result};
use crate::features::{ema_update, multiview_distance};
use crate::geometry::spatial_cost;
use crate::model::{
    AssociationConfig, BoundingBox3D, Detection, Frame, MotionPrediction, MultiViewDescriptor,
    Tracklet, Vec3,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrackStatus {
    Active,
    Lost,
}

/// The open tracklet a track is currently extending.
#[derive(Debug, Clone)]
struct OpenTracklet {
    tracklet_id: u64,
    states: Vec<(u64, BoundingBox3D)>,
    descriptors: Vec<MultiViewDescriptor>,
}

#[derive(Debug, Clone)]
pub struct Track {
    pub track_id: u64,
    pub status: TrackStatus,
    pub last_box: BoundingBox3D,
    /// Running-average descriptor.
    pub descriptor: MultiViewDescriptor,
    pub last_seen_frame: u64,
    /// Metres per frame, maintained only with constant-velocity prediction.
    pub velocity: Option<Vec3>,
    /// Set once any tracklet of this track reached the minimum length.
    confirmed: bool,
    open: OpenTracklet,
}

impl Track {
    /// Box expected at `frame`.
    pub fn predicted_box(&self, frame: u64, mode: MotionPrediction) -> BoundingBox3D {
        match (mode, self.velocity) {
            (MotionPrediction::ConstantVelocity, Some(v)) => {
                let dt = frame.saturating_sub(self.last_seen_frame) as f64;
                let c = self.last_box.center();
                self.last_box
                    .with_center([c[0] + v[0] * dt, c[1] + v[1] * dt, c[2] + v[2] * dt])
                    .unwrap_or(self.last_box)
            }
            _ => self.last_box,
        }
    }

    pub fn is_confirmed(&self) -> bool {
        self.confirmed
    }

    pub fn current_tracklet_len(&self) -> usize {
        self.open.states.len()
    }
}

/// Pairs of `(track_id, detection index)` after assignment and gating.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AssignmentResult {
    pub matches: Vec<(u64, usize)>,
    pub unmatched_tracks: Vec<u64>,
    pub unmatched_detections: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrackEvent {
    Spawn { frame: u64, track_id: u64, detection: usize },
    Lost { frame: u64, track_id: u64 },
    Rematch { frame: u64, track_id: u64, gap: u64 },
    Retire { frame: u64, track_id: u64 },
    DegenerateBlend { frame: u64, track_id: u64, views: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct StepOutput {
    pub association: AssignmentResult,
    pub events: Vec<TrackEvent>,
}

/// Entry `(i, j)` is `λ·shape + (1-λ)·spatial` between track `i` and detection `j`.
///
/// A lost track unseen for more than `lost_spatial_horizon` frames is scored
/// on shape alone. With `λ = 0` descriptors are never consulted.
pub fn build_cost_matrix(
    tracks: &[Track],
    detections: &[Detection],
    frame: u64,
    cfg: &AssociationConfig,
) -> Result<CostMatrix> {
    let lambda = cfg.shape_weight;
    let mut cost = CostMatrix::zeros(tracks.len(), detections.len());
    for (i, track) in tracks.iter().enumerate() {
        let predicted = track.predicted_box(frame, cfg.motion_prediction);
        let shape_only = lambda > 0.0
            && track.status == TrackStatus::Lost
            && frame.saturating_sub(track.last_seen_frame) > cfg.lost_spatial_horizon;
        for (j, det) in detections.iter().enumerate() {
            let shape = if lambda > 0.0 {
                multiview_distance(&track.descriptor, &det.descriptor, cfg.view_compare_mode)?
            } else {
                0.0
            };
            let entry = if shape_only || lambda == 1.0 {
                shape
            } else if lambda == 0.0 {
                spatial_cost(&predicted, &det.bbox)
            } else {
                lambda * shape + (1.0 - lambda) * spatial_cost(&predicted, &det.bbox)
            };
            cost.set(i, j, entry);
        }
    }
    Ok(cost)
}

/// Moves every match costing more than `gamma` to the unmatched sides.
pub fn gate(result: &Matching, cost: &CostMatrix, gamma: f64) -> Matching {
    let mut out = Matching {
        pairs: Vec::with_capacity(result.pairs.len()),
        unmatched_rows: result.unmatched_rows.clone(),
        unmatched_cols: result.unmatched_cols.clone(),
    };
    for &(r, c) in &result.pairs {
        if cost.get(r, c) > gamma {
            out.unmatched_rows.push(r);
            out.unmatched_cols.push(c);
        } else {
            out.pairs.push((r, c));
        }
    }
    out.unmatched_rows.sort_unstable();
    out.unmatched_cols.sort_unstable();
    out
}

/// Tracker state for one sequence.
#[derive(Debug, Clone)]
pub struct Tracker {
    cfg: AssociationConfig,
    tracks: Vec<Track>,
    next_track_id: u64,
    next_tracklet_id: u64,
    last_frame: Option<u64>,
    feature_dim: Option<usize>,
    finished: Vec<Tracklet>,
}

impl Tracker {
    pub fn new(cfg: AssociationConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            tracks: Vec::new(),
            next_track_id: 0,
            next_tracklet_id: 0,
            last_frame: None,
            feature_dim: None,
            finished: Vec::new(),
        })
    }

    pub fn config(&self) -> &AssociationConfig {
        &self.cfg
    }

    /// Tracks still alive (active or lost), ordered by id.
    pub fn tracks(&self) -> &[Track] {
        &self.tracks
    }

    pub fn step(&mut self, frame: u64, detections: &[Detection]) -> Result<StepOutput> {
        if let Some(previous) = self.last_frame {
            if frame <= previous {
                return Err(Error::FrameOrder { previous, got: frame });
            }
        }
        for det in detections {
            let dim = *self.feature_dim.get_or_insert(det.descriptor.dim());
            if det.descriptor.dim() != dim {
                return Err(Error::DimensionMismatch(dim, det.descriptor.dim()));
            }
        }
        self.last_frame = Some(frame);

        let cost = build_cost_matrix(&self.tracks, detections, frame, &self.cfg)?;
        let matching = gate(&solve_assignment(&cost)?, &cost, self.cfg.gate);

        let mut events = Vec::new();
        let mut association = AssignmentResult {
            unmatched_detections: matching.unmatched_cols.clone(),
            ..Default::default()
        };
        let mut matched = vec![false; self.tracks.len()];
        for &(r, c) in &matching.pairs {
            matched[r] = true;
            let track_id = self.tracks[r].track_id;
            association.matches.push((track_id, c));
            self.update_track(r, frame, &detections[c], &mut events)?;
        }

        let mut retired = vec![false; self.tracks.len()];
        for (r, track) in self.tracks.iter_mut().enumerate() {
            if matched[r] {
                continue;
            }
            association.unmatched_tracks.push(track.track_id);
            if track.status == TrackStatus::Active {
                track.status = TrackStatus::Lost;
                events.push(TrackEvent::Lost { frame, track_id: track.track_id });
            }
            // unconfirmed tracks are clutter until proven otherwise
            let expired = frame - track.last_seen_frame > self.cfg.max_lost_frames;
            if expired || !track.confirmed {
                retired[r] = true;
                events.push(TrackEvent::Retire { frame, track_id: track.track_id });
            }
        }
        if retired.iter().any(|&r| r) {
            let mut keep = Vec::with_capacity(self.tracks.len());
            for (track, gone) in std::mem::take(&mut self.tracks).into_iter().zip(retired) {
                if gone {
                    self.close(track.track_id, track.open);
                } else {
                    keep.push(track);
                }
            }
            self.tracks = keep;
        }

        for &c in &matching.unmatched_cols {
            let track_id = self.spawn(frame, &detections[c]);
            events.push(TrackEvent::Spawn { frame, track_id, detection: c });
        }
        Ok(StepOutput { association, events })
    }

    fn update_track(
        &mut self,
        row: usize,
        frame: u64,
        det: &Detection,
        events: &mut Vec<TrackEvent>,
    ) -> Result<()> {
        let min_len = self.cfg.min_tracklet_len;
        let alpha = self.cfg.ema_alpha;
        let motion = self.cfg.motion_prediction;
        let track = &mut self.tracks[row];
        if track.status == TrackStatus::Lost {
            let gap = frame - track.last_seen_frame;
            events.push(TrackEvent::Rematch { frame, track_id: track.track_id, gap });
            let fresh = OpenTracklet {
                tracklet_id: self.next_tracklet_id,
                states: Vec::new(),
                descriptors: Vec::new(),
            };
            self.next_tracklet_id += 1;
            let old = std::mem::replace(&mut track.open, fresh);
            let track_id = track.track_id;
            // the absent span ends the previous appearance
            Self::close_into(&mut self.finished, min_len, track_id, old);
        }
        let track = &mut self.tracks[row];
        if motion == MotionPrediction::ConstantVelocity {
            let dt = (frame - track.last_seen_frame) as f64;
            let (a, b) = (track.last_box.center(), det.bbox.center());
            track.velocity = Some([(b[0] - a[0]) / dt, (b[1] - a[1]) / dt, (b[2] - a[2]) / dt]);
        }
        let blended = ema_update(&track.descriptor, &det.descriptor, alpha)?;
        if !blended.degenerate_views.is_empty() {
            events.push(TrackEvent::DegenerateBlend {
                frame,
                track_id: track.track_id,
                views: blended.degenerate_views,
            });
        }
        track.descriptor = blended.descriptor;
        track.last_box = det.bbox;
        track.last_seen_frame = frame;
        track.status = TrackStatus::Active;
        track.open.states.push((frame, det.bbox));
        track.open.descriptors.push(det.descriptor.clone());
        if track.open.states.len() >= min_len {
            track.confirmed = true;
        }
        Ok(())
    }

    fn spawn(&mut self, frame: u64, det: &Detection) -> u64 {
        let track_id = self.next_track_id;
        self.next_track_id += 1;
        let open = OpenTracklet {
            tracklet_id: self.next_tracklet_id,
            states: vec![(frame, det.bbox)],
            descriptors: vec![det.descriptor.clone()],
        };
        self.next_tracklet_id += 1;
        self.tracks.push(Track {
            track_id,
            status: TrackStatus::Active,
            last_box: det.bbox,
            descriptor: det.descriptor.clone(),
            last_seen_frame: frame,
            velocity: None,
            confirmed: self.cfg.min_tracklet_len <= 1,
            open,
        });
        track_id
    }

    fn close(&mut self, track_id: u64, open: OpenTracklet) {
        Self::close_into(&mut self.finished, self.cfg.min_tracklet_len, track_id, open);
    }

    fn close_into(finished: &mut Vec<Tracklet>, min_len: usize, track_id: u64, open: OpenTracklet) {
        if open.states.len() >= min_len {
            let t = Tracklet::new(open.tracklet_id, track_id, open.states, open.descriptors)
                .expect("tracker builds ordered, aligned tracklets");
            finished.push(t);
        }
    }

    /// Closes every open tracklet and returns all emitted tracklets by id.
    pub fn finish(mut self) -> Vec<Tracklet> {
        for track in std::mem::take(&mut self.tracks) {
            self.close(track.track_id, track.open);
        }
        self.finished.sort_by_key(|t| t.tracklet_id);
        self.finished
    }
}

/// Runs the tracker over ordered frames and returns the surviving tracklets.
pub fn run_sequence(frames: &[Frame], cfg: &AssociationConfig) -> Result<Vec<Tracklet>> {
    let mut tracker = Tracker::new(cfg.clone())?;
    for frame in frames {
        tracker.step(frame.index, &frame.detections)?;
    }
    Ok(tracker.finish())
}
