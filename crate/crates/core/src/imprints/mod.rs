//! Temporal pathway imprints: a trajectory's box centers projected onto the
//! floor plane, parameterized by time, with regions of interest and the
//! proximity events they trigger.

mod region;
mod svg;

pub use region::{distance_to_polygon, RegionKind, RegionOfInterest, STERILE_BORDER_M};
pub use svg::{color_parameter, render_svg, SvgStyle};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Trajectory;
use crate::par::Execution;

/// Inclusive clip window in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeRange {
    pub start_s: f64,
    pub end_s: f64,
}

impl Default for TimeRange {
    fn default() -> Self {
        Self { start_s: 0.0, end_s: 1000.0 }
    }
}

impl TimeRange {
    pub fn new(start_s: f64, end_s: f64) -> Result<Self> {
        if !(start_s.is_finite() && end_s.is_finite() && start_s <= end_s) {
            return Err(Error::InvalidConfig(format!("bad time range [{start_s}, {end_s}]")));
        }
        Ok(Self { start_s, end_s })
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.start_s && t <= self.end_s
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImprintPoint {
    pub frame: u64,
    pub x: f64,
    pub y: f64,
    /// Seconds.
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    pub tracklet_id: u64,
    pub points: Vec<ImprintPoint>,
}

/// Interval between two consecutive polylines, in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Absence {
    pub from_s: f64,
    pub to_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Imprint {
    pub identity: String,
    pub range: TimeRange,
    pub frame_rate: f64,
    pub polylines: Vec<Polyline>,
    pub absences: Vec<Absence>,
}

impl Imprint {
    pub fn empty(identity: impl Into<String>, range: TimeRange, frame_rate: f64) -> Self {
        Self { identity: identity.into(), range, frame_rate, polylines: Vec::new(), absences: Vec::new() }
    }

    pub fn num_points(&self) -> usize {
        self.polylines.iter().map(|p| p.points.len()).sum()
    }
}

/// Projects every tracklet of `traj` within `range` to a timed X-Y polyline.
pub fn build_imprint(traj: &Trajectory, range: TimeRange, frame_rate: f64) -> Result<Imprint> {
    if !(frame_rate > 0.0 && frame_rate.is_finite()) {
        return Err(Error::InvalidConfig("frame_rate must be > 0".into()));
    }
    let mut imprint = Imprint::empty(traj.identity(), range, frame_rate);
    for tracklet in traj.tracklets() {
        let points: Vec<ImprintPoint> = tracklet
            .states()
            .iter()
            .map(|&(frame, b)| {
                let c = b.center();
                ImprintPoint { frame, x: c[0], y: c[1], t: frame as f64 / frame_rate }
            })
            .filter(|p| range.contains(p.t))
            .collect();
        if points.is_empty() {
            continue;
        }
        if let Some(prev) = imprint.polylines.last() {
            let from_s = prev.points.last().expect("non-empty").t;
            imprint.absences.push(Absence { from_s, to_s: points[0].t });
        }
        imprint.polylines.push(Polyline { tracklet_id: tracklet.tracklet_id, points });
    }
    if imprint.polylines.is_empty() {
        return Err(Error::Empty(format!(
            "trajectory {} has no states in [{}, {}] s",
            traj.identity(),
            range.start_s,
            range.end_s
        )));
    }
    Ok(imprint)
}

/// One imprint per trajectory, skipping trajectories with nothing in range.
pub fn build_imprints(
    trajectories: &[Trajectory],
    range: TimeRange,
    frame_rate: f64,
    exec: Execution,
) -> Result<Vec<Imprint>> {
    exec.map(trajectories, |t| match build_imprint(t, range, frame_rate) {
        Err(Error::Empty(_)) => Ok(None),
        other => other.map(Some),
    })
    .into_iter()
    .filter_map(Result::transpose)
    .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProximityEvent {
    pub roi: String,
    pub identity: String,
    pub enter_s: f64,
    pub exit_s: f64,
    /// Closest approach to the polygon during the event; zero if inside.
    pub min_dist_m: f64,
}

/// Maximal runs of consecutive samples inside each expanded region. A run
/// ends at a polyline boundary or a skipped frame. Events are ordered by
/// region, then time.
pub fn proximity_events(imprint: &Imprint, rois: &[RegionOfInterest]) -> Vec<ProximityEvent> {
    let mut events = Vec::new();
    for roi in rois {
        for line in &imprint.polylines {
            let mut run: Option<ProximityEvent> = None;
            let mut prev_frame: Option<u64> = None;
            for p in &line.points {
                let d = roi.distance([p.x, p.y]);
                let contiguous = prev_frame.is_some_and(|f| p.frame == f + 1);
                prev_frame = Some(p.frame);
                if !contiguous {
                    events.extend(run.take());
                }
                if d <= roi.margin() {
                    match &mut run {
                        Some(ev) => {
                            ev.exit_s = p.t;
                            ev.min_dist_m = ev.min_dist_m.min(d);
                        }
                        None => {
                            run = Some(ProximityEvent {
                                roi: roi.name().to_string(),
                                identity: imprint.identity.clone(),
                                enter_s: p.t,
                                exit_s: p.t,
                                min_dist_m: d,
                            })
                        }
                    }
                } else {
                    events.extend(run.take());
                }
            }
            events.extend(run);
        }
    }
    events
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::model::{BoundingBox3D, MultiViewDescriptor, Tracklet};

    pub fn descriptor() -> MultiViewDescriptor {
        MultiViewDescriptor::from_rows(&vec![vec![1.0, 0.0]; 8]).unwrap()
    }

    pub fn tracklet(id: u64, points: &[(u64, f64, f64)]) -> Tracklet {
        let states = points
            .iter()
            .map(|&(f, x, y)| (f, BoundingBox3D::new([x, y, 0.9], [0.6, 0.6, 1.8]).unwrap()))
            .collect();
        Tracklet::new(id, id, states, vec![descriptor(); points.len()]).unwrap()
    }

    pub fn unit_square(margin: f64) -> RegionOfInterest {
        RegionOfInterest::new("sq", vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]], margin, RegionKind::Sterile)
            .unwrap()
    }

    #[test]
    fn stationary_agent() {
        let t = tracklet(0, &[(0, 2.0, 3.0), (1, 2.0, 3.0), (2, 2.0, 3.0)]);
        let im = build_imprint(&Trajectory::new("a", vec![t]).unwrap(), TimeRange::default(), 30.0).unwrap();
        assert_eq!(im.polylines.len(), 1);
        assert!(im.polylines[0].points.iter().all(|p| (p.x, p.y) == (2.0, 3.0)));
        assert_eq!(im.polylines[0].points[2].t, 2.0 / 30.0);
    }

    #[test]
    fn two_tracklets_have_absence() {
        let a = tracklet(0, &[(0, 0.0, 0.0), (1, 0.1, 0.0)]);
        let b = tracklet(1, &[(60, 1.0, 0.0), (61, 1.1, 0.0)]);
        let im = build_imprint(&Trajectory::new("a", vec![a, b]).unwrap(), TimeRange::default(), 30.0).unwrap();
        assert_eq!(im.polylines.len(), 2);
        assert_eq!(im.absences, vec![Absence { from_s: 1.0 / 30.0, to_s: 2.0 }]);
    }

    #[test]
    fn clip_keeps_frames_up_to_rate_times_range() {
        let pts: Vec<(u64, f64, f64)> = (29_990..30_010).map(|f| (f, 1.0, 1.0)).collect();
        let im = build_imprint(&Trajectory::new("a", vec![tracklet(0, &pts)]).unwrap(), TimeRange::default(), 30.0)
            .unwrap();
        let frames: Vec<u64> = im.polylines[0].points.iter().map(|p| p.frame).collect();
        assert_eq!(*frames.last().unwrap(), 30_000);
        assert_eq!(frames.len(), 11);
        let late = tracklet(0, &[(40_000, 1.0, 1.0)]);
        assert!(matches!(
            build_imprint(&Trajectory::new("a", vec![late]).unwrap(), TimeRange::default(), 30.0),
            Err(Error::Empty(_))
        ));
    }

    #[test]
    fn straight_crossing_gives_one_event() {
        // y = 0.5 from x = -2 to 3 in steps of 0.1; expanded square spans x in [-0.5, 1.5]
        let pts: Vec<(u64, f64, f64)> = (0..=50).map(|i| (i, -2.0 + 0.1 * i as f64, 0.5)).collect();
        let im = build_imprint(&Trajectory::new("a", vec![tracklet(0, &pts)]).unwrap(), TimeRange::default(), 10.0)
            .unwrap();
        let ev = proximity_events(&im, &[unit_square(0.5)]);
        assert_eq!(ev.len(), 1);
        assert!(ev[0].enter_s < ev[0].exit_s);
        assert_eq!(ev[0].min_dist_m, 0.0);
        // first sample with x >= -0.5 is i = 15, last with x <= 1.5 is i = 35
        assert!((ev[0].enter_s - 1.5).abs() < 1e-9 && (ev[0].exit_s - 3.5).abs() < 1e-9);
    }

    #[test]
    fn far_path_and_inside_path() {
        let far = tracklet(0, &[(0, 5.0, 5.0), (1, 5.1, 5.0)]);
        let im = build_imprint(&Trajectory::new("a", vec![far]).unwrap(), TimeRange::default(), 1.0).unwrap();
        assert!(proximity_events(&im, &[unit_square(0.3)]).is_empty());

        let inside = tracklet(0, &[(0, 0.5, 0.5), (1, 0.6, 0.5), (2, 0.7, 0.5)]);
        let im = build_imprint(&Trajectory::new("a", vec![inside]).unwrap(), TimeRange::default(), 1.0).unwrap();
        let ev = proximity_events(&im, &[unit_square(0.3)]);
        assert_eq!(ev.len(), 1);
        assert_eq!((ev[0].enter_s, ev[0].exit_s), (0.0, 2.0));
    }

    #[test]
    fn frame_gap_splits_event() {
        let t = tracklet(0, &[(0, 0.5, 0.5), (1, 0.5, 0.5), (5, 0.5, 0.5)]);
        let im = build_imprint(&Trajectory::new("a", vec![t]).unwrap(), TimeRange::default(), 1.0).unwrap();
        assert_eq!(proximity_events(&im, &[unit_square(0.0)]).len(), 2);
    }
}
