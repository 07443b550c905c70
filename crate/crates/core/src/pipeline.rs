//! Stage functions shared by the CLI, plus the end-to-end run.
//!
//! Every stage is a pure function of its inputs and configuration. Timing is
//! measured but never written into the artifact files, so re-running with
//! the same configuration reproduces them byte for byte.

use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::association::run_sequence;
use crate::config::{ImprintSection, PipelineConfig};
use crate::error::Result;
use crate::gallery::{train_gallery, GalleryModel};
use crate::imprints::{build_imprint, proximity_events, render_svg, Imprint, ProximityEvent, TimeRange};
use crate::io;
use crate::metrics::{evaluate, EvalSequence, EvaluationConfig, LabeledBox, MetricsReport};
use crate::model::{AssociationConfig, Frame, Trajectory, Tracklet};
use crate::par::Execution;
use crate::recovery::{recover_trajectories, Recovery};
use crate::simulator::{simulate, Rendered, RoomConfig, Scenario};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Throughput {
    pub frames: usize,
    pub seconds: f64,
}

impl Throughput {
    pub fn fps(&self) -> f64 {
        if self.seconds > 0.0 {
            self.frames as f64 / self.seconds
        } else {
            f64::INFINITY
        }
    }
}

/// Online tracking with wall-clock throughput.
pub fn track(frames: &[Frame], cfg: &AssociationConfig) -> Result<(Vec<Tracklet>, Throughput)> {
    let start = Instant::now();
    let tracklets = run_sequence(frames, cfg)?;
    let seconds = start.elapsed().as_secs_f64();
    Ok((tracklets, Throughput { frames: frames.len(), seconds }))
}

pub fn ground_truth_boxes(rendered: &Rendered) -> Vec<LabeledBox> {
    rendered.ground_truth.iter().map(LabeledBox::from).collect()
}

pub fn evaluate_tracklets(
    gt: &[LabeledBox],
    tracklets: &[Tracklet],
    cfg: &EvaluationConfig,
    exec: Execution,
) -> Result<MetricsReport> {
    evaluate(&EvalSequence::from_tracklets(gt, tracklets)?, cfg, exec)
}

pub fn evaluate_trajectories(
    gt: &[LabeledBox],
    trajectories: &[Trajectory],
    cfg: &EvaluationConfig,
    exec: Execution,
) -> Result<MetricsReport> {
    evaluate(&EvalSequence::from_trajectories(gt, trajectories)?, cfg, exec)
}

/// One rendered imprint.
#[derive(Debug, Clone, PartialEq)]
pub struct ImprintOutput {
    pub identity: String,
    pub imprint: Imprint,
    pub svg: String,
}

/// Imprints and proximity events for the selected trajectories. Trajectories
/// with no states in the time window are skipped.
pub fn imprint_trajectories(
    trajectories: &[Trajectory],
    room: &RoomConfig,
    section: &ImprintSection,
    frame_rate: f64,
    exec: Execution,
) -> Result<(Vec<ImprintOutput>, Vec<ProximityEvent>)> {
    let rois = room.regions()?;
    let range: TimeRange = section.range()?;
    let style = section.style()?;
    let selected: Vec<&Trajectory> = trajectories
        .iter()
        .filter(|t| section.identity.as_deref().is_none_or(|id| id == t.identity()))
        .collect();
    if let (Some(id), true) = (&section.identity, selected.is_empty()) {
        return Err(crate::Error::Empty(format!("no trajectory with identity '{id}'")));
    }
    let built = exec.map(&selected, |t| match build_imprint(t, range, frame_rate) {
        Ok(imprint) => {
            let svg = render_svg(&imprint, [room.min, room.max], &rois, &style);
            let events = proximity_events(&imprint, &rois);
            Ok(Some((ImprintOutput { identity: t.identity().to_string(), imprint, svg }, events)))
        }
        Err(crate::Error::Empty(_)) => Ok(None),
        Err(e) => Err(e),
    });
    let mut outputs = Vec::new();
    let mut events = Vec::new();
    for item in built {
        if let Some((o, e)) = item? {
            outputs.push(o);
            events.extend(e);
        }
    }
    Ok((outputs, events))
}

/// File-name-safe form of an identity.
pub fn file_stem(identity: &str) -> String {
    identity.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub scenario: Scenario,
    pub rendered: Rendered,
    pub tracklets: Vec<Tracklet>,
    pub throughput: Throughput,
    pub gallery: GalleryModel,
    pub recovery: Recovery,
    /// Metrics of the online tracklets, labeled by track id.
    pub online_report: MetricsReport,
    /// Metrics of the recovered trajectories.
    pub report: MetricsReport,
    pub imprints: Vec<ImprintOutput>,
    pub events: Vec<ProximityEvent>,
}

pub fn run_pipeline(cfg: &PipelineConfig, seed: u64, exec: Execution) -> Result<PipelineRun> {
    cfg.validate()?;
    let scenario_cfg = cfg.scenario();
    let (scenario, rendered) = simulate(&scenario_cfg, seed, exec)?;
    let (tracklets, throughput) = track(&rendered.frames, &cfg.tracker)?;
    let gallery = train_gallery(&rendered.enrollment, &cfg.gallery, exec)?;
    let recovery = recover_trajectories(&tracklets, &gallery, exec)?;
    let eval_cfg = cfg.evaluate.to_config()?;
    let gt = ground_truth_boxes(&rendered);
    let online_report = evaluate_tracklets(&gt, &tracklets, &eval_cfg, exec)?;
    let report = evaluate_trajectories(&gt, &recovery.trajectories, &eval_cfg, exec)?;
    let (imprints, events) =
        imprint_trajectories(&recovery.trajectories, cfg.room(), &cfg.imprint, scenario_cfg.frame_rate, exec)?;
    Ok(PipelineRun {
        scenario,
        rendered,
        tracklets,
        throughput,
        gallery,
        recovery,
        online_report,
        report,
        imprints,
        events,
    })
}

impl PipelineRun {
    /// Writes every artifact under `dir`; returns the paths written.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let mut files: Vec<(PathBuf, String)> = vec![
            (dir.join("detections.jsonl"), io::write_detections(&self.rendered.frames)),
            (dir.join("groundtruth.csv"), io::write_ground_truth(&self.rendered.ground_truth)),
            (dir.join("enrollment.jsonl"), io::write_enrollment(&self.rendered.enrollment)),
            (dir.join("tracklets.json"), io::write_tracklets(&self.tracklets)),
            (dir.join("gallery.json"), io::write_gallery(&self.gallery)),
            (dir.join("trajectories.json"), io::write_trajectories(&self.recovery.trajectories)),
            (dir.join("conflicts.json"), io::write_conflicts(&self.recovery)),
            (dir.join("report_online.json"), io::write_report(&self.online_report)),
            (dir.join("report.json"), io::write_report(&self.report)),
            (dir.join("events.csv"), io::write_events(&self.events)),
        ];
        for o in &self.imprints {
            files.push((dir.join("imprints").join(format!("{}.svg", file_stem(&o.identity))), o.svg.clone()));
        }
        for (path, text) in &files {
            io::write_text(path, text)?;
        }
        Ok(files.into_iter().map(|(p, _)| p).collect())
    }
}
