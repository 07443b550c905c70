//! `geotrack`: simulate, track, recover, evaluate and render imprints.
//!
//! Every command reads an optional pipeline TOML (`--config`), then applies
//! `--set section.key=value` assignments, then its dedicated flags. Failures
//! print `{"error": CODE, "message": ...}` on stderr and exit with status 2.

mod overrides;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use geotrack_core::config::{load_room, PipelineConfig};
use geotrack_core::gallery::train_gallery;
use geotrack_core::io;
use geotrack_core::metrics::{EvalSequence, LabeledBox, MetricsReport};
use geotrack_core::par::Execution;
use geotrack_core::pipeline::{file_stem, imprint_trajectories, run_pipeline, track};
use geotrack_core::recovery::recover_trajectories;
use geotrack_core::simulator::{simulate, Rendered};
use geotrack_core::{Error, Result};

use overrides::Layered;

#[derive(Parser)]
#[command(name = "geotrack", version, about = "Multi-object tracking with geometric re-identification")]
struct Cli {
    /// Run every stage on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Pipeline configuration (TOML).
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Override any configuration key, e.g. `--set tracker.gate=0.5`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a scenario and write detections, ground truth and enrollment.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Online association of a detection stream into tracklets.
    Track {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        detections: PathBuf,
        #[arg(long, default_value = "tracklets.json")]
        out: PathBuf,
        /// Shape weight λ.
        #[arg(long)]
        shape_weight: Option<f64>,
        /// Gate γ.
        #[arg(long)]
        gate: Option<f64>,
        #[arg(long)]
        max_lost_frames: Option<u64>,
        #[arg(long)]
        min_tracklet_len: Option<u64>,
    },
    /// Train the identity gallery from enrollment descriptors.
    TrainGallery {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        enrollment: PathBuf,
        #[arg(long, default_value = "gallery.json")]
        out: PathBuf,
        #[arg(long)]
        epochs: Option<u64>,
    },
    /// Offline recovery: writes trajectories.json and conflicts.json.
    Recover {
        #[arg(long)]
        tracklets: PathBuf,
        #[arg(long)]
        gallery: PathBuf,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Score tracklets or trajectories against ground truth.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        groundtruth: PathBuf,
        /// tracklets.json or trajectories.json.
        #[arg(long)]
        predictions: PathBuf,
        /// Comma list of hota, clear, idf1, count.
        #[arg(long)]
        metrics: Option<String>,
        /// `start:step:stop` or a comma list.
        #[arg(long)]
        alphas: Option<String>,
        #[arg(long, default_value = "report.json")]
        out: PathBuf,
    },
    /// Render pathway imprints and proximity events.
    Imprint {
        #[arg(long)]
        trajectories: PathBuf,
        /// Room description: bare room table, `[room]` or a pipeline config.
        #[arg(long)]
        room: PathBuf,
        #[arg(long)]
        identity: Option<String>,
        #[arg(long, default_value_t = 0.0)]
        t_min: f64,
        #[arg(long, default_value_t = 1000.0)]
        t_max: f64,
        /// Defaults to the room file's `scenario.frame_rate`, else 30.
        #[arg(long)]
        frame_rate: Option<f64>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Every stage with one configuration.
    Pipeline {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail("E_USAGE", &e.to_string()),
    };
    let exec = if cli.sequential { Execution::Sequential } else { Execution::Parallel };
    match run(cli.command, exec) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e.code(), &e.to_string()),
    }
}

fn fail(code: &str, message: &str) -> ExitCode {
    eprintln!("{}", json!({ "error": code, "message": message.trim() }));
    ExitCode::from(2)
}

fn layered(common: &Common) -> Result<Layered> {
    let mut l = Layered::load(common.config.as_deref())?;
    for s in &common.set {
        l.assign(s)?;
    }
    Ok(l)
}

fn write_all(files: &[(PathBuf, String)]) -> Result<()> {
    for (path, text) in files {
        io::write_text(path, text)?;
    }
    Ok(())
}

fn run(command: Command, exec: Execution) -> Result<()> {
    match command {
        Command::Simulate { common, seed, out_dir } => {
            let cfg = layered(&common)?.into_config()?;
            let scenario = cfg.scenario();
            let (_, rendered) = simulate(&scenario, seed.unwrap_or(scenario.seed), exec)?;
            write_all(&[
                (out_dir.join("detections.jsonl"), io::write_detections(&rendered.frames)),
                (out_dir.join("groundtruth.csv"), io::write_ground_truth(&rendered.ground_truth)),
                (out_dir.join("enrollment.jsonl"), io::write_enrollment(&rendered.enrollment)),
            ])?;
            print_simulation(&rendered);
        }
        Command::Track { common, detections, out, shape_weight, gate, max_lost_frames, min_tracklet_len } => {
            let mut l = layered(&common)?;
            l.set_opt("tracker.shape_weight", shape_weight)?;
            l.set_opt("tracker.gate", gate)?;
            l.set_opt("tracker.max_lost_frames", max_lost_frames.map(to_int))?;
            l.set_opt("tracker.min_tracklet_len", min_tracklet_len.map(to_int))?;
            let cfg = l.into_config()?;
            let frames = io::read_detections(&io::read_text(&detections)?, None)?;
            let (tracklets, throughput) = track(&frames, &cfg.tracker)?;
            io::write_text(&out, &io::write_tracklets(&tracklets))?;
            let dets: usize = frames.iter().map(|f| f.detections.len()).sum();
            println!(
                "tracked {} frames ({dets} detections) into {} tracklets at {:.0} frames/s",
                throughput.frames,
                tracklets.len(),
                throughput.fps()
            );
            println!("FPS: {:.1}", throughput.fps());
        }
        Command::TrainGallery { common, enrollment, out, epochs } => {
            let mut l = layered(&common)?;
            l.set_opt("gallery.epochs", epochs.map(to_int))?;
            let cfg = l.into_config()?;
            let samples = io::read_enrollment(&io::read_text(&enrollment)?)?;
            let gallery = train_gallery(&samples, &cfg.gallery, exec)?;
            io::write_text(&out, &io::write_gallery(&gallery))?;
            println!(
                "trained {} identities on {} samples, training accuracy {:.3}",
                gallery.identities().len(),
                samples.len(),
                gallery.training_accuracy()
            );
        }
        Command::Recover { tracklets, gallery, out_dir } => {
            let tracklets = io::read_tracklets(&io::read_text(&tracklets)?)?;
            let gallery = io::read_gallery(&io::read_text(&gallery)?)?;
            let recovery = recover_trajectories(&tracklets, &gallery, exec)?;
            write_all(&[
                (out_dir.join("trajectories.json"), io::write_trajectories(&recovery.trajectories)),
                (out_dir.join("conflicts.json"), io::write_conflicts(&recovery)),
            ])?;
            println!(
                "{} tracklets into {} trajectories; {} conflicts, {} excluded",
                tracklets.len(),
                recovery.trajectories.len(),
                recovery.conflicts.len(),
                recovery.excluded.len()
            );
        }
        Command::Evaluate { common, groundtruth, predictions, metrics, alphas, out } => {
            let mut l = layered(&common)?;
            l.set_opt("evaluate.metrics", metrics)?;
            l.set_opt("evaluate.alphas", alphas)?;
            let cfg = l.into_config()?;
            let gt: Vec<LabeledBox> =
                io::read_ground_truth(&io::read_text(&groundtruth)?)?.iter().map(LabeledBox::from).collect();
            let (label, seq) = prediction_sequence(&gt, &predictions)?;
            let report = geotrack_core::metrics::evaluate(&seq, &cfg.evaluate.to_config()?, exec)?;
            io::write_text(&out, &io::write_report(&report))?;
            print!("{}", report.to_table(label));
        }
        Command::Imprint { trajectories, room, identity, t_min, t_max, frame_rate, out_dir } => {
            let room_text = io::read_text(&room)?;
            let room_cfg = load_room(&room_text)?;
            let frame_rate = match frame_rate {
                Some(r) => r,
                None => scenario_frame_rate(&room_text).unwrap_or(30.0),
            };
            let mut section = PipelineConfig::default().imprint;
            section.identity = identity;
            section.t_min_s = t_min;
            section.t_max_s = t_max;
            let trajectories = io::read_trajectories(&io::read_text(&trajectories)?)?;
            let (outputs, events) = imprint_trajectories(&trajectories, &room_cfg, &section, frame_rate, exec)?;
            let mut files: Vec<(PathBuf, String)> = outputs
                .iter()
                .map(|o| (out_dir.join(format!("{}.svg", file_stem(&o.identity))), o.svg.clone()))
                .collect();
            files.push((out_dir.join("events.csv"), io::write_events(&events)));
            write_all(&files)?;
            println!("{} imprints, {} proximity events", outputs.len(), events.len());
        }
        Command::Pipeline { common, seed, out_dir } => {
            let cfg = layered(&common)?.into_config()?;
            let run = run_pipeline(&cfg, seed.unwrap_or(cfg.scenario.seed), exec)?;
            let written = run.write(&out_dir)?;
            print_simulation(&run.rendered);
            println!(
                "{} tracklets, {} trajectories, {} conflicts, {} excluded",
                run.tracklets.len(),
                run.recovery.trajectories.len(),
                run.recovery.conflicts.len(),
                run.recovery.excluded.len()
            );
            let fps = Some(run.throughput.fps());
            print!("{}", MetricsReport { fps, ..run.online_report.clone() }.to_table("online"));
            print!("{}", MetricsReport { fps, ..run.report.clone() }.to_table("recovered"));
            println!("FPS: {:.1}", run.throughput.fps());
            println!("wrote {} files to {}", written.len(), out_dir.display());
        }
    }
    Ok(())
}

fn to_int(v: u64) -> i64 {
    i64::try_from(v).unwrap_or(i64::MAX)
}

fn print_simulation(r: &Rendered) {
    let dets: usize = r.frames.iter().map(|f| f.detections.len()).sum();
    println!(
        "simulated {} frames: {dets} detections, {} ground-truth boxes, {} enrollment samples",
        r.frames.len(),
        r.ground_truth.len(),
        r.enrollment.len()
    );
}

/// Reads tracklets or trajectories, whichever the document holds.
fn prediction_sequence(gt: &[LabeledBox], path: &Path) -> Result<(&'static str, EvalSequence)> {
    let text = io::read_text(path)?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Error::Parse { what: path.display().to_string(), message: e.to_string() })?;
    if value.get("trajectories").is_some() {
        Ok(("trajectories", EvalSequence::from_trajectories(gt, &io::read_trajectories(&text)?)?))
    } else if value.get("tracklets").is_some() {
        Ok(("tracklets", EvalSequence::from_tracklets(gt, &io::read_tracklets(&text)?)?))
    } else {
        Err(Error::Schema(format!("{}: expected a tracklets or trajectories document", path.display())))
    }
}

fn scenario_frame_rate(text: &str) -> Option<f64> {
    let table: toml::Table = text.parse().ok()?;
    let rate = table.get("scenario")?.get("frame_rate")?;
    rate.as_float().or_else(|| rate.as_integer().map(|i| i as f64))
}
