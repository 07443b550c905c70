use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::frames::BoxDto;
use super::{check_finite, decode_feature, encode_feature};
use crate::error::{Error, Result};
use crate::gallery::{GalleryModel, GalleryTrainingConfig, ViewClassifier};
use crate::metrics::MetricsReport;
use crate::model::{Trajectory, Tracklet};
use crate::recovery::{Conflict, Recovery, Resolution};

pub const FORMAT_VERSION: u64 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateDto {
    t: u64,
    c: [f64; 3],
    e: [f64; 3],
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrackletDto {
    tracklet_id: u64,
    track_id: u64,
    states: Vec<StateDto>,
    feats: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrackletsDoc {
    format_version: u64,
    tracklets: Vec<TrackletDto>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrajectoryDto {
    identity: String,
    tracklets: Vec<TrackletDto>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrajectoriesDoc {
    format_version: u64,
    trajectories: Vec<TrajectoryDto>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "lowercase")]
enum ResolutionDto {
    Reassigned(String),
    Excluded,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConflictDto {
    tracklet_id: u64,
    original: String,
    conflicting_with: u64,
    margin: f64,
    resolution: ResolutionDto,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AssignmentDto {
    tracklet_id: u64,
    label: String,
    identity: Option<String>,
    vote_count: usize,
    margin: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConflictsDoc {
    format_version: u64,
    conflicts: Vec<ConflictDto>,
    excluded: Vec<u64>,
    #[serde(default)]
    assignments: Vec<AssignmentDto>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrainingDto {
    regularization: f64,
    epochs: usize,
    seed: u64,
    score_floor: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ViewDto {
    weights: Vec<Vec<f64>>,
    biases: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GalleryDoc {
    format_version: u64,
    identities: Vec<String>,
    dim: usize,
    training_accuracy: f64,
    config: TrainingDto,
    views: Vec<ViewDto>,
}

fn to_json<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("plain data serializes");
    s.push('\n');
    s
}

/// Checks `format_version` before decoding the rest of the document.
fn parse_doc<T: DeserializeOwned>(text: &str, what: &str) -> Result<T> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::parse(what, e))?;
    let version = value
        .get("format_version")
        .ok_or_else(|| Error::Schema(format!("{what}: missing format_version")))?;
    let found = version.as_u64().ok_or_else(|| Error::Schema(format!("{what}: format_version must be an integer")))?;
    if found != FORMAT_VERSION {
        return Err(Error::Version { what: what.into(), found, expected: FORMAT_VERSION });
    }
    serde_json::from_value(value).map_err(|e| Error::Schema(format!("{what}: {e}")))
}

fn tracklet_dto(t: &Tracklet) -> TrackletDto {
    TrackletDto {
        tracklet_id: t.tracklet_id,
        track_id: t.track_id,
        states: t.states().iter().map(|(f, b)| StateDto { t: *f, c: b.center(), e: b.extents() }).collect(),
        feats: t.descriptors().iter().map(encode_feature).collect(),
    }
}

fn tracklet_from(dto: TrackletDto, dim: &mut Option<usize>) -> Result<Tracklet> {
    let id = dto.tracklet_id;
    let states = dto
        .states
        .iter()
        .map(|s| {
            check_finite(&[s.c, s.e].concat(), || format!("tracklet {id} state {}", s.t))?;
            Ok((s.t, BoxDto { c: s.c, e: s.e }.to_box()?))
        })
        .collect::<Result<Vec<_>>>()?;
    let descriptors = dto
        .feats
        .iter()
        .enumerate()
        .map(|(i, blob)| {
            let d = decode_feature(blob, *dim, (dto.states.get(i).map_or(0, |s| s.t), i))?;
            *dim = Some(d.dim());
            Ok(d)
        })
        .collect::<Result<Vec<_>>>()?;
    Tracklet::new(id, dto.track_id, states, descriptors)
}

pub fn write_tracklets(tracklets: &[Tracklet]) -> String {
    to_json(&TrackletsDoc { format_version: FORMAT_VERSION, tracklets: tracklets.iter().map(tracklet_dto).collect() })
}

pub fn read_tracklets(text: &str) -> Result<Vec<Tracklet>> {
    let doc: TrackletsDoc = parse_doc(text, "tracklets")?;
    let mut dim = None;
    doc.tracklets.into_iter().map(|t| tracklet_from(t, &mut dim)).collect()
}

pub fn write_trajectories(trajectories: &[Trajectory]) -> String {
    to_json(&TrajectoriesDoc {
        format_version: FORMAT_VERSION,
        trajectories: trajectories
            .iter()
            .map(|tr| TrajectoryDto {
                identity: tr.identity().to_string(),
                tracklets: tr.tracklets().iter().map(tracklet_dto).collect(),
            })
            .collect(),
    })
}

pub fn read_trajectories(text: &str) -> Result<Vec<Trajectory>> {
    let doc: TrajectoriesDoc = parse_doc(text, "trajectories")?;
    let mut dim = None;
    doc.trajectories
        .into_iter()
        .map(|tr| {
            let tracklets = tr.tracklets.into_iter().map(|t| tracklet_from(t, &mut dim)).collect::<Result<_>>()?;
            Trajectory::new(tr.identity, tracklets)
        })
        .collect()
}

pub fn write_conflicts(recovery: &Recovery) -> String {
    to_json(&ConflictsDoc {
        format_version: FORMAT_VERSION,
        conflicts: recovery
            .conflicts
            .iter()
            .map(|c| ConflictDto {
                tracklet_id: c.tracklet_id,
                original: c.original.clone(),
                conflicting_with: c.conflicting_with,
                margin: c.margin,
                resolution: match &c.resolution {
                    Resolution::Reassigned { identity } => ResolutionDto::Reassigned(identity.clone()),
                    Resolution::Excluded => ResolutionDto::Excluded,
                },
            })
            .collect(),
        excluded: recovery.excluded.clone(),
        assignments: recovery
            .assignments
            .iter()
            .map(|a| AssignmentDto {
                tracklet_id: a.tracklet_id,
                label: a.classification.label.clone(),
                identity: a.identity.clone(),
                vote_count: a.classification.vote_count,
                margin: a.classification.margin,
            })
            .collect(),
    })
}

/// Conflicts and excluded tracklet ids.
pub fn read_conflicts(text: &str) -> Result<(Vec<Conflict>, Vec<u64>)> {
    let doc: ConflictsDoc = parse_doc(text, "conflicts")?;
    let conflicts = doc
        .conflicts
        .into_iter()
        .map(|c| Conflict {
            tracklet_id: c.tracklet_id,
            original: c.original,
            conflicting_with: c.conflicting_with,
            margin: c.margin,
            resolution: match c.resolution {
                ResolutionDto::Reassigned(identity) => Resolution::Reassigned { identity },
                ResolutionDto::Excluded => Resolution::Excluded,
            },
        })
        .collect();
    Ok((conflicts, doc.excluded))
}

pub fn write_gallery(g: &GalleryModel) -> String {
    let c = g.config();
    to_json(&GalleryDoc {
        format_version: FORMAT_VERSION,
        identities: g.identities().to_vec(),
        dim: g.dim(),
        training_accuracy: g.training_accuracy(),
        config: TrainingDto {
            regularization: c.regularization,
            epochs: c.epochs,
            seed: c.seed,
            score_floor: c.score_floor,
        },
        views: g.views().iter().map(|v| ViewDto { weights: v.weights.clone(), biases: v.biases.clone() }).collect(),
    })
}

pub fn read_gallery(text: &str) -> Result<GalleryModel> {
    let doc: GalleryDoc = parse_doc(text, "gallery")?;
    let config = GalleryTrainingConfig {
        regularization: doc.config.regularization,
        epochs: doc.config.epochs,
        seed: doc.config.seed,
        score_floor: doc.config.score_floor,
    };
    let views = doc.views.into_iter().map(|v| ViewClassifier { weights: v.weights, biases: v.biases }).collect();
    GalleryModel::from_parts(doc.identities, doc.dim, views, config, doc.training_accuracy)
}

pub fn write_report(report: &MetricsReport) -> String {
    to_json(&report.to_json())
}

/// Version-checked report document as raw JSON.
pub fn read_report(text: &str) -> Result<Value> {
    parse_doc(text, "report")
}
