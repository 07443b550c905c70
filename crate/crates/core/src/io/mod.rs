//! On-disk formats.
//!
//! * `detections.jsonl`: one object per frame,
//!   `{"t": k, "dets": [{"box": {"c": [x,y,z], "e": [w,d,h]}, "feat": b64, "conf": c}]}`,
//!   where `feat` is base64 of the little-endian `f32` row-major `8 x C` descriptor.
//!   An optional `"src"` carries the simulator's true identity.
//! * `enrollment.jsonl`: `{"identity": name, "feat": b64}` per line.
//! * `groundtruth.csv`: `frame,identity,cx,cy,cz,ex,ey,ez`.
//! * `events.csv`: `roi,identity,enter_s,exit_s,min_dist_m`.
//! * tracklets, trajectories, conflicts, gallery and report documents are JSON
//!   objects carrying `"format_version": 1`; any other version is rejected.

mod documents;
mod frames;
mod tables;

pub use documents::{
    read_conflicts, read_gallery, read_report, read_tracklets, read_trajectories, write_conflicts, write_gallery,
    write_report, write_tracklets, write_trajectories, FORMAT_VERSION,
};
pub use frames::{read_detections, read_enrollment, write_detections, write_enrollment};
pub use tables::{read_events, read_ground_truth, write_events, write_ground_truth};

use std::path::Path;

use base64::engine::general_purpose::STANDARD;
use base64::Engine;

use crate::error::{Error, Result};
use crate::model::{MultiViewDescriptor, NUM_VIEWS};

pub fn read_text(path: impl AsRef<Path>) -> Result<String> {
    std::fs::read_to_string(path.as_ref()).map_err(|e| Error::io(path, e))
}

/// Writes `contents`, creating parent directories.
pub fn write_text(path: impl AsRef<Path>, contents: &str) -> Result<()> {
    let path = path.as_ref();
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub(crate) fn encode_feature(d: &MultiViewDescriptor) -> String {
    let bytes: Vec<u8> = d.as_slice().iter().flat_map(|v| v.to_le_bytes()).collect();
    STANDARD.encode(bytes)
}

/// Decodes a blob; `at` = (frame, index) names the record in errors.
pub(crate) fn decode_feature(blob: &str, dim: Option<usize>, at: (u64, usize)) -> Result<MultiViewDescriptor> {
    let bytes = STANDARD.decode(blob).map_err(|e| Error::Schema(format!("frame {}, detection {}: {e}", at.0, at.1)))?;
    let row_bytes = NUM_VIEWS * 4;
    let expected = match dim {
        Some(d) => d * row_bytes,
        None if !bytes.is_empty() && bytes.len() % row_bytes == 0 => bytes.len(),
        None => (bytes.len() / row_bytes).max(1) * row_bytes,
    };
    if bytes.len() != expected {
        return Err(Error::FeatureLength { frame: at.0, index: at.1, bytes: bytes.len(), expected });
    }
    let raw: Vec<f32> = bytes.chunks_exact(4).map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]])).collect();
    if raw.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("feature of frame {}, detection {}", at.0, at.1)));
    }
    MultiViewDescriptor::normalize(raw, expected / row_bytes)
}

pub(crate) fn check_finite(values: &[f64], what: impl FnOnce() -> String) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what()))
    }
}
