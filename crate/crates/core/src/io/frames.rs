use serde::{Deserialize, Serialize};

use super::{check_finite, decode_feature, encode_feature};
use crate::error::{Error, Result};
use crate::model::{BoundingBox3D, Detection, Frame, MultiViewDescriptor};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct BoxDto {
    pub c: [f64; 3],
    pub e: [f64; 3],
}

impl BoxDto {
    pub fn from_box(b: &BoundingBox3D) -> Self {
        Self { c: b.center(), e: b.extents() }
    }

    pub fn to_box(&self) -> Result<BoundingBox3D> {
        BoundingBox3D::new(self.c, self.e)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DetDto {
    #[serde(rename = "box")]
    bbox: BoxDto,
    feat: String,
    conf: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    src: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FrameDto {
    t: u64,
    dets: Vec<DetDto>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EnrollDto {
    identity: String,
    feat: String,
}

pub fn write_detections(frames: &[Frame]) -> String {
    let mut out = String::new();
    for f in frames {
        let dto = FrameDto {
            t: f.index,
            dets: f
                .detections
                .iter()
                .map(|d| DetDto {
                    bbox: BoxDto::from_box(&d.bbox),
                    feat: encode_feature(&d.descriptor),
                    conf: d.confidence,
                    src: d.source_id.clone(),
                })
                .collect(),
        };
        out.push_str(&serde_json::to_string(&dto).expect("plain data serializes"));
        out.push('\n');
    }
    out
}

/// Parses detection lines. The descriptor dimension is taken from the
/// first blob (or `dim` when given) and enforced on every other one.
pub fn read_detections(text: &str, dim: Option<usize>) -> Result<Vec<Frame>> {
    let mut dim = dim;
    let mut frames = Vec::new();
    for (line_no, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let dto: FrameDto = serde_json::from_str(line)
            .map_err(|e| Error::Schema(format!("detections line {}: {e}", line_no + 1)))?;
        let mut detections = Vec::with_capacity(dto.dets.len());
        for (i, d) in dto.dets.into_iter().enumerate() {
            check_finite(&[d.bbox.c, d.bbox.e].concat(), || format!("box of frame {}, detection {i}", dto.t))?;
            let descriptor = decode_feature(&d.feat, dim, (dto.t, i))?;
            dim = Some(descriptor.dim());
            let mut det = Detection::new(dto.t, d.bbox.to_box()?, descriptor).with_confidence(d.conf)?;
            det.source_id = d.src;
            detections.push(det);
        }
        frames.push(Frame { index: dto.t, detections });
    }
    Ok(frames)
}

pub fn write_enrollment(samples: &[(MultiViewDescriptor, String)]) -> String {
    let mut out = String::new();
    for (d, identity) in samples {
        let dto = EnrollDto { identity: identity.clone(), feat: encode_feature(d) };
        out.push_str(&serde_json::to_string(&dto).expect("plain data serializes"));
        out.push('\n');
    }
    out
}

pub fn read_enrollment(text: &str) -> Result<Vec<(MultiViewDescriptor, String)>> {
    let mut dim = None;
    let mut out = Vec::new();
    for (line_no, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let dto: EnrollDto = serde_json::from_str(line)
            .map_err(|e| Error::Schema(format!("enrollment line {}: {e}", line_no + 1)))?;
        if dto.identity.is_empty() {
            return Err(Error::Schema(format!("enrollment line {}: empty identity", line_no + 1)));
        }
        let d = decode_feature(&dto.feat, dim, (line_no as u64, 0))?;
        dim = Some(d.dim());
        out.push((d, dto.identity));
    }
    Ok(out)
}
