//! Shared domain vocabulary: boxes, multi-view descriptors, detections,
//! tracklets, trajectories and the association configuration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of virtual viewpoints a descriptor is rendered from.
pub const NUM_VIEWS: usize = 8;

/// Default feature dimension per view.
pub const DEFAULT_FEATURE_DIM: usize = 128;

/// Rows whose norm is already within this distance of 1 are left untouched,
/// which makes normalization bitwise idempotent.
const UNIT_NORM_TOLERANCE: f64 = 1e-6;

pub type Vec3 = [f64; 3];

/// Axis-aligned 3D box given by its center and full side lengths, in metres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox3D {
    center: Vec3,
    extents: Vec3,
}

impl BoundingBox3D {
    pub fn new(center: Vec3, extents: Vec3) -> Result<Self> {
        if center.iter().chain(extents.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("bounding box".into()));
        }
        if extents.iter().any(|&e| e <= 0.0) {
            return Err(Error::InvalidBox(format!("extents must be positive, got {extents:?}")));
        }
        Ok(Self { center, extents })
    }

    /// Box spanning `[min, max]` on every axis.
    pub fn from_min_max(min: Vec3, max: Vec3) -> Result<Self> {
        let center = [0, 1, 2].map(|k| 0.5 * (min[k] + max[k]));
        let extents = [0, 1, 2].map(|k| max[k] - min[k]);
        Self::new(center, extents)
    }

    pub fn center(&self) -> Vec3 {
        self.center
    }

    pub fn extents(&self) -> Vec3 {
        self.extents
    }

    pub fn min(&self) -> Vec3 {
        [0, 1, 2].map(|k| self.center[k] - 0.5 * self.extents[k])
    }

    pub fn max(&self) -> Vec3 {
        [0, 1, 2].map(|k| self.center[k] + 0.5 * self.extents[k])
    }

    /// Same extents, new center.
    pub fn with_center(&self, center: Vec3) -> Result<Self> {
        Self::new(center, self.extents)
    }

    pub fn translated(&self, offset: Vec3) -> Result<Self> {
        Self::new([0, 1, 2].map(|k| self.center[k] + offset[k]), self.extents)
    }

    /// Scales both center and extents about the origin.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        Self::new(self.center.map(|c| c * s), self.extents.map(|e| e * s))
    }
}

/// Eight unit-norm view vectors of dimension `dim`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiViewDescriptor {
    dim: usize,
    data: Vec<f32>,
}

impl MultiViewDescriptor {
    /// L2-normalizes each of the eight views of a row-major `8 x dim` array.
    ///
    /// Rows that are already unit-norm (within 1e-6) are kept bit-for-bit,
    /// so `normalize(normalize(x)) == normalize(x)`.
    pub fn normalize(raw: Vec<f32>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DescriptorShape { expected: NUM_VIEWS, got: raw.len() });
        }
        if raw.len() != NUM_VIEWS * dim {
            return Err(Error::DescriptorShape { expected: NUM_VIEWS * dim, got: raw.len() });
        }
        if raw.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("descriptor".into()));
        }
        let mut data = raw;
        for (view, row) in data.chunks_exact_mut(dim).enumerate() {
            normalize_row(row).ok_or(Error::ZeroNormView { view })?;
        }
        Ok(Self { dim, data })
    }

    /// Builds a descriptor from eight rows of equal length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.len() != NUM_VIEWS {
            return Err(Error::DescriptorShape { expected: NUM_VIEWS, got: rows.len() });
        }
        let dim = rows[0].len();
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch(dim, bad.len()));
        }
        Self::normalize(rows.iter().flatten().map(|&v| v as f32).collect(), dim)
    }

    /// Wraps data known to be unit-norm per view (checked in debug builds).
    pub(crate) fn from_unit_data(data: Vec<f32>, dim: usize) -> Self {
        debug_assert_eq!(data.len(), NUM_VIEWS * dim);
        debug_assert!(data
            .chunks_exact(dim)
            .all(|r| (row_norm(r) - 1.0).abs() <= UNIT_NORM_TOLERANCE));
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn view(&self, k: usize) -> &[f32] {
        &self.data[k * self.dim..(k + 1) * self.dim]
    }

    pub fn views(&self) -> impl Iterator<Item = &[f32]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }
}

pub(crate) fn row_norm(row: &[f32]) -> f64 {
    row.iter().map(|&v| (v as f64) * (v as f64)).sum::<f64>().sqrt()
}

/// Normalizes `row` in place. Returns `None` for an all-zero row.
pub(crate) fn normalize_row(row: &mut [f32]) -> Option<()> {
    let norm = row_norm(row);
    if norm == 0.0 {
        return None;
    }
    if (norm - 1.0).abs() > UNIT_NORM_TOLERANCE {
        for v in row.iter_mut() {
            *v = (*v as f64 / norm) as f32;
        }
    }
    Some(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub frame: u64,
    pub bbox: BoundingBox3D,
    pub descriptor: MultiViewDescriptor,
    pub confidence: f64,
    /// Opaque provenance tag (the simulator writes the true identity here).
    pub source_id: Option<String>,
}

impl Detection {
    pub fn new(frame: u64, bbox: BoundingBox3D, descriptor: MultiViewDescriptor) -> Self {
        Self { frame, bbox, descriptor, confidence: 1.0, source_id: None }
    }

    pub fn with_confidence(mut self, confidence: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&confidence) {
            return Err(Error::InvalidConfig(format!("confidence {confidence} outside [0, 1]")));
        }
        self.confidence = confidence;
        Ok(self)
    }

    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.source_id = Some(source.into());
        self
    }
}

/// All detections observed at one frame.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Frame {
    pub index: u64,
    pub detections: Vec<Detection>,
}

/// One continuous appearance of a tracked object.
#[derive(Debug, Clone, PartialEq)]
pub struct Tracklet {
    pub tracklet_id: u64,
    /// Id of the online track that produced this tracklet.
    pub track_id: u64,
    states: Vec<(u64, BoundingBox3D)>,
    descriptors: Vec<MultiViewDescriptor>,
}

impl Tracklet {
    pub fn new(
        tracklet_id: u64,
        track_id: u64,
        states: Vec<(u64, BoundingBox3D)>,
        descriptors: Vec<MultiViewDescriptor>,
    ) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::InvalidTracklet(format!("tracklet {tracklet_id} has no states")));
        }
        if states.len() != descriptors.len() {
            return Err(Error::InvalidTracklet(format!(
                "tracklet {tracklet_id}: {} states but {} descriptors",
                states.len(),
                descriptors.len()
            )));
        }
        if states.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::InvalidTracklet(format!(
                "tracklet {tracklet_id}: state frames not strictly increasing"
            )));
        }
        let dim = descriptors[0].dim();
        if let Some(d) = descriptors.iter().find(|d| d.dim() != dim) {
            return Err(Error::DimensionMismatch(dim, d.dim()));
        }
        Ok(Self { tracklet_id, track_id, states, descriptors })
    }

    pub fn begin(&self) -> u64 {
        self.states[0].0
    }

    pub fn end(&self) -> u64 {
        self.states[self.states.len() - 1].0
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[(u64, BoundingBox3D)] {
        &self.states
    }

    pub fn descriptors(&self) -> &[MultiViewDescriptor] {
        &self.descriptors
    }

    /// True when the frame ranges `[begin, end]` intersect.
    pub fn overlaps(&self, other: &Tracklet) -> bool {
        self.begin() <= other.end() && other.begin() <= self.end()
    }
}

/// The complete history of one identity: non-overlapping tracklets sorted by begin frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    identity: String,
    tracklets: Vec<Tracklet>,
}

impl Trajectory {
    pub fn new(identity: impl Into<String>, mut tracklets: Vec<Tracklet>) -> Result<Self> {
        let identity = identity.into();
        if tracklets.is_empty() {
            return Err(Error::InvalidTrajectory(format!("'{identity}' has no tracklets")));
        }
        tracklets.sort_by_key(|t| (t.begin(), t.tracklet_id));
        if let Some(w) = tracklets.windows(2).find(|w| w[0].end() >= w[1].begin()) {
            return Err(Error::InvalidTrajectory(format!(
                "'{identity}': tracklets {} and {} overlap",
                w[0].tracklet_id, w[1].tracklet_id
            )));
        }
        Ok(Self { identity, tracklets })
    }

    pub fn identity(&self) -> &str {
        &self.identity
    }

    pub fn tracklets(&self) -> &[Tracklet] {
        &self.tracklets
    }

    pub fn begin(&self) -> u64 {
        self.tracklets[0].begin()
    }

    pub fn end(&self) -> u64 {
        self.tracklets[self.tracklets.len() - 1].end()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViewCompareMode {
    #[default]
    AlignedMean,
    MinOverCyclicShifts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MotionPrediction {
    #[default]
    Off,
    ConstantVelocity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AssociationConfig {
    /// Weight of the shape cost; the spatial cost gets `1 - shape_weight`.
    pub shape_weight: f64,
    /// Matches costing more than this are discarded.
    pub gate: f64,
    /// Weight of the previous track descriptor in the running average.
    pub ema_alpha: f64,
    /// Frames a lost track stays matchable before it is retired.
    pub max_lost_frames: u64,
    /// Frames after which a lost track is matched on shape cost only.
    pub lost_spatial_horizon: u64,
    pub view_compare_mode: ViewCompareMode,
    pub motion_prediction: MotionPrediction,
    /// Tracklets shorter than this are dropped from the output.
    pub min_tracklet_len: usize,
}

impl Default for AssociationConfig {
    fn default() -> Self {
        Self {
            shape_weight: 0.5,
            gate: 0.7,
            ema_alpha: 0.9,
            max_lost_frames: 150,
            lost_spatial_horizon: 15,
            view_compare_mode: ViewCompareMode::AlignedMean,
            motion_prediction: MotionPrediction::Off,
            min_tracklet_len: 3,
        }
    }
}

impl AssociationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.shape_weight) {
            return Err(Error::InvalidConfig(format!(
                "shape_weight {} outside [0, 1]",
                self.shape_weight
            )));
        }
        // gamma = 0 is accepted as the degenerate "never associate" setting
        if !(self.gate >= 0.0 && self.gate.is_finite()) {
            return Err(Error::InvalidConfig(format!("gate {} must be finite and >= 0", self.gate)));
        }
        if !(0.0..=1.0).contains(&self.ema_alpha) {
            return Err(Error::InvalidConfig(format!("ema_alpha {} outside [0, 1]", self.ema_alpha)));
        }
        if self.min_tracklet_len == 0 {
            return Err(Error::InvalidConfig("min_tracklet_len must be >= 1".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_box() -> BoundingBox3D {
        BoundingBox3D::new([0.5; 3], [1.0; 3]).unwrap()
    }

    fn desc_with_first_row(first: &[f32]) -> Vec<f32> {
        let dim = first.len();
        let mut raw = vec![0.0f32; NUM_VIEWS * dim];
        for k in 0..NUM_VIEWS {
            raw[k * dim..(k + 1) * dim].copy_from_slice(first);
        }
        raw
    }

    #[test]
    fn normalize_three_four_row() {
        let mut first = vec![0.0f32; 4];
        first[0] = 3.0;
        first[1] = 4.0;
        let d = MultiViewDescriptor::normalize(desc_with_first_row(&first), 4).unwrap();
        assert_eq!(d.view(0), &[0.6f32, 0.8, 0.0, 0.0]);
        assert_eq!(d.view(7), &[0.6f32, 0.8, 0.0, 0.0]);
    }

    #[test]
    fn normalize_keeps_unit_rows() {
        let raw = desc_with_first_row(&[0.0, 1.0, 0.0]);
        let d = MultiViewDescriptor::normalize(raw.clone(), 3).unwrap();
        assert_eq!(d.as_slice(), raw.as_slice());
    }

    #[test]
    fn normalize_rejects_zero_row_and_nan() {
        let mut raw = desc_with_first_row(&[1.0, 2.0]);
        raw[6] = 0.0;
        raw[7] = 0.0;
        let err = MultiViewDescriptor::normalize(raw, 2).unwrap_err();
        assert!(matches!(err, Error::ZeroNormView { view: 3 }));
        assert_eq!(err.to_string(), "zero-norm view 3");

        let mut raw = desc_with_first_row(&[1.0, 2.0]);
        raw[0] = f32::NAN;
        assert!(matches!(MultiViewDescriptor::normalize(raw, 2), Err(Error::NonFinite(_))));
        assert!(MultiViewDescriptor::normalize(vec![1.0; 15], 2).is_err());
    }

    #[test]
    fn box_invariants() {
        assert!(BoundingBox3D::new([0.0; 3], [1.0, 0.0, 1.0]).is_err());
        assert!(BoundingBox3D::new([f64::NAN, 0.0, 0.0], [1.0; 3]).is_err());
        let b = BoundingBox3D::from_min_max([0.0; 3], [2.0, 3.0, 4.0]).unwrap();
        assert_eq!(b.center(), [1.0, 1.5, 2.0]);
        assert_eq!(b.min(), [0.0; 3]);
    }

    #[test]
    fn tracklet_rejects_unordered_frames() {
        let d = MultiViewDescriptor::normalize(desc_with_first_row(&[1.0]), 1).unwrap();
        let states = vec![(3, unit_box()), (3, unit_box())];
        assert!(Tracklet::new(0, 0, states, vec![d.clone(), d.clone()]).is_err());
        let states = vec![(3, unit_box()), (5, unit_box())];
        let t = Tracklet::new(0, 0, states, vec![d.clone(), d]).unwrap();
        assert_eq!((t.begin(), t.end(), t.len()), (3, 5, 2));
    }

    #[test]
    fn trajectory_rejects_overlap_and_sorts() {
        let d = MultiViewDescriptor::normalize(desc_with_first_row(&[1.0]), 1).unwrap();
        let mk = |id, frames: &[u64]| {
            Tracklet::new(
                id,
                id,
                frames.iter().map(|&f| (f, unit_box())).collect(),
                vec![d.clone(); frames.len()],
            )
            .unwrap()
        };
        let traj = Trajectory::new("A", vec![mk(2, &[20, 30]), mk(1, &[0, 10])]).unwrap();
        assert_eq!(traj.tracklets()[0].tracklet_id, 1);
        assert!(Trajectory::new("A", vec![mk(1, &[0, 10]), mk(2, &[10, 12])]).is_err());
        assert!(Trajectory::new("A", vec![]).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(AssociationConfig::default().validate().is_ok());
        let cfg = AssociationConfig { shape_weight: 1.5, ..Default::default() };
        assert!(cfg.validate().is_err());
        let cfg = AssociationConfig { gate: f64::NAN, ..Default::default() };
        assert!(cfg.validate().is_err());
    }
}
