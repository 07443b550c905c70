//! Shape cost between multi-view descriptors and descriptor maintenance over
//! time (running average online, temporal max-pooling offline).

use crate::error::{Error, Result};
use crate::model::{normalize_row, MultiViewDescriptor, ViewCompareMode, NUM_VIEWS};

pub fn dot(u: &[f32], v: &[f32]) -> f64 {
    u.iter().zip(v).map(|(&a, &b)| a as f64 * b as f64).sum()
}

/// `1 - <u, v>` for unit vectors, clamped at 0 against rounding.
pub fn cosine_distance(u: &[f32], v: &[f32]) -> f64 {
    (1.0 - dot(u, v)).max(0.0)
}

pub fn multiview_distance(
    a: &MultiViewDescriptor,
    b: &MultiViewDescriptor,
    mode: ViewCompareMode,
) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(a.dim(), b.dim()));
    }
    // rounding would otherwise leave a ~1e-8 self-distance
    if a.as_slice() == b.as_slice() {
        return Ok(0.0);
    }
    Ok(match mode {
        ViewCompareMode::AlignedMean => shifted_mean(a, b, 0),
        ViewCompareMode::MinOverCyclicShifts => {
            (0..NUM_VIEWS).map(|s| shifted_mean(a, b, s)).fold(f64::INFINITY, f64::min)
        }
    })
}

/// Mean cosine distance pairing view `k` of `a` with view `k + shift` of `b`.
fn shifted_mean(a: &MultiViewDescriptor, b: &MultiViewDescriptor, shift: usize) -> f64 {
    let total: f64 = (0..NUM_VIEWS)
        .map(|k| cosine_distance(a.view(k), b.view((k + shift) % NUM_VIEWS)))
        .sum();
    total / NUM_VIEWS as f64
}

/// Result of blending a track descriptor with a new observation.
#[derive(Debug, Clone, PartialEq)]
pub struct EmaUpdate {
    pub descriptor: MultiViewDescriptor,
    /// Views whose blend vanished; those keep the previous track view.
    pub degenerate_views: Vec<usize>,
}

/// Per view: `normalize(alpha * track + (1 - alpha) * det)`.
pub fn ema_update(
    track: &MultiViewDescriptor,
    det: &MultiViewDescriptor,
    alpha: f64,
) -> Result<EmaUpdate> {
    if track.dim() != det.dim() {
        return Err(Error::DimensionMismatch(track.dim(), det.dim()));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidConfig(format!("ema alpha {alpha} outside [0, 1]")));
    }
    if alpha == 1.0 {
        return Ok(EmaUpdate { descriptor: track.clone(), degenerate_views: vec![] });
    }
    if alpha == 0.0 {
        return Ok(EmaUpdate { descriptor: det.clone(), degenerate_views: vec![] });
    }
    let dim = track.dim();
    let mut data = Vec::with_capacity(NUM_VIEWS * dim);
    let mut degenerate_views = Vec::new();
    for k in 0..NUM_VIEWS {
        let (t, d) = (track.view(k), det.view(k));
        let start = data.len();
        data.extend(
            t.iter().zip(d).map(|(&tv, &dv)| (alpha * tv as f64 + (1.0 - alpha) * dv as f64) as f32),
        );
        if normalize_row(&mut data[start..]).is_none() {
            data[start..].copy_from_slice(t);
            degenerate_views.push(k);
        }
    }
    Ok(EmaUpdate { descriptor: MultiViewDescriptor::from_unit_data(data, dim), degenerate_views })
}

/// Elementwise max over time of the raw components, re-normalized per view.
pub fn temporal_max_pool(descs: &[MultiViewDescriptor]) -> Result<MultiViewDescriptor> {
    let first = descs.first().ok_or_else(|| Error::Empty("temporal_max_pool".into()))?;
    let dim = first.dim();
    let mut pooled = first.as_slice().to_vec();
    for d in &descs[1..] {
        if d.dim() != dim {
            return Err(Error::DimensionMismatch(dim, d.dim()));
        }
        for (p, &v) in pooled.iter_mut().zip(d.as_slice()) {
            *p = p.max(v);
        }
    }
    // a view whose max is all zeros can only arise from non-positive inputs
    // summing to zero norm; reject it like any zero view
    MultiViewDescriptor::normalize(pooled, dim)
}
