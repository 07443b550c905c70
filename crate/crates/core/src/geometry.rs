//! Exact axis-aligned 3D box algebra used by the spatial cost and the metrics.

use crate::model::BoundingBox3D;

pub fn volume(b: &BoundingBox3D) -> f64 {
    let e = b.extents();
    e[0] * e[1] * e[2]
}

/// Overlap length on each axis, clamped at zero.
fn overlap_lengths(a: &BoundingBox3D, b: &BoundingBox3D) -> [f64; 3] {
    let (amin, amax, bmin, bmax) = (a.min(), a.max(), b.min(), b.max());
    [0, 1, 2].map(|k| (amax[k].min(bmax[k]) - amin[k].max(bmin[k])).max(0.0))
}

pub fn intersection_volume(a: &BoundingBox3D, b: &BoundingBox3D) -> f64 {
    let o = overlap_lengths(a, b);
    o[0] * o[1] * o[2]
}

/// Smallest axis-aligned box containing both inputs.
pub fn enclosing_box(a: &BoundingBox3D, b: &BoundingBox3D) -> BoundingBox3D {
    let (amin, amax, bmin, bmax) = (a.min(), a.max(), b.min(), b.max());
    let min = [0, 1, 2].map(|k| amin[k].min(bmin[k]));
    let max = [0, 1, 2].map(|k| amax[k].max(bmax[k]));
    BoundingBox3D::from_min_max(min, max).expect("hull of valid boxes is valid")
}

fn hull_volume(a: &BoundingBox3D, b: &BoundingBox3D) -> f64 {
    let (amin, amax, bmin, bmax) = (a.min(), a.max(), b.min(), b.max());
    let len = [0, 1, 2].map(|k| amax[k].max(bmax[k]) - amin[k].min(bmin[k]));
    len[0] * len[1] * len[2]
}

struct Volumes {
    intersection: f64,
    union: f64,
    hull: f64,
}

fn volumes(a: &BoundingBox3D, b: &BoundingBox3D) -> Volumes {
    let intersection = intersection_volume(a, b);
    let union = volume(a) + volume(b) - intersection;
    // the hull always contains the union; clamp away rounding noise
    let hull = hull_volume(a, b).max(union);
    Volumes { intersection, union, hull }
}

pub fn iou3d(a: &BoundingBox3D, b: &BoundingBox3D) -> f64 {
    if a == b {
        return 1.0;
    }
    let v = volumes(a, b);
    v.intersection / v.union
}

/// Generalized IoU: `IoU - (|hull| - |union|) / |hull|`, in (-1, 1].
pub fn giou3d(a: &BoundingBox3D, b: &BoundingBox3D) -> f64 {
    if a == b {
        return 1.0;
    }
    let v = volumes(a, b);
    v.intersection / v.union - (v.hull - v.union) / v.hull
}

/// `(1 - GIoU) / 2`, mapping GIoU onto a cost in [0, 1).
pub fn spatial_cost(a: &BoundingBox3D, b: &BoundingBox3D) -> f64 {
    (1.0 - giou3d(a, b)) / 2.0
}
