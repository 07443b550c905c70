use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The 12-inch border kept around sterile fields, in metres.
pub const STERILE_BORDER_M: f64 = 0.3048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum RegionKind {
    Sterile,
    Station,
    #[default]
    Other,
}

impl RegionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RegionKind::Sterile => "sterile",
            RegionKind::Station => "station",
            RegionKind::Other => "other",
        }
    }
}

/// A simple polygon in the X-Y plane plus a proximity margin.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionOfInterest {
    name: String,
    polygon: Vec<[f64; 2]>,
    margin: f64,
    kind: RegionKind,
}

impl RegionOfInterest {
    pub fn new(name: impl Into<String>, polygon: Vec<[f64; 2]>, margin: f64, kind: RegionKind) -> Result<Self> {
        let name = name.into();
        let bad = |reason: &str| Error::InvalidRegion { name: name.clone(), reason: reason.into() };
        if polygon.len() < 3 {
            return Err(bad("need at least 3 vertices"));
        }
        if polygon.iter().flatten().any(|v| !v.is_finite()) {
            return Err(bad("non-finite vertex"));
        }
        if !(margin >= 0.0 && margin.is_finite()) {
            return Err(bad("margin must be finite and >= 0"));
        }
        if signed_area(&polygon) == 0.0 {
            return Err(bad("zero area"));
        }
        if !is_simple(&polygon) {
            return Err(bad("polygon self-intersects"));
        }
        Ok(Self { name, polygon, margin, kind })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn polygon(&self) -> &[[f64; 2]] {
        &self.polygon
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    pub fn kind(&self) -> RegionKind {
        self.kind
    }

    /// Distance to the polygon; zero inside.
    pub fn distance(&self, p: [f64; 2]) -> f64 {
        distance_to_polygon(p, &self.polygon)
    }

    /// Whether `p` lies in the polygon expanded by the margin.
    pub fn contains_expanded(&self, p: [f64; 2]) -> bool {
        self.distance(p) <= self.margin
    }
}

fn edges(poly: &[[f64; 2]]) -> impl Iterator<Item = ([f64; 2], [f64; 2])> + '_ {
    (0..poly.len()).map(move |i| (poly[i], poly[(i + 1) % poly.len()]))
}

fn signed_area(poly: &[[f64; 2]]) -> f64 {
    edges(poly).map(|(a, b)| a[0] * b[1] - b[0] * a[1]).sum::<f64>() / 2.0
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn on_segment(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> bool {
    p[0] >= a[0].min(b[0]) && p[0] <= a[0].max(b[0]) && p[1] >= a[1].min(b[1]) && p[1] <= a[1].max(b[1])
}

/// Closed-segment intersection, touching included.
fn segments_intersect(p1: [f64; 2], p2: [f64; 2], q1: [f64; 2], q2: [f64; 2]) -> bool {
    let d1 = cross(q1, q2, p1);
    let d2 = cross(q1, q2, p2);
    let d3 = cross(p1, p2, q1);
    let d4 = cross(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment(p1, q1, q2))
        || (d2 == 0.0 && on_segment(p2, q1, q2))
        || (d3 == 0.0 && on_segment(q1, p1, p2))
        || (d4 == 0.0 && on_segment(q2, p1, p2))
}

fn is_simple(poly: &[[f64; 2]]) -> bool {
    let n = poly.len();
    for i in 0..n {
        for j in i + 1..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            let (c, d) = (poly[j], poly[(j + 1) % n]);
            if adjacent {
                // adjacent edges may only share their common vertex
                let collinear_back = cross(a, b, if j == i + 1 { d } else { c }) == 0.0;
                if collinear_back && a != b && c != d {
                    let (shared, other_a, other_b) =
                        if j == i + 1 { (b, a, d) } else { (a, b, c) };
                    let va = [other_a[0] - shared[0], other_a[1] - shared[1]];
                    let vb = [other_b[0] - shared[0], other_b[1] - shared[1]];
                    if va[0] * vb[0] + va[1] * vb[1] > 0.0 {
                        return false;
                    }
                }
                continue;
            }
            if segments_intersect(a, b, c, d) {
                return false;
            }
        }
    }
    true
}

/// Even-odd ray cast; boundary points are resolved by the distance test.
fn inside(p: [f64; 2], poly: &[[f64; 2]]) -> bool {
    let mut odd = false;
    for (a, b) in edges(poly) {
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
            if p[0] < x {
                odd = !odd;
            }
        }
    }
    odd
}

pub(crate) fn segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let t = if len2 == 0.0 { 0.0 } else { (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0) };
    (p[0] - a[0] - t * d[0]).hypot(p[1] - a[1] - t * d[1])
}

pub fn distance_to_polygon(p: [f64; 2], poly: &[[f64; 2]]) -> f64 {
    if inside(p, poly) {
        return 0.0;
    }
    edges(poly).map(|(a, b)| segment_distance(p, a, b)).fold(f64::INFINITY, f64::min)
}
