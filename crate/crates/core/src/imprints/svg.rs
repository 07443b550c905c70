use std::fmt::Write;

use super::{Imprint, RegionKind, RegionOfInterest, TimeRange};

#[derive(Debug, Clone, PartialEq)]
pub struct SvgStyle {
    /// Pixels per metre.
    pub scale: f64,
    pub padding: f64,
    pub stroke_width: f64,
    /// Polylines longer than this are subsampled (endpoints kept).
    pub max_points_per_line: usize,
    pub legend: bool,
}

impl Default for SvgStyle {
    fn default() -> Self {
        Self { scale: 80.0, padding: 24.0, stroke_width: 3.0, max_points_per_line: 400, legend: true }
    }
}

// viridis at 0, 0.25, 0.5, 0.75, 1
const RAMP: [[f64; 3]; 5] = [
    [68.0, 1.0, 84.0],
    [59.0, 82.0, 139.0],
    [33.0, 145.0, 140.0],
    [94.0, 201.0, 98.0],
    [253.0, 231.0, 37.0],
];

fn color(u: f64) -> String {
    let x = u.clamp(0.0, 1.0) * (RAMP.len() - 1) as f64;
    let i = (x.floor() as usize).min(RAMP.len() - 2);
    let w = x - i as f64;
    let c: Vec<u8> = (0..3).map(|k| (RAMP[i][k] + w * (RAMP[i + 1][k] - RAMP[i][k])).round() as u8).collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

struct Frame {
    min: [f64; 2],
    max: [f64; 2],
    scale: f64,
    pad: f64,
}

impl Frame {
    fn x(&self, x: f64) -> f64 {
        self.pad + (x - self.min[0]) * self.scale
    }

    // SVG y grows downward
    fn y(&self, y: f64) -> f64 {
        self.pad + (self.max[1] - y) * self.scale
    }

    fn pt(&self, p: [f64; 2]) -> String {
        format!("{:.2},{:.2}", self.x(p[0]), self.y(p[1]))
    }
}

fn subsample<T: Copy>(items: &[T], max: usize) -> Vec<T> {
    let max = max.max(2);
    if items.len() <= max {
        return items.to_vec();
    }
    let step = (items.len() - 1).div_ceil(max - 1);
    let mut out: Vec<T> = items.iter().step_by(step).copied().collect();
    if !(items.len() - 1).is_multiple_of(step) {
        out.push(items[items.len() - 1]);
    }
    out
}

/// Position of `t` on the color ramp: 0 at the range start, 1 at its end.
pub fn color_parameter(range: &TimeRange, t: f64) -> f64 {
    (t - range.start_s) / (range.end_s - range.start_s).max(f64::MIN_POSITIVE)
}

/// Bird's-eye SVG of one imprint inside the room rectangle `room`
/// (`[min, max]`). Output bytes depend only on the inputs.
pub fn render_svg(imprint: &Imprint, room: [[f64; 2]; 2], rois: &[RegionOfInterest], style: &SvgStyle) -> String {
    let f = Frame { min: room[0], max: room[1], scale: style.scale, pad: style.padding };
    let width = 2.0 * f.pad + (room[1][0] - room[0][0]) * f.scale;
    let legend_h = if style.legend { 56.0 } else { 0.0 };
    let height = 2.0 * f.pad + (room[1][1] - room[0][1]) * f.scale + legend_h;
    let u = |t: f64| color_parameter(&imprint.range, t);

    let mut defs = String::new();
    let mut body = String::new();
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}">"#
    );

    let _ = writeln!(
        body,
        r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#fafafa" stroke="#333333" stroke-width="2"/>"##,
        f.x(room[0][0]),
        f.y(room[1][1]),
        (room[1][0] - room[0][0]) * f.scale,
        (room[1][1] - room[0][1]) * f.scale
    );
    for roi in rois {
        let pts: Vec<String> = roi.polygon().iter().map(|&p| f.pt(p)).collect();
        let pts = pts.join(" ");
        let (fill, border) = match roi.kind() {
            RegionKind::Sterile => ("#4f9fd8", "#1f6fb0"),
            RegionKind::Station => ("#b0b0b0", "#707070"),
            RegionKind::Other => ("#e0c080", "#a08040"),
        };
        if roi.margin() > 0.0 {
            let _ = writeln!(
                body,
                r#"<polygon class="roi-border" points="{pts}" fill="none" stroke="{border}" stroke-opacity="0.25" stroke-width="{:.2}" stroke-linejoin="round"/>"#,
                2.0 * roi.margin() * f.scale
            );
        }
        let _ = writeln!(
            body,
            r#"<polygon class="roi" points="{pts}" fill="{fill}" fill-opacity="0.5" stroke="{border}" stroke-width="1"><title>{}</title></polygon>"#,
            escape(roi.name())
        );
    }

    for (li, line) in imprint.polylines.iter().enumerate() {
        let pts = subsample(&line.points, style.max_points_per_line);
        if pts.len() == 1 {
            let p = pts[0];
            let _ = writeln!(
                body,
                r#"<circle cx="{:.2}" cy="{:.2}" r="{:.2}" fill="{}"/>"#,
                f.x(p.x),
                f.y(p.y),
                style.stroke_width,
                color(u(p.t))
            );
            continue;
        }
        for (si, w) in pts.windows(2).enumerate() {
            let (a, b) = (w[0], w[1]);
            let id = format!("g{li}_{si}");
            let _ = writeln!(
                defs,
                r#"<linearGradient id="{id}" gradientUnits="userSpaceOnUse" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"><stop offset="0" stop-color="{}"/><stop offset="1" stop-color="{}"/></linearGradient>"#,
                f.x(a.x),
                f.y(a.y),
                f.x(b.x),
                f.y(b.y),
                color(u(a.t)),
                color(u(b.t))
            );
            let _ = writeln!(
                body,
                r#"<path class="seg" d="M{} L{}" stroke="url(#{id})" stroke-width="{:.2}" stroke-linecap="round" fill="none"/>"#,
                f.pt([a.x, a.y]),
                f.pt([b.x, b.y]),
                style.stroke_width
            );
        }
    }
    for pair in imprint.polylines.windows(2) {
        let a = pair[0].points[pair[0].points.len() - 1];
        let b = pair[1].points[0];
        let _ = writeln!(
            body,
            r##"<path class="absence" d="M{} L{}" stroke="#888888" stroke-width="1.5" stroke-dasharray="6 4" fill="none"/>"##,
            f.pt([a.x, a.y]),
            f.pt([b.x, b.y])
        );
    }

    if style.legend {
        let y0 = height - legend_h + 8.0;
        let bar_w = (width - 2.0 * f.pad).min(240.0);
        let _ = writeln!(
            defs,
            r#"<linearGradient id="legend-ramp" x1="0" y1="0" x2="1" y2="0">{}</linearGradient>"#,
            (0..RAMP.len())
                .map(|i| {
                    let off = i as f64 / (RAMP.len() - 1) as f64;
                    format!(r#"<stop offset="{off:.2}" stop-color="{}"/>"#, color(off))
                })
                .collect::<String>()
        );
        let _ = writeln!(
            body,
            r##"<g class="legend" font-family="sans-serif" font-size="12" fill="#222222"><text x="{:.2}" y="{:.2}">{}</text><rect x="{:.2}" y="{:.2}" width="{bar_w:.2}" height="10" fill="url(#legend-ramp)"/><text x="{:.2}" y="{:.2}">{:.0} s</text><text x="{:.2}" y="{:.2}" text-anchor="end">{:.0} s</text></g>"##,
            f.pad,
            y0 + 4.0,
            escape(&imprint.identity),
            f.pad,
            y0 + 12.0,
            f.pad,
            y0 + 38.0,
            imprint.range.start_s,
            f.pad + bar_w,
            y0 + 38.0,
            imprint.range.end_s
        );
    }

    let _ = writeln!(s, "<defs>\n{defs}</defs>");
    s.push_str(&body);
    s.push_str("</svg>\n");
    s
}
