//! Minimal static SVG plots.

use std::fmt::Write as _;
use std::time::{SystemTime, UNIX_EPOCH};

const WIDTH: f64 = 640.0;
const PANEL_HEIGHT: f64 = 400.0;
const MARGIN: f64 = 56.0;
const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

/// Shared header information for every plot.
#[derive(Debug, Clone, Copy)]
pub struct SvgMeta<'a> {
    pub title: &'a str,
    pub manifest_hash: &'a str,
    /// Omits the generation timestamp so reruns are byte-identical.
    pub deterministic: bool,
}

fn color(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn open(meta: &SvgMeta, height: f64) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}">"#
    );
    let _ = writeln!(s, "<!-- manifest_sha256={} -->", meta.manifest_hash);
    if !meta.deterministic {
        let secs = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        let _ = writeln!(s, "<!-- generated unix_time={secs} -->");
    }
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        escape(meta.title)
    );
    s
}

/// Maps a data rectangle onto a pixel rectangle.
struct Frame {
    x: (f64, f64),
    y: (f64, f64),
    left: f64,
    top: f64,
    w: f64,
    h: f64,
}

impl Frame {
    fn new(xs: impl Iterator<Item = f64> + Clone, ys: impl Iterator<Item = f64> + Clone, top: f64, h: f64) -> Self {
        Self {
            x: padded_range(xs),
            y: padded_range(ys),
            left: MARGIN,
            top,
            w: WIDTH - 2.0 * MARGIN,
            h,
        }
    }

    fn px(&self, x: f64) -> f64 {
        self.left + (x - self.x.0) / (self.x.1 - self.x.0) * self.w
    }

    fn py(&self, y: f64) -> f64 {
        self.top + self.h - (y - self.y.0) / (self.y.1 - self.y.0) * self.h
    }

    fn axes(&self, s: &mut String, xlabel: &str, ylabel: &str) {
        let (l, t, r, b) = (self.left, self.top, self.left + self.w, self.top + self.h);
        let _ = writeln!(
            s,
            r##"<rect x="{l:.2}" y="{t:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#444"/>"##,
            self.w, self.h
        );
        let text = |s: &mut String, x: f64, y: f64, anchor: &str, body: String| {
            let _ = writeln!(
                s,
                r#"<text x="{x:.2}" y="{y:.2}" font-family="sans-serif" font-size="11" text-anchor="{anchor}">{body}</text>"#
            );
        };
        text(s, l, b + 14.0, "start", format!("{:.3}", self.x.0));
        text(s, r, b + 14.0, "end", format!("{:.3}", self.x.1));
        text(s, l - 4.0, b, "end", format!("{:.3}", self.y.0));
        text(s, l - 4.0, t + 10.0, "end", format!("{:.3}", self.y.1));
        text(s, (l + r) / 2.0, b + 28.0, "middle", escape(xlabel));
        text(s, l - 4.0, (t + b) / 2.0, "end", escape(ylabel));
    }
}

fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() || !hi.is_finite() {
        return (-1.0, 1.0);
    }
    let span = hi - lo;
    let pad = if span > 0.0 { 0.05 * span } else { 0.5f64.max(0.05 * lo.abs()) };
    (lo - pad, hi + pad)
}

fn legend_label(s: &mut String, x: f64, y: f64, i: usize, label: &str) {
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="10" fill="{}">{}</text>"#,
        x + 5.0,
        y - 5.0,
        color(i),
        escape(label)
    );
}

/// Scatter plot of 2D points, one color per object.
pub fn scatter_2d(points: &[(f64, f64)], labels: &[String], meta: &SvgMeta) -> String {
    let frame = Frame::new(points.iter().map(|p| p.0), points.iter().map(|p| p.1), 40.0, PANEL_HEIGHT - 2.0 * MARGIN);
    let mut s = open(meta, PANEL_HEIGHT);
    frame.axes(&mut s, "dim 1", "dim 2");
    for (i, &(x, y)) in points.iter().enumerate() {
        let (cx, cy) = (frame.px(x), frame.py(y));
        let _ = writeln!(s, r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="4" fill="{}"/>"#, color(i));
        legend_label(&mut s, cx, cy, i, &labels[i]);
    }
    s.push_str("</svg>\n");
    s
}

/// Oblique projection of 3D points: the third coordinate is drawn along a
/// 30° diagonal at half scale.
pub fn scatter_3d(points: &[[f64; 3]], labels: &[String], meta: &SvgMeta) -> String {
    let (c, sn) = (0.5 * 30f64.to_radians().cos(), 0.5 * 30f64.to_radians().sin());
    let projected: Vec<(f64, f64)> = points.iter().map(|p| (p[0] + c * p[2], p[1] + sn * p[2])).collect();
    let frame = Frame::new(
        projected.iter().map(|p| p.0),
        projected.iter().map(|p| p.1),
        40.0,
        PANEL_HEIGHT - 2.0 * MARGIN,
    );
    let mut s = open(meta, PANEL_HEIGHT);
    frame.axes(&mut s, "dim 1 + 0.43 dim 3", "dim 2 + 0.25 dim 3");
    for (i, (p, &(x, y))) in points.iter().zip(&projected).enumerate() {
        let (cx, cy) = (frame.px(x), frame.py(y));
        let (bx, by) = (frame.px(p[0]), frame.py(p[1]));
        let _ = writeln!(
            s,
            r##"<line x1="{bx:.2}" y1="{by:.2}" x2="{cx:.2}" y2="{cy:.2}" stroke="#bbb" stroke-dasharray="2,2"/>"##
        );
        let _ = writeln!(s, r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="4" fill="{}"/>"#, color(i));
        legend_label(&mut s, cx, cy, i, &labels[i]);
    }
    s.push_str("</svg>\n");
    s
}

fn polyline(s: &mut String, frame: &Frame, pts: impl Iterator<Item = (f64, f64)>, i: usize) {
    let coords: Vec<String> = pts.map(|(x, y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y))).collect();
    let _ = writeln!(
        s,
        r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"/>"#,
        coords.join(" "),
        color(i)
    );
}

/// One panel per embedding dimension showing each coordinate against time.
/// `coords[a][i][k]` is coordinate `a` of object `i` at `grid[k]`.
pub fn coordinates_vs_time(grid: &[f64], coords: &[Vec<Vec<f64>>], labels: &[String], meta: &SvgMeta) -> String {
    let panel_h = PANEL_HEIGHT - 2.0 * MARGIN;
    let height = 40.0 + coords.len() as f64 * (panel_h + MARGIN);
    let mut s = open(meta, height);
    for (a, dim) in coords.iter().enumerate() {
        let top = 40.0 + a as f64 * (panel_h + MARGIN);
        let frame = Frame::new(grid.iter().copied(), dim.iter().flatten().copied(), top, panel_h);
        frame.axes(&mut s, "t", &format!("dim {}", a + 1));
        for (i, series) in dim.iter().enumerate() {
            polyline(&mut s, &frame, grid.iter().copied().zip(series.iter().copied()), i);
            if let (Some(&t), Some(&y)) = (grid.last(), series.last()) {
                if a == 0 {
                    legend_label(&mut s, frame.px(t) - 30.0, frame.py(y), i, &labels[i]);
                }
            }
        }
    }
    s.push_str("</svg>\n");
    s
}

/// Planar trajectories, with a dot at each starting point.
pub fn paths_2d(paths: &[Vec<(f64, f64)>], labels: &[String], meta: &SvgMeta) -> String {
    let all = || paths.iter().flatten();
    let frame = Frame::new(all().map(|p| p.0), all().map(|p| p.1), 40.0, PANEL_HEIGHT - 2.0 * MARGIN);
    let mut s = open(meta, PANEL_HEIGHT);
    frame.axes(&mut s, "dim 1", "dim 2");
    for (i, path) in paths.iter().enumerate() {
        polyline(&mut s, &frame, path.iter().copied(), i);
        if let Some(&(x, y)) = path.first() {
            let (cx, cy) = (frame.px(x), frame.py(y));
            let _ = writeln!(s, r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="3" fill="{}"/>"#, color(i));
            legend_label(&mut s, cx, cy, i, &labels[i]);
        }
    }
    s.push_str("</svg>\n");
    s
}
