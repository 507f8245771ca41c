//! Minimal SVG line and scatter plots with optional log axes, stacked in panels.

use std::fmt::Write as _;

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];
const WIDTH: f64 = 640.0;
const PANEL_HEIGHT: f64 = 360.0;
const MARGIN_L: f64 = 80.0;
const MARGIN_R: f64 = 170.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Line,
    Dashed,
    Markers,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub style: Style,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>, style: Style) -> Self {
        Self { label: label.into(), points, style }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
    /// Vertical reference lines `(x, label)`.
    pub vlines: Vec<(f64, String)>,
    /// Horizontal reference lines `(y, label)`.
    pub hlines: Vec<(f64, String)>,
}

impl Plot {
    pub fn new(title: impl Into<String>, x_label: impl Into<String>, y_label: impl Into<String>) -> Self {
        Self { title: title.into(), x_label: x_label.into(), y_label: y_label.into(), ..Default::default() }
    }
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            let v = if log { v.log10() } else { v };
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo < 1e-12 * lo.abs().max(1.0) {
            lo -= 0.5;
            hi += 0.5;
        }
        let pad = 0.03 * (hi - lo);
        Self { lo: lo - pad, hi: hi + pad, log }
    }

    fn fraction(&self, v: f64) -> f64 {
        let v = if self.log { v.log10() } else { v };
        (v - self.lo) / (self.hi - self.lo)
    }

    fn ticks(&self) -> Vec<f64> {
        if self.log {
            let (a, b) = (self.lo.ceil() as i32, self.hi.floor() as i32);
            let step = ((b - a) / 8).max(1);
            return (a..=b).step_by(step as usize).map(|e| 10f64.powi(e)).collect();
        }
        let raw = (self.hi - self.lo) / 5.0;
        let mag = 10f64.powf(raw.log10().floor());
        let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
        let mut t = (self.lo / step).ceil() * step;
        let mut out = Vec::new();
        while t <= self.hi + 1e-9 * step {
            out.push(if t.abs() < 1e-12 * step { 0.0 } else { t });
            t += step;
        }
        out
    }
}

fn tick_label(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.0e}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn usable(p: &(f64, f64), plot: &Plot) -> bool {
    p.0.is_finite() && p.1.is_finite() && (!plot.log_x || p.0 > 0.0) && (!plot.log_y || p.1 > 0.0)
}

fn panel(out: &mut String, plot: &Plot, top: f64) {
    let xs = plot.series.iter().flat_map(|s| s.points.iter()).filter(|p| usable(p, plot)).map(|p| p.0);
    let xs: Vec<f64> = xs.chain(plot.vlines.iter().map(|v| v.0).filter(|v| !plot.log_x || *v > 0.0)).collect();
    let ys = plot.series.iter().flat_map(|s| s.points.iter()).filter(|p| usable(p, plot)).map(|p| p.1);
    let ys: Vec<f64> = ys.chain(plot.hlines.iter().map(|v| v.0).filter(|v| !plot.log_y || *v > 0.0)).collect();
    let ax = Axis::fit(xs.into_iter(), plot.log_x);
    let ay = Axis::fit(ys.into_iter(), plot.log_y);
    let (x0, x1) = (MARGIN_L, WIDTH - MARGIN_R);
    let (y0, y1) = (top + PANEL_HEIGHT - MARGIN_B, top + MARGIN_T);
    let px = |v: f64| x0 + ax.fraction(v) * (x1 - x0);
    let py = |v: f64| y0 + ay.fraction(v) * (y1 - y0);

    writeln!(out, r#"<rect x="{x0:.1}" y="{y1:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="black"/>"#, x1 - x0, y0 - y1).ok();
    writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="14">{}</text>"#, (x0 + x1) / 2.0, top + 22.0, escape(&plot.title)).ok();
    writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="12">{}</text>"#, (x0 + x1) / 2.0, y0 + 38.0, escape(&plot.x_label)).ok();
    writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="12" transform="rotate(-90 {:.1} {:.1})">{}</text>"#,
        x0 - 58.0,
        (y0 + y1) / 2.0,
        x0 - 58.0,
        (y0 + y1) / 2.0,
        escape(&plot.y_label)
    )
    .ok();
    for t in ax.ticks() {
        let x = px(t);
        writeln!(out, r#"<line x1="{x:.1}" y1="{y0:.1}" x2="{x:.1}" y2="{:.1}" stroke="black"/>"#, y0 + 5.0).ok();
        writeln!(out, r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle" font-size="10">{}</text>"#, y0 + 17.0, tick_label(t)).ok();
    }
    for t in ay.ticks() {
        let y = py(t);
        writeln!(out, r#"<line x1="{:.1}" y1="{y:.1}" x2="{x0:.1}" y2="{y:.1}" stroke="black"/>"#, x0 - 5.0).ok();
        writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="end" font-size="10">{}</text>"#, x0 - 8.0, y + 3.0, tick_label(t)).ok();
    }
    for (v, label) in &plot.vlines {
        if plot.log_x && *v <= 0.0 {
            continue;
        }
        let x = px(*v);
        writeln!(out, r##"<line x1="{x:.1}" y1="{y0:.1}" x2="{x:.1}" y2="{y1:.1}" stroke="#555" stroke-dasharray="4 3"/>"##).ok();
        writeln!(out, r##"<text x="{:.1}" y="{:.1}" font-size="10" fill="#555">{}</text>"##, x + 3.0, y1 + 12.0, escape(label)).ok();
    }
    for (v, label) in &plot.hlines {
        if plot.log_y && *v <= 0.0 {
            continue;
        }
        let y = py(*v);
        writeln!(out, r##"<line x1="{x0:.1}" y1="{y:.1}" x2="{x1:.1}" y2="{y:.1}" stroke="#555" stroke-dasharray="4 3"/>"##).ok();
        writeln!(out, r##"<text x="{:.1}" y="{:.1}" font-size="10" fill="#555">{}</text>"##, x0 + 3.0, y - 3.0, escape(label)).ok();
    }
    for (k, s) in plot.series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let pts: Vec<(f64, f64)> = s.points.iter().filter(|p| usable(p, plot)).map(|&(x, y)| (px(x), py(y))).collect();
        match s.style {
            Style::Line | Style::Dashed => {
                if pts.len() > 1 {
                    let path: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.1},{y:.1}")).collect();
                    let dash = if s.style == Style::Dashed { r#" stroke-dasharray="6 4""# } else { "" };
                    writeln!(out, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>"#, path.join(" ")).ok();
                }
            }
            Style::Markers => {
                for (x, y) in &pts {
                    writeln!(out, r#"<circle cx="{x:.1}" cy="{y:.1}" r="3" fill="{color}"/>"#).ok();
                }
            }
        }
        let ly = y1 + 10.0 + 16.0 * k as f64;
        writeln!(out, r#"<rect x="{:.1}" y="{:.1}" width="14" height="3" fill="{color}"/>"#, x1 + 10.0, ly - 4.0).ok();
        writeln!(out, r#"<text x="{:.1}" y="{ly:.1}" font-size="11">{}</text>"#, x1 + 28.0, escape(&s.label)).ok();
    }
}

/// Renders the plots as vertically stacked panels.
pub fn render(plots: &[Plot]) -> String {
    let height = PANEL_HEIGHT * plots.len().max(1) as f64;
    let mut out = String::new();
    writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}">"#).ok();
    writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#).ok();
    for (k, p) in plots.iter().enumerate() {
        panel(&mut out, p, PANEL_HEIGHT * k as f64);
    }
    out.push_str("</svg>\n");
    out
}
