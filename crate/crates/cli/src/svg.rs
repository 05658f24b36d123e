//! Minimal hand-written SVG: line plots and heat maps.
//!
//! Data coordinates map linearly onto the plot area,
//! `px = left + (x − x_min)/(x_max − x_min)·width` and
//! `py = top + height − (y − y_min)/(y_max − y_min)·height`, so larger y is
//! drawn higher. A degenerate range is widened by ±0.5 (or ±0.5·|v|) before
//! mapping. Heat-map cells are coloured with a 256-step ramp from blue
//! (`rgb(0,0,255)`, lowest value) to red (`rgb(255,0,0)`, highest), level
//! `round(255·(v − v_min)/(v_max − v_min))`.

use std::fmt::Write as _;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

/// Heat maps with more rows than this are thinned to every k-th row.
const MAX_ROWS: usize = 400;

#[derive(Debug, Clone, PartialEq)]
pub enum SvgError {
    Empty(String),
    NonFinite(String),
    Shape(String),
}

impl std::fmt::Display for SvgError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SvgError::Empty(m) => write!(f, "nothing to plot: {m}"),
            SvgError::NonFinite(m) => write!(f, "non-finite value in {m}"),
            SvgError::Shape(m) => write!(f, "mismatched plot data: {m}"),
        }
    }
}

impl std::error::Error for SvgError {}

type Result<T> = std::result::Result<T, SvgError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Line,
    Points,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub style: Style,
}

impl Series {
    pub fn line(name: &str, x: Vec<f64>, y: Vec<f64>) -> Self {
        Self { name: name.into(), x, y, style: Style::Line }
    }

    pub fn points(name: &str, x: Vec<f64>, y: Vec<f64>) -> Self {
        Self { name: name.into(), x, y, style: Style::Points }
    }

    fn check(&self) -> Result<()> {
        if self.x.len() != self.y.len() {
            return Err(SvgError::Shape(format!("series '{}' has {} x and {} y values", self.name, self.x.len(), self.y.len())));
        }
        if self.x.is_empty() {
            return Err(SvgError::Empty(format!("series '{}'", self.name)));
        }
        if self.x.iter().chain(&self.y).any(|v| !v.is_finite()) {
            return Err(SvgError::NonFinite(format!("series '{}'", self.name)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default)]
pub struct Axes {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transform {
    x: (f64, f64),
    y: (f64, f64),
}

fn widen((lo, hi): (f64, f64)) -> (f64, f64) {
    if hi > lo {
        (lo, hi)
    } else {
        let pad = if lo == 0.0 { 0.5 } else { 0.5 * lo.abs() };
        (lo - pad, hi + pad)
    }
}

fn extent<'a>(values: impl Iterator<Item = &'a f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

impl Transform {
    pub fn new(x: (f64, f64), y: (f64, f64)) -> Self {
        Self { x: widen(x), y: widen(y) }
    }

    pub fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - LEFT - RIGHT)
    }

    pub fn py(&self, y: f64) -> f64 {
        TOP + (HEIGHT - TOP - BOTTOM) - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - TOP - BOTTOM)
    }
}

/// Ramp colour for a value normalized to `[0, 1]`.
pub fn ramp(level: f64) -> (u8, u8, u8) {
    let i = (255.0 * level.clamp(0.0, 1.0)).round() as u8;
    (i, 0, 255 - i)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Up to about six round tick values covering `[lo, hi]`.
fn ticks((lo, hi): (f64, f64)) -> Vec<f64> {
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn label(v: f64) -> String {
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

fn header(out: &mut String, axes: &Axes, t: &Transform) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(&axes.title));
    let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, TOP, HEIGHT - BOTTOM);
    for v in ticks(t.x) {
        let p = t.px(v);
        let _ = writeln!(out, r#"<line x1="{p:.2}" y1="{y1}" x2="{p:.2}" y2="{}" stroke="black"/>"#, y1 + 5.0);
        let _ = writeln!(out, r#"<text x="{p:.2}" y="{}" text-anchor="middle">{}</text>"#, y1 + 18.0, label(v));
    }
    for v in ticks(t.y) {
        let p = t.py(v);
        let _ = writeln!(out, r#"<line x1="{}" y1="{p:.2}" x2="{x0}" y2="{p:.2}" stroke="black"/>"#, x0 - 5.0);
        let _ = writeln!(out, r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#, x0 - 8.0, p + 4.0, label(v));
    }
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, (x0 + x1) / 2.0, HEIGHT - 20.0, escape(&axes.x_label));
    let _ = writeln!(
        out,
        r#"<text x="20" y="{0}" text-anchor="middle" transform="rotate(-90 20 {0})">{1}</text>"#,
        (y0 + y1) / 2.0,
        escape(&axes.y_label)
    );
}

fn frame(out: &mut String) {
    let _ = writeln!(
        out,
        r#"<rect x="{LEFT}" y="{TOP}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - LEFT - RIGHT,
        HEIGHT - TOP - BOTTOM
    );
}

fn draw_series(out: &mut String, t: &Transform, series: &[Series]) {
    for (i, s) in series.iter().enumerate() {
        let colour = PALETTE[i % PALETTE.len()];
        match s.style {
            Style::Line => {
                let pts: Vec<String> = s.x.iter().zip(&s.y).map(|(x, y)| format!("{:.2},{:.2}", t.px(*x), t.py(*y))).collect();
                let _ = writeln!(out, r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#, pts.join(" "));
            }
            Style::Points => {
                for (x, y) in s.x.iter().zip(&s.y) {
                    let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{colour}"/>"#, t.px(*x), t.py(*y));
                }
            }
        }
    }
    for (i, s) in series.iter().enumerate() {
        let y = TOP + 16.0 + 16.0 * i as f64;
        let x = WIDTH - RIGHT - 150.0;
        let colour = PALETTE[i % PALETTE.len()];
        let _ = writeln!(out, r#"<line x1="{x}" y1="{0}" x2="{1}" y2="{0}" stroke="{colour}" stroke-width="2"/>"#, y - 4.0, x + 20.0);
        let _ = writeln!(out, r#"<text x="{}" y="{y}">{}</text>"#, x + 26.0, escape(&s.name));
    }
}

pub fn line_plot(axes: &Axes, series: &[Series]) -> Result<String> {
    if series.is_empty() {
        return Err(SvgError::Empty("no series".into()));
    }
    series.iter().try_for_each(Series::check)?;
    let t = Transform::new(extent(series.iter().flat_map(|s| &s.x)), extent(series.iter().flat_map(|s| &s.y)));
    let mut out = String::new();
    header(&mut out, axes, &t);
    draw_series(&mut out, &t, series);
    frame(&mut out);
    out.push_str("</svg>\n");
    Ok(out)
}

/// Cell edges: midpoints between axis values, extended half a spacing at
/// each end.
fn edges(axis: &[f64]) -> Vec<f64> {
    if axis.len() == 1 {
        return vec![axis[0] - 0.5, axis[0] + 0.5];
    }
    let mut e = Vec::with_capacity(axis.len() + 1);
    e.push(axis[0] - 0.5 * (axis[1] - axis[0]));
    e.extend(axis.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    let n = axis.len();
    e.push(axis[n - 1] + 0.5 * (axis[n - 1] - axis[n - 2]));
    e
}

/// Heat map of `values[ix][iy]` over `x × y`, with optional overlay curves
/// (one y per x).
pub fn heat_map(axes: &Axes, x: &[f64], y: &[f64], values: &[Vec<f64>], overlays: &[Series]) -> Result<String> {
    if x.is_empty() || y.is_empty() {
        return Err(SvgError::Empty("heat map axes".into()));
    }
    if values.len() != x.len() || values.iter().any(|c| c.len() != y.len()) {
        return Err(SvgError::Shape(format!("heat map needs {} columns of {} values", x.len(), y.len())));
    }
    if x.iter().chain(y).chain(values.iter().flatten()).any(|v| !v.is_finite()) {
        return Err(SvgError::NonFinite("heat map".into()));
    }
    overlays.iter().try_for_each(Series::check)?;
    let (xe, ye) = (edges(x), edges(y));
    let t = Transform::new((xe[0], xe[xe.len() - 1]), (ye[0], ye[ye.len() - 1]));
    let (vmin, vmax) = extent(values.iter().flatten());
    let span = if vmax > vmin { vmax - vmin } else { 1.0 };
    let stride = y.len().div_ceil(MAX_ROWS);

    let mut out = String::new();
    header(&mut out, axes, &t);
    for (ix, col) in values.iter().enumerate() {
        let (l, r) = (t.px(xe[ix]), t.px(xe[ix + 1]));
        for iy in (0..y.len()).step_by(stride) {
            let top_edge = ye[(iy + stride).min(y.len())];
            let (b, tp) = (t.py(ye[iy]), t.py(top_edge));
            let (cr, cg, cb) = ramp((col[iy] - vmin) / span);
            let _ = writeln!(
                out,
                r#"<rect x="{l:.2}" y="{tp:.2}" width="{:.2}" height="{:.2}" fill="rgb({cr},{cg},{cb})"/>"#,
                r - l,
                b - tp
            );
        }
    }
    draw_series(&mut out, &t, overlays);
    frame(&mut out);
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transform_is_linear_and_flips_y() {
        let t = Transform::new((0.0, 10.0), (0.0, 1.0));
        assert_eq!(t.px(0.0), LEFT);
        assert_eq!(t.px(10.0), WIDTH - RIGHT);
        assert_eq!(t.py(0.0), HEIGHT - BOTTOM);
        assert_eq!(t.py(1.0), TOP);
    }

    #[test]
    fn ramp_endpoints() {
        assert_eq!(ramp(0.0), (0, 0, 255));
        assert_eq!(ramp(1.0), (255, 0, 0));
        assert_eq!(ramp(0.5), (128, 0, 127));
    }

    #[test]
    fn ticks_are_round() {
        let t = ticks((0.0, 1.0));
        assert_eq!(t.len(), 6);
        assert_eq!((t[0], t[5]), (0.0, 1.0));
        assert!(ticks((2.3e9, 2.55e9)).len() >= 3);
    }
}
