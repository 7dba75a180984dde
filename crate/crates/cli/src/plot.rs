//! Minimal static SVG line and scatter plots read back from CSV outputs.

use crate::bundle::ResultBundle;
use crate::CliError;
use serde::Serialize;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Style {
    Line,
    Points,
}

/// One series: columns `x` and `y` of `csv`, optionally restricted to rows
/// whose column `filter.0` equals `filter.1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Series {
    pub label: String,
    pub csv: String,
    pub x: String,
    pub y: String,
    pub filter: Option<(String, String)>,
    pub style: Style,
}

impl Series {
    pub fn new(label: impl Into<String>, csv: &str, x: &str, y: &str, style: Style) -> Self {
        Self { label: label.into(), csv: csv.into(), x: x.into(), y: y.into(), filter: None, style }
    }

    pub fn filtered(mut self, column: &str, value: impl ToString) -> Self {
        self.filter = Some((column.into(), value.to_string()));
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlotSpec {
    pub file: String,
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
}

impl PlotSpec {
    pub fn new(file: &str, title: &str, x_label: &str, y_label: &str) -> Self {
        Self {
            file: file.into(),
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            log_x: false,
            log_y: false,
            series: Vec::new(),
        }
    }

    pub fn log_x(mut self) -> Self {
        self.log_x = true;
        self
    }

    pub fn log_y(mut self) -> Self {
        self.log_y = true;
        self
    }

    pub fn with(mut self, s: Series) -> Self {
        self.series.push(s);
        self
    }
}

/// Writes one SVG per plot of `bundle` into its output directory.
pub fn emit_plots(bundle: &ResultBundle) -> Result<Vec<PathBuf>, CliError> {
    let mut written = Vec::with_capacity(bundle.plots.len());
    for spec in &bundle.plots {
        let data = spec.series.iter().map(|s| read_series(&bundle.out_dir, s)).collect::<Result<Vec<_>, _>>()?;
        let svg = render(spec, &data);
        let path = bundle.out_dir.join(&spec.file);
        std::fs::write(&path, svg).map_err(|e| CliError::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

fn read_series(dir: &Path, s: &Series) -> Result<Vec<(f64, f64)>, CliError> {
    let path = dir.join(&s.csv);
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
    let bad = |message: String| CliError::Csv { path: path.display().to_string(), message };
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().ok_or_else(|| bad("empty file".into()))?.split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).ok_or_else(|| bad(format!("no column `{name}`")));
    let (xi, yi) = (col(&s.x)?, col(&s.y)?);
    let filter = match &s.filter {
        Some((c, v)) => Some((col(c)?, v.as_str())),
        None => None,
    };
    let mut out = Vec::new();
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        if let Some((fi, v)) = filter {
            if cells.get(fi) != Some(&v) {
                continue;
            }
        }
        let parse = |i: usize| -> Result<f64, CliError> {
            cells.get(i).and_then(|c| c.parse().ok()).ok_or_else(|| bad(format!("bad number in `{line}`")))
        };
        out.push((parse(xi)?, parse(yi)?));
    }
    Ok(out)
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 78.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 56.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

struct Axis {
    log: bool,
    lo: f64,
    hi: f64,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            let t = if log { v.log10() } else { v };
            if t.is_finite() {
                lo = lo.min(t);
                hi = hi.max(t);
            }
        }
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo < 1e-12 * hi.abs().max(1.0) {
            let pad = if lo == 0.0 { 1.0 } else { 0.1 * lo.abs() };
            (lo, hi) = (lo - pad, hi + pad);
        }
        let pad = 0.05 * (hi - lo);
        Self { log, lo: lo - pad, hi: hi + pad }
    }

    fn frac(&self, v: f64) -> Option<f64> {
        let t = if self.log { v.log10() } else { v };
        t.is_finite().then(|| (t - self.lo) / (self.hi - self.lo))
    }

    /// Tick positions in transformed units with their labels.
    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log && self.hi - self.lo >= 1.0 {
            let step = ((self.hi - self.lo) / 6.0).ceil().max(1.0);
            let mut e = (self.lo / step).ceil() * step;
            let mut out = Vec::new();
            while e <= self.hi {
                out.push((e, format!("1e{}", e as i64)));
                e += step;
            }
            return out;
        }
        let raw = (self.hi - self.lo) / 5.0;
        let mag = 10f64.powf(raw.log10().floor());
        let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
        let mut t = (self.lo / step).ceil() * step;
        let mut out = Vec::new();
        while t <= self.hi + 1e-9 * step {
            let value = if self.log { 10f64.powf(t) } else { t };
            out.push((t, format!("{}", (value * 1e6).round() / 1e6)));
            t += step;
        }
        out
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn render(spec: &PlotSpec, data: &[Vec<(f64, f64)>]) -> String {
    let all = || data.iter().flatten();
    let ax = Axis::fit(all().map(|p| p.0), spec.log_x);
    let ay = Axis::fit(all().map(|p| p.1), spec.log_y);
    let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    let px = |f: f64| LEFT + f * pw;
    let py = |f: f64| TOP + (1.0 - f) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(&spec.title)
    );
    let _ = writeln!(s, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    for (t, label) in ax.ticks() {
        let x = px((t - ax.lo) / (ax.hi - ax.lo));
        let _ =
            writeln!(s, r#"<line x1="{x:.2}" y1="{}" x2="{x:.2}" y2="{}" stroke="black"/>"#, TOP + ph, TOP + ph + 5.0);
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{}" text-anchor="middle">{label}</text>"#, TOP + ph + 18.0);
    }
    for (t, label) in ay.ticks() {
        let y = py((t - ay.lo) / (ay.hi - ay.lo));
        let _ = writeln!(s, r#"<line x1="{}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/>"#, LEFT - 5.0);
        let _ = writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">{label}</text>"#, LEFT - 8.0, y + 4.0);
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 14.0,
        escape(&spec.x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{y}" text-anchor="middle" transform="rotate(-90 16 {y})">{}</text>"#,
        escape(&spec.y_label),
        y = TOP + ph / 2.0
    );

    for (i, (series, points)) in spec.series.iter().zip(data).enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let coords: Vec<(f64, f64)> =
            points.iter().filter_map(|&(x, y)| Some((px(ax.frac(x)?), py(ay.frac(y)?)))).collect();
        match series.style {
            Style::Line => {
                let pts: Vec<String> = coords.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
                let _ = writeln!(
                    s,
                    r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                    pts.join(" ")
                );
                for (x, y) in &coords {
                    let _ = writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="2.5" fill="{color}"/>"#);
                }
            }
            Style::Points => {
                for (x, y) in &coords {
                    let _ = writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="2" fill="{color}" fill-opacity="0.5"/>"#);
                }
            }
        }
        let ly = TOP + 14.0 + 16.0 * i as f64;
        let lx = LEFT + pw - 150.0;
        let _ = writeln!(s, r#"<rect x="{lx}" y="{}" width="10" height="10" fill="{color}"/>"#, ly - 9.0);
        let _ = writeln!(s, r#"<text x="{}" y="{ly}">{}</text>"#, lx + 14.0, escape(&series.label));
    }
    s.push_str("</svg>\n");
    s
}
