//! Deterministic SVG scatter plots of sweep CSVs, one series per state.

use std::fmt::Write as _;

use crate::CliError;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 72.0;
const RIGHT: f64 = 120.0;
const TOP: f64 = 24.0;
const BOTTOM: f64 = 56.0;
const TICKS: usize = 5;
const PALETTE: [&str; 10] =
    ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"];
/// Legend entries beyond this are elided.
const LEGEND_MAX: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub x: String,
    pub y: String,
    pub series: String,
    pub log_x: bool,
}

impl PlotSpec {
    pub fn new(x: &str, y: &str) -> Self {
        Self { x: x.into(), y: y.into(), series: "state_id".into(), log_x: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

/// Reads the plotted columns. Rows with an empty x or y are skipped, as are
/// non-positive x values on a log axis.
pub fn load_series(csv_text: &[u8], spec: &PlotSpec) -> Result<Vec<Series>, CliError> {
    let mut reader = csv::Reader::from_reader(csv_text);
    let headers = reader.headers().map_err(|e| CliError::Usage(format!("csv: {e}")))?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Usage(format!("column {name:?} not found in CSV header")))
    };
    let (xi, yi, si) = (column(&spec.x)?, column(&spec.y)?, column(&spec.series)?);
    let mut series: Vec<Series> = Vec::new();
    for (line, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Usage(format!("csv: {e}")))?;
        let field = |i: usize| rec.get(i).unwrap_or("");
        let (xs, ys) = (field(xi), field(yi));
        if xs.is_empty() || ys.is_empty() {
            continue;
        }
        let num = |s: &str, col: &str| {
            s.parse::<f64>().map_err(|_| CliError::Usage(format!("row {}: {col} = {s:?} is not a number", line + 1)))
        };
        let (x, y) = (num(xs, &spec.x)?, num(ys, &spec.y)?);
        if spec.log_x && x <= 0.0 {
            continue;
        }
        let name = field(si);
        match series.iter_mut().find(|s| s.name == name) {
            Some(s) => s.points.push((x, y)),
            None => series.push(Series { name: name.to_string(), points: vec![(x, y)] }),
        }
    }
    Ok(series)
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Self {
        let tr = |v: f64| if log { v.log10() } else { v };
        let (mut lo, mut hi) =
            values.map(tr).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        } else if hi - lo < 1e-12 {
            let pad = if lo.abs() > 1e-12 { 0.1 * lo.abs() } else { 0.5 };
            (lo, hi) = (lo - pad, hi + pad);
        } else {
            let pad = 0.04 * (hi - lo);
            (lo, hi) = (lo - pad, hi + pad);
        }
        Self { lo, hi, log }
    }

    fn frac(&self, v: f64) -> f64 {
        let v = if self.log { v.log10() } else { v };
        (v - self.lo) / (self.hi - self.lo)
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        (0..TICKS)
            .map(|i| {
                let t = i as f64 / (TICKS - 1) as f64;
                let v = self.lo + t * (self.hi - self.lo);
                let label = if self.log { format!("1e{v:.1}") } else { tick_label(v) };
                (t, label)
            })
            .collect()
    }
}

fn tick_label(v: f64) -> String {
    if v.abs() < 5e-13 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-3 {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

pub fn render_svg(series: &[Series], spec: &PlotSpec) -> String {
    let pts = || series.iter().flat_map(|s| s.points.iter().copied());
    let xa = Axis::fit(pts().map(|p| p.0), spec.log_x);
    let ya = Axis::fit(pts().map(|p| p.1), false);
    let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    let px = |x: f64| LEFT + xa.frac(x) * pw;
    let py = |y: f64| TOP + (1.0 - ya.frac(y)) * ph;

    let mut svg = String::new();
    let w = &mut svg;
    let _ = writeln!(w, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(w, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(w, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    for (t, label) in xa.ticks() {
        let x = LEFT + t * pw;
        let y0 = TOP + ph;
        let _ = writeln!(w, r#"<line x1="{x:.2}" y1="{y0:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#, y0 + 5.0);
        let _ = writeln!(w, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, y0 + 18.0, escape(&label));
    }
    for (t, label) in ya.ticks() {
        let y = TOP + (1.0 - t) * ph;
        let _ = writeln!(w, r#"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT:.2}" y2="{y:.2}" stroke="black"/>"#, LEFT - 5.0);
        let _ = writeln!(
            w,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 8.0,
            y + 4.0,
            escape(&label)
        );
    }
    // ideal value of the metric
    let reference = match spec.y.as_str() {
        "kappa" => Some(0.0),
        "f" => Some(1.0),
        _ => None,
    };
    if let Some(r) = reference.filter(|&r| (0.0..=1.0).contains(&ya.frac(r))) {
        let y = py(r);
        let _ = writeln!(
            w,
            r##"<line x1="{LEFT:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#999999" stroke-dasharray="4,3"/>"##,
            LEFT + pw
        );
    }
    let _ = writeln!(
        w,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 14.0,
        escape(&spec.x),
        if spec.log_x { " (log scale)" } else { "" }
    );
    let _ = writeln!(
        w,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(&spec.y)
    );
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let _ = writeln!(w, r#"<g fill="{color}" data-series="{}">"#, escape(&s.name));
        for &(x, y) in &s.points {
            let _ = writeln!(w, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5"/>"#, px(x), py(y));
        }
        let _ = writeln!(w, "</g>");
        if i < LEGEND_MAX {
            let ly = TOP + 10.0 + 14.0 * i as f64;
            let lx = LEFT + pw + 12.0;
            let _ = writeln!(w, r#"<circle cx="{lx:.2}" cy="{ly:.2}" r="3" fill="{color}"/>"#);
            let _ = writeln!(
                w,
                r#"<text x="{:.2}" y="{:.2}">{} {}</text>"#,
                lx + 8.0,
                ly + 4.0,
                escape(&spec.series),
                escape(&s.name)
            );
        } else if i == LEGEND_MAX {
            let ly = TOP + 10.0 + 14.0 * i as f64;
            let _ = writeln!(w, r#"<text x="{:.2}" y="{:.2}">...</text>"#, LEFT + pw + 12.0, ly + 4.0);
        }
    }
    let _ = writeln!(w, "</svg>");
    svg
}
