use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use crate::error::Result;

/// Column order of every CSV written by [`emit_report`].
pub const CSV_HEADER: &str = "run_id,N,quantity,value,tolerance,pass,source";

/// One CSV line: a number, what produced it, and, for checked quantities,
/// the threshold and verdict.
#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub level: Option<u32>,
    pub quantity: String,
    pub value: f64,
    pub tolerance: Option<f64>,
    pub pass: Option<bool>,
    pub source: String,
}

/// A named pass/fail verdict; also emitted as a row.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// A line chart; logarithmic axes use base 2.
#[derive(Clone, Debug, PartialEq)]
pub struct Chart {
    pub name: String,
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
}

#[derive(Clone, Debug, Default)]
pub struct RunReport {
    pub run_id: String,
    pub rows: Vec<Row>,
    pub checks: Vec<Check>,
    pub charts: Vec<Chart>,
    /// Informational lines for the console; not written to the CSV.
    pub notes: Vec<String>,
    pub wall_clock: Duration,
}

impl RunReport {
    pub fn new(run_id: &str) -> Self {
        Self {
            run_id: run_id.to_string(),
            ..Self::default()
        }
    }

    pub fn value(&mut self, level: Option<u32>, quantity: impl Into<String>, value: f64, source: &str) {
        self.rows.push(Row {
            level,
            quantity: quantity.into(),
            value,
            tolerance: None,
            pass: None,
            source: source.to_string(),
        });
    }

    /// A value with the tolerance it is judged against, but no verdict.
    pub fn diagnostic(
        &mut self,
        level: Option<u32>,
        quantity: impl Into<String>,
        value: f64,
        tolerance: f64,
        source: &str,
    ) {
        self.rows.push(Row {
            level,
            quantity: quantity.into(),
            value,
            tolerance: Some(tolerance),
            pass: None,
            source: source.to_string(),
        });
    }

    /// Records a verdict. `pass` is computed by the caller from `value` and
    /// `tolerance`; the detail names the rule.
    pub fn check(&mut self, name: &str, value: f64, tolerance: f64, pass: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.to_string(),
            value,
            tolerance,
            pass,
            detail: detail.into(),
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        s.push_str(CSV_HEADER);
        s.push('\n');
        let fmt_opt = |x: Option<f64>| x.map(format_number).unwrap_or_default();
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{}",
                csv_field(&self.run_id),
                r.level.map(|n| n.to_string()).unwrap_or_default(),
                csv_field(&r.quantity),
                format_number(r.value),
                fmt_opt(r.tolerance),
                r.pass.map(|b| b.to_string()).unwrap_or_default(),
                csv_field(&r.source),
            );
        }
        for c in &self.checks {
            let _ = writeln!(
                s,
                "{},,{},{},{},{},{}",
                csv_field(&self.run_id),
                csv_field(&format!("check:{}", c.name)),
                format_number(c.value),
                format_number(c.tolerance),
                c.pass,
                csv_field(&c.detail),
            );
        }
        s
    }
}

fn format_number(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.12e}")
    } else {
        x.to_string()
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Svg,
    Both,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "svg" => Ok(OutputFormat::Svg),
            "both" => Ok(OutputFormat::Both),
            _ => Err(format!("unknown format {s:?} (csv, svg, both)")),
        }
    }
}

/// Writes `<run_id>.csv` and/or one `<run_id>_<chart>.svg` per chart into
/// `dir`, returning the paths written.
pub fn emit_report(report: &RunReport, dir: &Path, format: OutputFormat) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    if matches!(format, OutputFormat::Csv | OutputFormat::Both) {
        let path = dir.join(format!("{}.csv", report.run_id));
        fs::write(&path, report.to_csv())?;
        written.push(path);
    }
    if matches!(format, OutputFormat::Svg | OutputFormat::Both) {
        for chart in &report.charts {
            let path = dir.join(format!("{}_{}.svg", report.run_id, chart.name));
            fs::write(&path, render_svg(chart))?;
            written.push(path);
        }
    }
    Ok(written)
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Plain SVG line chart with axis ticks, labels and a legend.
pub fn render_svg(chart: &Chart) -> String {
    let transform = |v: f64, log: bool| if log { v.log2() } else { v };
    let points: Vec<(f64, f64)> = chart
        .series
        .iter()
        .flat_map(|s| s.points.iter())
        .map(|&(x, y)| (transform(x, chart.log_x), transform(y, chart.log_y)))
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .collect();
    let (mut x0, mut x1, mut y0, mut y1) = points.iter().fold(
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
        |(a, b, c, d), &(x, y)| (a.min(x), b.max(x), c.min(y), d.max(y)),
    );
    if points.is_empty() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 - x0 < 1e-12 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if y1 - y0 < 1e-12 * y0.abs().max(1.0) {
        let pad = 0.5 * y0.abs().max(1.0);
        y0 -= pad;
        y1 += pad;
    }
    let pad_y = 0.05 * (y1 - y0);
    y0 -= pad_y;
    y1 += pad_y;
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(&chart.title)
    );
    let _ = writeln!(
        s,
        r#"<line x1="{m}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/><line x1="{m}" y1="{t}" x2="{m}" y2="{b}" stroke="black"/>"#,
        m = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN,
        t = MARGIN
    );
    for i in 0..=4 {
        let fx = x0 + (x1 - x0) * i as f64 / 4.0;
        let fy = y0 + (y1 - y0) * i as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            px(fx),
            HEIGHT - MARGIN + 16.0,
            tick(fx)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            MARGIN - 6.0,
            py(fy) + 4.0,
            tick(fy)
        );
    }
    let axis = |label: &str, log: bool| {
        if log {
            format!("log2 {label}")
        } else {
            label.to_string()
        }
    };
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 16.0,
        escape(&axis(&chart.x_label, chart.log_x))
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(&axis(&chart.y_label, chart.log_y))
    );
    for (i, series) in chart.series.iter().enumerate() {
        let colour = PALETTE[i % PALETTE.len()];
        let coords: Vec<String> = series
            .points
            .iter()
            .map(|&(x, y)| (transform(x, chart.log_x), transform(y, chart.log_y)))
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        if !coords.is_empty() {
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#,
                coords.join(" ")
            );
            for c in &coords {
                let (cx, cy) = c.split_once(',').expect("coordinate pair");
                let _ = writeln!(s, r#"<circle cx="{cx}" cy="{cy}" r="2.5" fill="{colour}"/>"#);
            }
        }
        let ly = MARGIN + 16.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" fill="{colour}">{}</text>"#,
            WIDTH - MARGIN + 4.0,
            ly,
            escape(&series.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.2e}")
    } else {
        format!("{v:.2}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
