//! Deterministic SVG plots with a sibling CSV of the plotted data.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use spinmarket_core::table::{float17, CsvTable};

use crate::error::{CliError, Result};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 160.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const TICKS: usize = 5;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    /// One polyline per series.
    Series,
    /// One marker per point.
    Scatter,
    /// One polyline per renormalization level.
    Stack,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSeries {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<PlotSeries>,
}

impl Dataset {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        Self {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            series: Vec::new(),
        }
    }

    pub fn with_series(mut self, name: &str, points: Vec<(f64, f64)>) -> Self {
        self.series.push(PlotSeries { name: name.into(), points });
        self
    }

    fn finite_points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.series
            .iter()
            .flat_map(|s| s.points.iter().copied())
            .filter(|(x, y)| x.is_finite() && y.is_finite())
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn padded_range(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    } else {
        let pad = if lo == 0.0 { 1.0 } else { 0.05 * lo.abs() };
        (lo - pad, hi + pad)
    }
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if !(1e-3..1e5).contains(&a) {
        return format!("{v:.2e}");
    }
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

/// Renders `dataset` as a standalone SVG document.
pub fn render_svg(dataset: &Dataset, kind: PlotKind) -> Result<String> {
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    let mut any = false;
    for (x, y) in dataset.finite_points() {
        any = true;
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !any {
        return Err(CliError::Validation(format!("plot `{}` has no finite points", dataset.title)));
    }
    let (x0, x1) = padded_range(x0, x1);
    let (y0, y1) = padded_range(y0, y1);
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * plot_w;
    let sy = |y: f64| TOP + (y1 - y) / (y1 - y0) * plot_h;

    let mut svg = String::new();
    let w = &mut svg;
    let _ = writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(w, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        w,
        r#"<text class="title" x="{:.2}" y="24" text-anchor="middle" font-size="16">{}</text>"#,
        LEFT + plot_w / 2.0,
        escape(&dataset.title)
    );
    let _ = writeln!(
        w,
        r#"<rect class="frame" x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    for i in 0..TICKS {
        let f = i as f64 / (TICKS - 1) as f64;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let (px, py) = (sx(xv), sy(yv));
        let _ = writeln!(
            w,
            r#"<line class="tick" x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + plot_h,
            TOP + plot_h + 5.0,
            TOP + plot_h + 18.0,
            tick_label(xv)
        );
        let _ = writeln!(
            w,
            r#"<line class="tick" x1="{:.2}" y1="{py:.2}" x2="{LEFT}" y2="{py:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 5.0,
            LEFT - 8.0,
            py + 4.0,
            tick_label(yv)
        );
    }
    let _ = writeln!(
        w,
        r#"<text class="xlabel" x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 15.0,
        escape(&dataset.x_label)
    );
    let _ = writeln!(
        w,
        r#"<text class="ylabel" x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0,
        escape(&dataset.y_label)
    );
    if y0 < 0.0 && y1 > 0.0 {
        let _ = writeln!(
            w,
            r##"<line class="zero" x1="{LEFT}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#999999" stroke-dasharray="4 4"/>"##,
            sy(0.0),
            LEFT + plot_w,
            sy(0.0)
        );
    }
    for (k, s) in dataset.series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let pts: Vec<(f64, f64)> = s.points.iter().copied().filter(|(x, y)| x.is_finite() && y.is_finite()).collect();
        match kind {
            PlotKind::Scatter => {
                let _ = writeln!(w, r#"<g class="markers" fill="{color}">"#);
                for (x, y) in &pts {
                    let _ = writeln!(w, r#"<circle class="marker" cx="{:.2}" cy="{:.2}" r="2"/>"#, sx(*x), sy(*y));
                }
                let _ = writeln!(w, "</g>");
            }
            PlotKind::Series | PlotKind::Stack => {
                let class = if kind == PlotKind::Stack { "level" } else { "series" };
                let coords: Vec<String> = pts.iter().map(|(x, y)| format!("{:.2},{:.2}", sx(*x), sy(*y))).collect();
                let _ = writeln!(
                    w,
                    r#"<polyline class="{class}" data-index="{k}" fill="none" stroke="{color}" stroke-width="1.2" points="{}"/>"#,
                    coords.join(" ")
                );
            }
        }
        let ly = TOP + 10.0 + 18.0 * k as f64;
        let lx = WIDTH - RIGHT + 15.0;
        let _ = writeln!(
            w,
            r#"<rect class="legend" x="{lx:.2}" y="{:.2}" width="12" height="4" fill="{color}"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            ly - 4.0,
            lx + 18.0,
            ly + 1.0,
            escape(&s.name)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// `series,x,y` rows of every plotted point.
pub fn render_csv(dataset: &Dataset) -> String {
    let mut t = CsvTable::new(&["series", "x", "y"]);
    for s in &dataset.series {
        for &(x, y) in &s.points {
            t.row([s.name.clone(), float17(x), float17(y)]);
        }
    }
    t.finish()
}

/// Writes `path` and the sibling `path.with_extension("csv")`; returns the
/// CSV path.
pub fn emit_plot(dataset: &Dataset, kind: PlotKind, path: &Path) -> Result<PathBuf> {
    let svg = render_svg(dataset, kind)?;
    let csv_path = path.with_extension("csv");
    fs::write(path, svg).map_err(|e| CliError::io(path, e))?;
    fs::write(&csv_path, render_csv(dataset)).map_err(|e| CliError::io(&csv_path, e))?;
    Ok(csv_path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Dataset {
        Dataset::new("a < b", "x", "y")
            .with_series("one", vec![(0.0, 1.0), (1.0, 2.0), (2.0, f64::NAN)])
            .with_series("two", vec![(0.0, -1.0), (2.0, 0.5)])
    }

    #[test]
    fn markers_and_lines() {
        let scatter = render_svg(&sample(), PlotKind::Scatter).unwrap();
        assert_eq!(scatter.matches(r#"class="marker""#).count(), 4);
        let stack = render_svg(&sample(), PlotKind::Stack).unwrap();
        assert_eq!(stack.matches(r#"<polyline class="level""#).count(), 2);
        assert!(stack.contains("a &lt; b"));
        assert!(stack.contains(r#"class="zero""#));
    }

    #[test]
    fn deterministic_and_rejects_empty() {
        assert_eq!(render_svg(&sample(), PlotKind::Series).unwrap(), render_svg(&sample(), PlotKind::Series).unwrap());
        assert!(render_svg(&Dataset::new("t", "x", "y"), PlotKind::Series).is_err());
        let flat = Dataset::new("t", "x", "y").with_series("s", vec![(1.0, 1.0)]);
        assert!(render_svg(&flat, PlotKind::Series).is_ok());
    }

    #[test]
    fn tick_labels() {
        assert_eq!(tick_label(0.5), "0.5");
        assert_eq!(tick_label(2.0), "2");
        assert_eq!(tick_label(1.23456e-7), "1.23e-7");
        assert_eq!(tick_label(-0.00001), "-1.00e-5");
    }

    #[test]
    fn unwritable_path_is_io() {
        let err = emit_plot(&sample(), PlotKind::Series, Path::new("/nonexistent-dir/x/plot.svg")).unwrap_err();
        assert_eq!(err.exit_code(), 4);
    }
}
