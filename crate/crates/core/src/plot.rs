//! Static SVG charts for sweep results.
//!
//! Output is a pure function of the input numbers: fixed canvas, fixed
//! palette, fixed-precision coordinates. Cells with no data leave a gap.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::ExperimentError;
use crate::experiments::{
    aggregate_path, five_number, parse_aggregate_csv, parse_archive, raw_path, AggregateRow,
    RunRecord,
};

const WIDTH: f64 = 960.0;
const HEIGHT: f64 = 520.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 120.0;
const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoxStats {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl BoxStats {
    pub fn from_values(values: &[f64]) -> Option<Self> {
        let mut v = values.to_vec();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        five_number(&v).map(|(min, q1, median, q3, max)| Self {
            min,
            q1,
            median,
            q3,
            max,
        })
    }
}

/// A named line over the categories; `None` breaks the line.
#[derive(Clone, Debug)]
pub struct Series {
    pub name: String,
    pub values: Vec<Option<f64>>,
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Rounds `x` up to 1, 2 or 5 times a power of ten.
fn nice_ceiling(x: f64) -> f64 {
    if x <= 0.0 || !x.is_finite() {
        return 1.0;
    }
    let p = 10f64.powf(x.log10().floor());
    for m in [1.0, 2.0, 5.0, 10.0] {
        if m * p >= x - 1e-12 {
            return m * p;
        }
    }
    10.0 * p
}

struct Canvas {
    svg: String,
    n: usize,
    y_min: f64,
    y_max: f64,
}

impl Canvas {
    fn new(
        title: &str,
        x_title: &str,
        y_title: &str,
        labels: &[String],
        y_min: f64,
        y_max: f64,
    ) -> Self {
        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(
            svg,
            r##"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>"##
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="16">{}</text>"#,
            LEFT + (WIDTH - LEFT - RIGHT) / 2.0,
            esc(title)
        );
        let mut c = Self {
            svg,
            n: labels.len().max(1),
            y_min,
            y_max,
        };
        c.axes(x_title, y_title, labels);
        c
    }

    fn plot_w(&self) -> f64 {
        WIDTH - LEFT - RIGHT
    }

    fn plot_h(&self) -> f64 {
        HEIGHT - TOP - BOTTOM
    }

    fn band(&self) -> f64 {
        self.plot_w() / self.n as f64
    }

    fn x(&self, i: usize) -> f64 {
        LEFT + self.band() * (i as f64 + 0.5)
    }

    fn y(&self, v: f64) -> f64 {
        let span = (self.y_max - self.y_min).max(1e-12);
        TOP + self.plot_h() * (1.0 - (v - self.y_min) / span)
    }

    fn axes(&mut self, x_title: &str, y_title: &str, labels: &[String]) {
        let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, TOP, HEIGHT - BOTTOM);
        let _ = writeln!(
            self.svg,
            r#"<path d="M{x0:.2} {y0:.2} L{x0:.2} {y1:.2} L{x1:.2} {y1:.2}" fill="none" stroke="black"/>"#
        );
        for t in 0..=5 {
            let v = self.y_min + (self.y_max - self.y_min) * t as f64 / 5.0;
            let y = self.y(v);
            let _ = writeln!(
                self.svg,
                r##"<line x1="{:.2}" y1="{y:.2}" x2="{x1:.2}" y2="{y:.2}" stroke="#dddddd"/>"##,
                x0
            );
            let _ = writeln!(
                self.svg,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
                x0 - 6.0,
                y + 4.0,
                fmt_tick(v)
            );
        }
        for (i, label) in labels.iter().enumerate() {
            let x = self.x(i);
            let y = y1 + 14.0;
            let _ = writeln!(
                self.svg,
                r#"<text x="{x:.2}" y="{y:.2}" text-anchor="end" transform="rotate(-60 {x:.2} {y:.2})">{}</text>"#,
                esc(label)
            );
        }
        let _ = writeln!(
            self.svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            LEFT + self.plot_w() / 2.0,
            HEIGHT - 12.0,
            esc(x_title)
        );
        let _ = writeln!(
            self.svg,
            r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
            TOP + self.plot_h() / 2.0,
            TOP + self.plot_h() / 2.0,
            esc(y_title)
        );
    }

    fn boxes(&mut self, boxes: &[Option<BoxStats>]) {
        let half = (self.band() * 0.3).min(20.0);
        for (i, b) in boxes.iter().enumerate() {
            let Some(b) = b else { continue };
            let x = self.x(i);
            let (ymin, yq1, ymed, yq3, ymax) = (
                self.y(b.min),
                self.y(b.q1),
                self.y(b.median),
                self.y(b.q3),
                self.y(b.max),
            );
            let _ = writeln!(
                self.svg,
                r#"<line class="whisker" x1="{x:.2}" y1="{ymax:.2}" x2="{x:.2}" y2="{yq3:.2}" stroke="black"/>"#
            );
            let _ = writeln!(
                self.svg,
                r#"<line class="whisker" x1="{x:.2}" y1="{yq1:.2}" x2="{x:.2}" y2="{ymin:.2}" stroke="black"/>"#
            );
            let _ = writeln!(
                self.svg,
                r##"<rect class="box" x="{:.2}" y="{yq3:.2}" width="{:.2}" height="{:.2}" fill="#aec7e8" stroke="black"/>"##,
                x - half,
                2.0 * half,
                (yq1 - yq3).max(0.0)
            );
            let _ = writeln!(
                self.svg,
                r#"<line class="median" x1="{:.2}" y1="{ymed:.2}" x2="{:.2}" y2="{ymed:.2}" stroke="black" stroke-width="2"/>"#,
                x - half,
                x + half
            );
        }
    }

    fn series(&mut self, series: &[Series]) {
        for (k, s) in series.iter().enumerate() {
            let color = PALETTE[k % PALETTE.len()];
            let mut runs: Vec<Vec<(f64, f64)>> = vec![Vec::new()];
            for (i, v) in s.values.iter().enumerate() {
                match v {
                    Some(v) if v.is_finite() => {
                        runs.last_mut().unwrap().push((self.x(i), self.y(*v)))
                    }
                    _ => runs.push(Vec::new()),
                }
            }
            for run in runs.iter().filter(|r| !r.is_empty()) {
                let pts: Vec<String> = run.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
                let _ = writeln!(
                    self.svg,
                    r#"<polyline class="series" points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
                    pts.join(" ")
                );
                for (x, y) in run {
                    let _ = writeln!(
                        self.svg,
                        r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="{color}"/>"#
                    );
                }
            }
            let ly = TOP + 10.0 + 20.0 * k as f64;
            let lx = WIDTH - RIGHT + 15.0;
            let _ = writeln!(
                self.svg,
                r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#,
                lx + 20.0
            );
            let _ = writeln!(
                self.svg,
                r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
                lx + 26.0,
                ly + 4.0,
                esc(&s.name)
            );
        }
    }

    fn finish(mut self) -> String {
        self.svg.push_str("</svg>\n");
        self.svg
    }
}

fn fmt_tick(v: f64) -> String {
    if v.abs() >= 10.0 || v == v.round() {
        format!("{:.0}", v)
    } else {
        format!("{:.2}", v)
    }
}

/// Box per category plus optional overlay lines.
pub fn boxplot_svg(
    title: &str,
    x_title: &str,
    y_title: &str,
    labels: &[String],
    boxes: &[Option<BoxStats>],
    overlay: &[Series],
    y_range: Option<(f64, f64)>,
) -> String {
    let (lo, hi) = y_range.unwrap_or_else(|| {
        let top = boxes.iter().flatten().map(|b| b.max).fold(0.0, f64::max);
        (0.0, nice_ceiling(top))
    });
    let mut c = Canvas::new(title, x_title, y_title, labels, lo, hi);
    c.boxes(boxes);
    c.series(overlay);
    c.finish()
}

/// Lines over the categories.
pub fn line_svg(
    title: &str,
    x_title: &str,
    y_title: &str,
    labels: &[String],
    series: &[Series],
    y_range: (f64, f64),
) -> String {
    let mut c = Canvas::new(title, x_title, y_title, labels, y_range.0, y_range.1);
    c.series(series);
    c.finish()
}

type Field = fn(&AggregateRow) -> f64;

/// Category labels showing only the parameters that vary across rows.
fn cell_labels(rows: &[AggregateRow]) -> (Vec<String>, String) {
    let varies = |f: Field| rows.iter().any(|r| f(r) != f(&rows[0]));
    let mut parts: Vec<(&str, Field)> = Vec::new();
    if varies(|r| r.s) {
        parts.push(("s", |r| r.s));
    }
    let t_same = rows.iter().all(|r| r.t1 == r.t2);
    if t_same {
        if varies(|r| r.t1) {
            parts.push(("t", |r| r.t1));
        }
    } else {
        parts.push(("t1", |r| r.t1));
        parts.push(("t2", |r| r.t2));
    }
    if parts.is_empty() {
        parts.push(("t", |r| r.t1));
    }
    let labels = rows
        .iter()
        .map(|r| {
            parts
                .iter()
                .map(|(_, f)| format!("{:.2}", f(r)))
                .collect::<Vec<_>>()
                .join(" / ")
        })
        .collect();
    let title = parts
        .iter()
        .map(|(n, _)| *n)
        .collect::<Vec<_>>()
        .join(" / ");
    (labels, title)
}

/// Writes `<name>_stabilisation.svg`, `<name>_similarity.svg` and
/// `<name>_dimension.svg` into `out_dir`.
pub fn emit_plots(
    rows: &[AggregateRow],
    records: &[RunRecord],
    out_dir: &Path,
    name: &str,
) -> Result<Vec<PathBuf>, ExperimentError> {
    let (labels, x_title) = cell_labels(rows);

    let stab_boxes: Vec<Option<BoxStats>> = rows
        .iter()
        .map(|r| {
            r.stabilisation.map(|s| BoxStats {
                min: s.min,
                q1: s.q1,
                median: s.median,
                q3: s.q3,
                max: s.max,
            })
        })
        .collect();
    let stabilisation = boxplot_svg(
        &format!("{name}: steps until all agents are happy"),
        &x_title,
        "stabilisation step",
        &labels,
        &stab_boxes,
        &[],
        None,
    );

    let sim_boxes: Vec<Option<BoxStats>> = rows
        .iter()
        .map(|r| {
            let vals: Vec<f64> = records
                .iter()
                .filter(|x| x.t1 == r.t1 && x.t2 == r.t2 && x.s == r.s)
                .map(|x| x.similarity_overall)
                .collect();
            BoxStats::from_values(&vals)
        })
        .collect();
    let group_lines = [
        Series {
            name: "group 1 mean".into(),
            values: rows.iter().map(|r| Some(r.similarity_g1)).collect(),
        },
        Series {
            name: "group 2 mean".into(),
            values: rows.iter().map(|r| Some(r.similarity_g2)).collect(),
        },
    ];
    let similarity = boxplot_svg(
        &format!("{name}: share of same-group neighbours"),
        &x_title,
        "similarity",
        &labels,
        &sim_boxes,
        &group_lines,
        Some((0.0, 1.0)),
    );

    let dimension = line_svg(
        &format!("{name}: mean embedded dimension"),
        &x_title,
        "d_hat",
        &labels,
        &[Series {
            name: "mean d_hat".into(),
            values: rows.iter().map(|r| Some(r.d_hat_mean)).collect(),
        }],
        (
            0.0,
            nice_ceiling(rows.iter().map(|r| r.d_hat_mean).fold(2.0, f64::max)).max(2.0),
        ),
    );

    fs::create_dir_all(out_dir).map_err(|e| ExperimentError::io(out_dir, e))?;
    let mut paths = Vec::new();
    for (suffix, body) in [
        ("stabilisation", stabilisation),
        ("similarity", similarity),
        ("dimension", dimension),
    ] {
        let path = out_dir.join(format!("{name}_{suffix}.svg"));
        fs::write(&path, body).map_err(|e| ExperimentError::io(&path, e))?;
        paths.push(path);
    }
    Ok(paths)
}

/// Reads `<name>_agg.csv` and `<name>_raw.txt` from `out_dir` and plots them.
pub fn emit_plots_from_files(out_dir: &Path, name: &str) -> Result<Vec<PathBuf>, ExperimentError> {
    let agg = aggregate_path(out_dir, name);
    let raw = raw_path(out_dir, name);
    let agg_text = fs::read_to_string(&agg).map_err(|e| ExperimentError::io(&agg, e))?;
    let raw_text = fs::read_to_string(&raw).map_err(|e| ExperimentError::io(&raw, e))?;
    let rows = parse_aggregate_csv(&agg_text, &agg)?;
    let records = parse_archive(&raw_text, &raw)?;
    emit_plots(&rows, &records, out_dir, name)
}
