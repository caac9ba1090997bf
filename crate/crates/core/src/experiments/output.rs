//! CSV and SVG emission of experiment rows.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::gaussian::ExperimentRow;
use crate::error::{Error, Result};

/// Exact CSV header.
pub const CSV_HEADER: [&str; 12] = [
    "n",
    "m",
    "true_moment",
    "true_stderr",
    "exact_moment",
    "info_chi2",
    "info_mi",
    "bound_chi2",
    "bound_mi",
    "bound_expected",
    "valid_strict",
    "valid_relaxed",
];

/// File name of the CSV written next to the plots.
pub const CSV_FILE_NAME: &str = "gen_moments.csv";

/// Ten significant digits.
pub fn format_float(x: f64) -> String {
    format!("{x:.9e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

fn sorted(rows: &[ExperimentRow]) -> Vec<&ExperimentRow> {
    let mut v: Vec<&ExperimentRow> = rows.iter().collect();
    v.sort_by_key(|r| (r.m, r.n));
    v
}

/// Serialises rows, sorted by `(m, n)`, to CSV text.
pub fn rows_to_csv_string(rows: &[ExperimentRow]) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in sorted(rows) {
        w.write_record([
            r.n.to_string(),
            r.m.to_string(),
            format_float(r.true_moment),
            format_float(r.true_stderr),
            opt(r.exact_moment),
            opt(r.info_chi2),
            opt(r.info_mi),
            opt(r.bound_chi2),
            opt(r.bound_mi),
            opt(r.bound_expected),
            r.valid_strict.to_string(),
            r.valid_relaxed.to_string(),
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Writes rows to `path`.
pub fn emit_csv(rows: &[ExperimentRow], path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, rows_to_csv_string(rows)?)?;
    Ok(())
}

/// Parses CSV text produced by [`rows_to_csv_string`].
pub fn rows_from_csv_str(text: &str) -> Result<Vec<ExperimentRow>> {
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let bad = |msg: String| Error::InvalidParameter(format!("malformed experiment csv: {msg}"));
    let header = rd.headers().map_err(|e| bad(e.to_string()))?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(bad(format!("unexpected header {header:?}")));
    }
    let mut out = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let field = |i: usize| rec.get(i).unwrap_or("");
        let num = |i: usize| -> Result<f64> {
            field(i).parse().map_err(|_| bad(format!("{}: {:?}", CSV_HEADER[i], field(i))))
        };
        let opt_num = |i: usize| -> Result<Option<f64>> {
            if field(i).is_empty() {
                Ok(None)
            } else {
                num(i).map(Some)
            }
        };
        let flag = |i: usize| -> Result<bool> {
            field(i).parse().map_err(|_| bad(format!("{}: {:?}", CSV_HEADER[i], field(i))))
        };
        out.push(ExperimentRow {
            n: field(0).parse().map_err(|_| bad(format!("n: {:?}", field(0))))?,
            m: field(1).parse().map_err(|_| bad(format!("m: {:?}", field(1))))?,
            true_moment: num(2)?,
            true_stderr: num(3)?,
            exact_moment: opt_num(4)?,
            info_chi2: opt_num(5)?,
            info_mi: opt_num(6)?,
            bound_chi2: opt_num(7)?,
            bound_mi: opt_num(8)?,
            bound_expected: opt_num(9)?,
            valid_strict: flag(10)?,
            valid_relaxed: flag(11)?,
        });
    }
    Ok(out)
}

pub fn read_csv(path: &Path) -> Result<Vec<ExperimentRow>> {
    rows_from_csv_str(&std::fs::read_to_string(path)?)
}

/// Details printed in plot titles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlotMeta {
    pub quant_bins: usize,
    pub mc_replicates: u64,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

/// Maps values to pixels on a log10 y axis.
#[derive(Debug, Clone, Copy)]
struct Axes {
    x_min: f64,
    x_max: f64,
    log_min: f64,
    log_max: f64,
}

impl Axes {
    fn px(&self, n: f64) -> f64 {
        let span = (self.x_max - self.x_min).max(1.0);
        LEFT + (n - self.x_min) / span * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, v: f64) -> f64 {
        let l = v.log10().clamp(self.log_min, self.log_max);
        TOP + (self.log_max - l) / (self.log_max - self.log_min) * (HEIGHT - TOP - BOTTOM)
    }
}

struct Series<'a> {
    label: &'static str,
    color: &'static str,
    points: Vec<(&'a ExperimentRow, f64)>,
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Renders the plot of order `m`. Values are plotted in absolute value,
/// since odd moments may be negative on a log axis.
pub fn render_svg(rows: &[ExperimentRow], m: u32, meta: PlotMeta) -> Option<String> {
    let rows: Vec<&ExperimentRow> = sorted(rows).into_iter().filter(|r| r.m == m).collect();
    if rows.is_empty() {
        return None;
    }
    let collect = |f: fn(&ExperimentRow) -> Option<f64>| -> Vec<(&ExperimentRow, f64)> {
        rows.iter()
            .filter_map(|r| f(r).map(|v| (*r, v.abs())).filter(|(_, v)| *v > 0.0 && v.is_finite()))
            .collect()
    };
    let mut series = vec![
        Series {
            label: "true",
            color: "#000000",
            points: collect(|r| Some(r.true_moment)),
        },
        Series {
            label: "chi2-bound",
            color: "#d62728",
            points: collect(|r| r.bound_chi2),
        },
    ];
    if m <= 2 {
        series.push(Series {
            label: "mi-bound",
            color: "#1f77b4",
            points: collect(|r| r.bound_mi),
        });
    }
    series.retain(|s| !s.points.is_empty());

    let mut values: Vec<f64> = series.iter().flat_map(|s| s.points.iter().map(|p| p.1)).collect();
    values.extend(rows.iter().map(|r| r.true_moment.abs() + 2.0 * r.true_stderr).filter(|v| *v > 0.0));
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
    let (log_min, log_max) = if lo.is_finite() {
        let (a, b) = (lo.log10().floor(), hi.log10().ceil());
        (a, if b > a { b } else { a + 1.0 })
    } else {
        (-1.0, 0.0)
    };
    let axes = Axes {
        x_min: rows.first().map(|r| r.n as f64).unwrap_or(1.0),
        x_max: rows.last().map(|r| r.n as f64).unwrap_or(1.0),
        log_min,
        log_max,
    };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let title = format!(
        "Moment m={m} of the generalization error (K={}, MC={})",
        meta.quant_bins, meta.mc_replicates
    );
    let _ = writeln!(s, r#"<title>{}</title>"#, xml_escape(&title));
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text class="title" x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        (WIDTH - RIGHT + LEFT) / 2.0,
        xml_escape(&title)
    );
    let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, TOP, HEIGHT - BOTTOM);
    let _ = writeln!(
        s,
        r#"<g class="plot-area" data-x-min="{}" data-x-max="{}" data-log10-min="{log_min}" data-log10-max="{log_max}" data-px-left="{x0}" data-px-right="{x1}" data-px-top="{y0}" data-px-bottom="{y1}">"#,
        axes.x_min, axes.x_max
    );
    let _ = writeln!(
        s,
        r##"<rect x="{x0}" y="{y0}" width="{}" height="{}" fill="none" stroke="#444"/>"##,
        x1 - x0,
        y1 - y0
    );
    let mut decade = log_min;
    while decade <= log_max {
        let y = axes.py(10f64.powf(decade));
        let _ = writeln!(
            s,
            r##"<line x1="{x0}" y1="{y:.4}" x2="{x1}" y2="{y:.4}" stroke="#ddd"/><text x="{}" y="{:.4}" text-anchor="end">1e{decade}</text>"##,
            x0 - 6.0,
            y + 4.0
        );
        decade += 1.0;
    }
    for r in &rows {
        let x = axes.px(r.n as f64);
        let _ = writeln!(
            s,
            r#"<text x="{x:.4}" y="{}" text-anchor="middle">{}</text>"#,
            y1 + 18.0,
            r.n
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">n</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 10.0
    );

    for (i, se) in series.iter().enumerate() {
        let pts: Vec<String> = se
            .points
            .iter()
            .map(|(r, v)| format!("{:.4},{:.4}", axes.px(r.n as f64), axes.py(*v)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline class="series" data-series="{}" points="{}" fill="none" stroke="{}" stroke-width="1.5"/>"#,
            se.label,
            pts.join(" "),
            se.color
        );
        for (r, v) in &se.points {
            let valid = se.label == "true" || r.valid_relaxed;
            let _ = writeln!(
                s,
                r#"<circle data-series="{}" data-n="{}" data-value="{}" cx="{:.4}" cy="{:.4}" r="3" stroke="{}" fill="{}"/>"#,
                se.label,
                r.n,
                format_float(*v),
                axes.px(r.n as f64),
                axes.py(*v),
                se.color,
                if valid { se.color } else { "none" }
            );
        }
        if se.label == "true" {
            for (r, v) in &se.points {
                let x = axes.px(r.n as f64);
                let upper = v + 2.0 * r.true_stderr;
                let lower = v - 2.0 * r.true_stderr;
                let ylo = if lower > 0.0 { axes.py(lower) } else { y1 };
                let _ = writeln!(
                    s,
                    r#"<line class="error-bar" data-n="{}" x1="{x:.4}" y1="{ylo:.4}" x2="{x:.4}" y2="{:.4}" stroke="{}"/>"#,
                    r.n,
                    axes.py(upper),
                    se.color
                );
            }
        }
        let ly = TOP + 10.0 + 20.0 * i as f64;
        let lx = x1 + 15.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{}" stroke-width="1.5"/><text class="legend" x="{}" y="{}">{}</text>"#,
            lx + 25.0,
            se.color,
            lx + 30.0,
            ly + 4.0,
            se.label
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, "</svg>");
    Some(s)
}

/// Writes `gen_moment_m{m}.svg` for every order present in `rows` and
/// returns the paths in order of `m`.
pub fn emit_svg_plots(rows: &[ExperimentRow], out_dir: &Path, meta: PlotMeta) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir)?;
    let mut orders: Vec<u32> = rows.iter().map(|r| r.m).collect();
    orders.sort_unstable();
    orders.dedup();
    let mut out = Vec::new();
    for m in orders {
        if let Some(svg) = render_svg(rows, m, meta) {
            let path = out_dir.join(format!("gen_moment_m{m}.svg"));
            std::fs::write(&path, svg)?;
            out.push(path);
        }
    }
    Ok(out)
}

/// Inverts the plot transform: pixel `y` back to a value.
pub fn value_from_pixel(y: f64, log_min: f64, log_max: f64, px_top: f64, px_bottom: f64) -> f64 {
    let frac = (y - px_top) / (px_bottom - px_top);
    10f64.powf(log_max - frac * (log_max - log_min))
}
