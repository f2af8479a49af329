//! CSV and SVG output of experiment rows.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::MetricRow;
use crate::error::{domain, Error, Result};

pub const METRICS_HEADER: [&str; 10] = [
    "scenario",
    "gdr",
    "n",
    "D",
    "eps",
    "raw_bytes",
    "batch_bytes",
    "online_bytes",
    "online_pred_bytes",
    "ratio",
];

const DETAIL_EXTRA: [&str; 8] = [
    "repetitions",
    "batch_bytes_sd",
    "batch_table_bytes",
    "ratio_sd",
    "replace_ratio",
    "huffman_ratio",
    "hit_rate",
    "bytes_per_object",
];

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.into())
}

fn num(x: f64) -> String {
    format!("{x:.4}")
}

fn base_fields(r: &MetricRow) -> Vec<String> {
    vec![
        r.point.scenario.clone(),
        r.point.gdr.to_string(),
        r.point.n.to_string(),
        r.point.period.to_string(),
        r.point.epsilon.to_string(),
        num(r.raw_bytes),
        num(r.batch_bytes),
        num(r.online_bytes),
        num(r.online_pred_bytes),
        num(r.ratio),
    ]
}

pub fn write_metrics_csv<W: Write>(rows: &[MetricRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(METRICS_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record(base_fields(r)).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Metrics plus spread, table overhead, both coder ratios and hit rate.
pub fn write_details_csv<W: Write>(rows: &[MetricRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(METRICS_HEADER.iter().chain(DETAIL_EXTRA.iter()))
        .map_err(csv_err)?;
    for r in rows {
        let mut f = base_fields(r);
        f.extend([
            r.repetitions.to_string(),
            num(r.batch_bytes_sd),
            num(r.batch_table_bytes),
            num(r.ratio_sd),
            num(r.replace_ratio),
            num(r.huffman_ratio),
            num(r.hit_rate),
            num(r.bytes_per_object()),
        ]);
        w.write_record(f).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// A named polyline.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Static line plot with axes, five ticks per axis and a legend.
pub fn line_plot_svg(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let (w, h) = (640.0, 420.0);
    let (left, right, top, bottom) = (70.0, 170.0, 40.0, 50.0);
    let pts = series.iter().flat_map(|s| s.points.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y1) = (0.0, 1.0, 1.0);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let pw = w - left - right;
    let ph = h - top - bottom;
    let sx = |x: f64| left + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| top + ph - (y - y0) / (y1 - y0) * ph;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
        left + pw / 2.0,
        escape(title)
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{left}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="black"/>"#,
        top + ph,
        left + pw,
        top + ph
    );
    let _ = writeln!(svg, r#"<line x1="{left}" y1="{top}" x2="{left}" y2="{:.1}" stroke="black"/>"#, top + ph);
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            sx(xv),
            top + ph + 18.0,
            tick(xv)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            left - 6.0,
            sy(yv) + 4.0,
            tick(yv)
        );
        let _ = writeln!(
            svg,
            r##"<line x1="{left}" y1="{0:.1}" x2="{1:.1}" y2="{0:.1}" stroke="#dddddd"/>"##,
            sy(yv),
            left + pw
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        left + pw / 2.0,
        h - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{0:.1}" text-anchor="middle" transform="rotate(-90 18 {0:.1})">{1}</text>"#,
        top + ph / 2.0,
        escape(y_label)
    );
    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let path: Vec<String> = s.points.iter().map(|&(x, y)| format!("{:.1},{:.1}", sx(x), sy(y))).collect();
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            path.join(" ")
        );
        for &(x, y) in &s.points {
            let _ = writeln!(svg, r#"<circle cx="{:.1}" cy="{:.1}" r="3" fill="{color}"/>"#, sx(x), sy(y));
        }
        let ly = top + 10.0 + 18.0 * i as f64;
        let lx = w - right + 15.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/>"#,
            lx + 20.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}">{}</text>"#,
            lx + 26.0,
            ly + 4.0,
            escape(&s.name)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn tick(v: f64) -> String {
    if v.abs() >= 100.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

fn rows_of<'a>(rows: &'a [MetricRow], scenario: &str) -> Vec<&'a MetricRow> {
    rows.iter().filter(|r| r.point.scenario == scenario).collect()
}

fn grouped(rows: &[&MetricRow], key: impl Fn(&MetricRow) -> String, xy: impl Fn(&MetricRow) -> (f64, f64)) -> Vec<Series> {
    let mut out: Vec<Series> = Vec::new();
    for r in rows {
        let name = key(r);
        match out.iter_mut().find(|s| s.name == name) {
            Some(s) => s.points.push(xy(r)),
            None => out.push(Series {
                name,
                points: vec![xy(r)],
            }),
        }
    }
    for s in &mut out {
        s.points.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    out
}

/// Writes `metrics.csv`, `details.csv` and one SVG plot per sweep present
/// in `rows` into `dir`. Returns the written paths.
pub fn emit_report(rows: &[MetricRow], dir: &Path) -> Result<Vec<PathBuf>> {
    if rows.is_empty() {
        return domain("no rows to report");
    }
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let metrics = dir.join("metrics.csv");
    write_metrics_csv(rows, fs::File::create(&metrics)?)?;
    written.push(metrics);
    let details = dir.join("details.csv");
    write_details_csv(rows, fs::File::create(&details)?)?;
    written.push(details);

    let mut plots: Vec<(&str, String)> = Vec::new();
    let gdr = rows_of(rows, "gdr");
    if !gdr.is_empty() {
        let s = grouped(&gdr, |r| format!("n = {}", r.point.n), |r| (r.point.gdr, r.ratio));
        plots.push(("ratio_vs_gdr.svg", line_plot_svg("Compression ratio vs GDR", "GDR (hops)", "ratio", &s)));
        let mut by_n = grouped(&gdr, |r| format!("GDR = {}", r.point.gdr), |r| {
            (r.point.n as f64, r.bytes_per_object())
        });
        by_n.extend(grouped(&rows_of(rows, "identical"), |_| "GDR = 0".into(), |r| {
            (r.point.n as f64, r.bytes_per_object())
        }));
        plots.push((
            "bytes_per_object_vs_n.svg",
            line_plot_svg("Batch bytes per object vs group size", "group size n", "bytes / object", &by_n),
        ));
        let mut hit: Vec<&MetricRow> = gdr.clone();
        hit.sort_by(|a, b| a.hit_rate.total_cmp(&b.hit_rate));
        let s = vec![
            Series {
                name: "Replace+Huffman".into(),
                points: hit.iter().map(|r| (r.hit_rate, r.replace_ratio)).collect(),
            },
            Series {
                name: "Huffman only".into(),
                points: hit.iter().map(|r| (r.hit_rate, r.huffman_ratio)).collect(),
            },
        ];
        plots.push((
            "ratio_vs_hit_rate.svg",
            line_plot_svg("Coder ratio vs prediction hit rate", "hit rate", "ratio", &s),
        ));
    }
    let period = rows_of(rows, "period");
    if !period.is_empty() {
        let pts = |f: fn(&MetricRow) -> f64| period.iter().map(|r| (r.point.period as f64, f(r))).collect();
        let s = vec![
            Series {
                name: "batch".into(),
                points: pts(|r| r.batch_bytes),
            },
            Series {
                name: "online".into(),
                points: pts(|r| r.online_bytes),
            },
            Series {
                name: "online + prediction".into(),
                points: pts(|r| r.online_pred_bytes),
            },
        ];
        plots.push(("bytes_vs_period.svg", line_plot_svg("Bytes vs batch period", "D (intervals)", "bytes", &s)));
    }
    let eps = rows_of(rows, "epsilon");
    if !eps.is_empty() {
        let s = vec![Series {
            name: format!("n = {}", eps[0].point.n),
            points: eps.iter().map(|r| (r.point.epsilon as f64, r.ratio)).collect(),
        }];
        plots.push((
            "ratio_vs_epsilon.svg",
            line_plot_svg("Compression ratio vs error bound", "epsilon (hops)", "ratio", &s),
        ));
    }
    for (name, svg) in plots {
        let path = dir.join(name);
        fs::write(&path, svg)?;
        written.push(path);
    }
    Ok(written)
}
