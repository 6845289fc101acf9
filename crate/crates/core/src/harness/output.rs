//! CSV tables and minimal self-contained SVG line plots.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::config::OutputFormat;
use super::{ResultRow, ResultTable};
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "scheme,n_tx,n_rx,snr_db,metric,value,trials,stderr";

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Header plus one LF-terminated line per row; floats carry 17 significant digits.
pub fn write_csv<W: Write>(table: &ResultTable, mut out: W) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in &table.rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.scheme,
            r.n_tx,
            r.n_rx,
            r.snr_db.map(fmt_f64).unwrap_or_default(),
            r.metric,
            fmt_f64(r.value),
            r.trials,
            fmt_f64(r.stderr)
        )?;
    }
    Ok(())
}

/// Writes `<stem>.csv` and/or `<stem>.svg` into `dir`.
pub fn emit_results(
    table: &ResultTable,
    dir: &Path,
    stem: &str,
    format: OutputFormat,
) -> Result<Vec<PathBuf>> {
    if table.rows.is_empty() {
        return Err(Error::Degenerate("refusing to emit an empty result table"));
    }
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    if format.csv() {
        let path = dir.join(format!("{stem}.csv"));
        let mut buf = Vec::new();
        write_csv(table, &mut buf)?;
        std::fs::write(&path, buf)?;
        written.push(path);
    }
    if format.svg() {
        let path = dir.join(format!("{stem}.svg"));
        std::fs::write(&path, render_svg(table, stem))?;
        written.push(path);
    }
    Ok(written)
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];
const DASHES: [&str; 4] = ["", "6,3", "2,2", "8,3,2,3"];

struct Series {
    label: String,
    points: Vec<(f64, f64)>,
}

// The plotted metric is the first metric in the table. Rows with an SNR are
// plotted against SNR (one series per scheme and size); rows without one are
// plotted against n_rx (one series per scheme and n_tx).
fn collect_series(table: &ResultTable) -> (Vec<Series>, String, String) {
    let Some(first) = table.rows.first() else {
        return (Vec::new(), String::new(), String::new());
    };
    let metric = first.metric.clone();
    let by_snr = first.snr_db.is_some();
    let mut map: BTreeMap<(String, usize, usize), Vec<(f64, f64)>> = BTreeMap::new();
    let mut order = Vec::new();
    for r in table.rows.iter().filter(|r| r.metric == metric) {
        let key = if by_snr {
            (r.scheme.clone(), r.n_tx, r.n_rx)
        } else {
            (r.scheme.clone(), r.n_tx, 0)
        };
        if !map.contains_key(&key) {
            order.push(key.clone());
        }
        map.entry(key).or_default().push(point(r, by_snr));
    }
    let series = order
        .into_iter()
        .map(|key| {
            let label = if by_snr {
                format!("{} ({}x{})", key.0, key.2, key.1)
            } else {
                format!("{} (N_T={})", key.0, key.1)
            };
            let mut points = map.remove(&key).unwrap_or_default();
            points.sort_by(|a, b| a.0.total_cmp(&b.0));
            Series { label, points }
        })
        .collect();
    let x_label = if by_snr { "SNR [dB]" } else { "N_R" };
    (series, x_label.to_string(), metric)
}

fn point(r: &ResultRow, by_snr: bool) -> (f64, f64) {
    let x = if by_snr {
        r.snr_db.unwrap_or(0.0)
    } else {
        r.n_rx as f64
    };
    (x, r.value)
}

/// Log-scale line plot, one polyline per series with at least one positive value.
pub fn render_svg(table: &ResultTable, title: &str) -> String {
    let (series, x_label, metric) = collect_series(table);
    let (w, h) = (760.0, 500.0);
    let (left, right, top, bottom) = (80.0, 230.0, 40.0, 60.0);
    let (pw, ph) = (w - left - right, h - top - bottom);

    let positive: Vec<(f64, f64)> = series
        .iter()
        .flat_map(|s| s.points.iter().copied())
        .filter(|p| p.1 > 0.0 && p.1.is_finite())
        .collect();
    let (x_min, x_max) = positive
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| {
            (a.min(p.0), b.max(p.0))
        });
    let (y_min, y_max) = positive
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| {
            (a.min(p.1), b.max(p.1))
        });
    let (x_min, x_max) = if x_min < x_max {
        (x_min, x_max)
    } else {
        (x_min - 1.0, x_min + 1.0)
    };
    let (dec_lo, dec_hi) = if positive.is_empty() {
        (0, 1)
    } else {
        let lo = y_min.log10().floor() as i32;
        let hi = y_max.log10().ceil() as i32;
        (lo, hi.max(lo + 1))
    };
    let sx = |x: f64| left + (x - x_min) / (x_max - x_min) * pw;
    let sy = |y: f64| top + ph - (y.log10() - dec_lo as f64) / (dec_hi - dec_lo) as f64 * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r#"<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
        left + pw / 2.0,
        escape(title)
    );
    for d in dec_lo..=dec_hi {
        let y = sy(10f64.powi(d));
        let _ = writeln!(
            s,
            r##"<line x1="{left}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/>"##,
            left + pw
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">1e{d}</text>"#,
            left - 6.0,
            y + 4.0
        );
    }
    for i in 0..=5 {
        let x = x_min + (x_max - x_min) * i as f64 / 5.0;
        let px = sx(x);
        let _ = writeln!(
            s,
            r##"<line x1="{px:.2}" y1="{top}" x2="{px:.2}" y2="{:.2}" stroke="#eeeeee"/>"##,
            top + ph
        );
        let _ = writeln!(
            s,
            r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            top + ph + 18.0,
            trim_num(x)
        );
    }
    let _ = writeln!(
        s,
        r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        left + pw / 2.0,
        h - 15.0,
        escape(&x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
        top + ph / 2.0,
        top + ph / 2.0,
        escape(&metric)
    );

    for (i, ser) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let dash = DASHES[(i / PALETTE.len()) % DASHES.len()];
        let pts: Vec<String> = ser
            .points
            .iter()
            .filter(|p| p.1 > 0.0 && p.1.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let ly = top + 10.0 + 18.0 * i as f64;
        let lx = left + pw + 15.0;
        if pts.is_empty() {
            let _ = writeln!(
                s,
                r##"<text x="{lx}" y="{:.2}" fill="#666666">{} (all zero)</text>"##,
                ly + 4.0,
                escape(&ser.label)
            );
            continue;
        }
        let dash_attr = if dash.is_empty() {
            String::new()
        } else {
            format!(r#" stroke-dasharray="{dash}""#)
        };
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.8"{dash_attr} points="{}"/>"#,
            pts.join(" ")
        );
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"{dash_attr}/>"#,
            lx + 24.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 30.0,
            ly + 4.0,
            escape(&ser.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn trim_num(v: f64) -> String {
    if (v - v.round()).abs() < 1e-9 {
        format!("{}", v.round() as i64)
    } else {
        format!("{v:.2}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(scheme: &str, snr: f64, value: f64) -> ResultRow {
        ResultRow {
            scheme: scheme.into(),
            n_tx: 4,
            n_rx: 4,
            snr_db: Some(snr),
            metric: "nmse".into(),
            value,
            trials: 10,
            stderr: 0.01,
        }
    }

    #[test]
    fn csv_shape_and_precision() {
        let t = ResultTable {
            rows: vec![
                row("milac-ls", 0.0, 0.1),
                row("milac-ls", 10.0, 0.01),
                row("digital-ls", 0.0, 1.0 / 3.0),
            ],
        };
        let mut buf = Vec::new();
        write_csv(&t, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(!text.contains('\r'));
        assert!(text.starts_with(CSV_HEADER));
        let last = text.lines().nth(3).unwrap();
        let value: f64 = last.split(',').nth(5).unwrap().parse().unwrap();
        assert_eq!(value, 1.0 / 3.0);
        assert!(last.contains("3.3333333333333331e-1"));
    }

    #[test]
    fn svg_has_one_polyline_per_scheme() {
        let t = ResultTable {
            rows: vec![
                row("milac-ls", 0.0, 1.0),
                row("milac-ls", 10.0, 0.1),
                row("milac-mmse", 0.0, 0.5),
                row("milac-mmse", 10.0, 0.05),
            ],
        };
        let svg = render_svg(&t, "nmse");
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(!svg.contains("href"));
    }

    #[test]
    fn zero_series_are_listed_not_drawn() {
        let mut a = row("milac-ls", 0.0, 0.0);
        a.snr_db = None;
        let mut b = row("digital-ls", 0.0, 5e5);
        b.snr_db = None;
        let svg = render_svg(&ResultTable { rows: vec![a, b] }, "ops");
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert!(svg.contains("(all zero)"));
    }

    #[test]
    fn emit_rejects_empty_and_writes_files() {
        let dir = tempfile::tempdir().unwrap();
        assert!(
            emit_results(&ResultTable::default(), dir.path(), "x", OutputFormat::Both).is_err()
        );
        let t = ResultTable {
            rows: vec![row("milac-ls", 0.0, 0.5)],
        };
        let files = emit_results(&t, dir.path(), "x", OutputFormat::Both).unwrap();
        assert_eq!(files.len(), 2);
        assert!(files.iter().all(|f| f.exists()));
    }
}
