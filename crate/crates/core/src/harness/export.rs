use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::metrics::AggregateResult;
use crate::protocol::Scheme;

pub const RESULTS_HEADER: &str = "scheme,bits,trials,mse_mean,mse_stderr,snr_db_mean,snr_db_stderr,bits_per_slot_mean";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExportPaths {
    pub csv: PathBuf,
    pub mse_chart: Option<PathBuf>,
    pub snr_chart: Option<PathBuf>,
}

pub fn write_results_csv<W: Write>(rows: &[AggregateResult], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{RESULTS_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{:e},{:e},{:.6},{:.6},{:.6}",
            r.scheme, r.resolution, r.trials, r.mse_mean, r.mse_stderr, r.snr_db_mean, r.snr_db_stderr, r.bits_per_slot_mean
        )?;
    }
    Ok(())
}

/// Writes `results.csv` into `dir`, plus `mse.svg` and `snr.svg` when
/// `charts` is set.
pub fn export(rows: &[AggregateResult], dir: impl AsRef<Path>, charts: bool) -> Result<ExportPaths> {
    if rows.is_empty() {
        return Err(Error::Empty("experiment results"));
    }
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let csv = dir.join("results.csv");
    let mut buf = Vec::new();
    write_results_csv(rows, &mut buf).map_err(|e| Error::io(&csv, e))?;
    std::fs::write(&csv, buf).map_err(|e| Error::io(&csv, e))?;
    let mut paths = ExportPaths {
        csv,
        mse_chart: None,
        snr_chart: None,
    };
    if charts {
        let (categories, mse) = series(rows, |r| r.mse_mean);
        let (_, snr) = series(rows, |r| r.snr_db_mean);
        let mse_path = dir.join("mse.svg");
        let snr_path = dir.join("snr.svg");
        let mse_svg = bar_chart_svg("Recovery MSE", "MSE", &categories, &mse, true);
        let snr_svg = bar_chart_svg("Precoding SNR", "Γ_P (dB)", &categories, &snr, false);
        std::fs::write(&mse_path, mse_svg).map_err(|e| Error::io(&mse_path, e))?;
        std::fs::write(&snr_path, snr_svg).map_err(|e| Error::io(&snr_path, e))?;
        paths.mse_chart = Some(mse_path);
        paths.snr_chart = Some(snr_path);
    }
    Ok(paths)
}

type Series = Vec<(String, Vec<Option<f64>>)>;

fn series(rows: &[AggregateResult], value: fn(&AggregateResult) -> f64) -> (Vec<String>, Series) {
    let mut categories: Vec<String> = Vec::new();
    for r in rows {
        let c = r.resolution.to_string();
        if !categories.contains(&c) {
            categories.push(c);
        }
    }
    let schemes: Vec<Scheme> = Scheme::ALL.into_iter().filter(|s| rows.iter().any(|r| r.scheme == *s)).collect();
    let data = schemes
        .into_iter()
        .map(|s| {
            let values = categories
                .iter()
                .map(|c| rows.iter().find(|r| r.scheme == s && r.resolution.to_string() == *c).map(value))
                .collect();
            (s.to_string(), values)
        })
        .collect();
    (categories, data)
}

const PALETTE: [&str; 4] = ["#4e79a7", "#e15759", "#59a14f", "#f28e2b"];

/// Self-contained grouped bar chart; `log` selects a base-10 value axis.
pub fn bar_chart_svg(title: &str, y_label: &str, categories: &[String], series: &[(String, Vec<Option<f64>>)], log: bool) -> String {
    let (w, h) = (640.0, 400.0);
    let (left, right, top, bottom) = (80.0, 150.0, 40.0, 60.0);
    let plot_w = w - left - right;
    let plot_h = h - top - bottom;

    let values: Vec<f64> = series
        .iter()
        .flat_map(|(_, v)| v.iter().flatten().copied())
        .filter(|v| v.is_finite() && (!log || *v > 0.0))
        .collect();
    let (lo, hi) = if log {
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if min.is_finite() {
            (min.log10().floor(), max.log10().ceil().max(min.log10().floor() + 1.0))
        } else {
            (0.0, 1.0)
        }
    } else {
        let min = values.iter().copied().fold(0.0, f64::min);
        let max = values.iter().copied().fold(0.0, f64::max);
        let pad = ((max - min) * 0.1).max(1e-3);
        (min - if min < 0.0 { pad } else { 0.0 }, max + if max > 0.0 { pad } else { 0.0 })
    };
    let to_y = |v: f64| {
        let t = if log { v.log10() } else { v };
        top + plot_h * (1.0 - (t - lo) / (hi - lo))
    };
    let base = if log { top + plot_h } else { to_y(0.0) };

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#, left + plot_w / 2.0, escape(title));

    let ticks: Vec<f64> = if log {
        (lo as i32..=hi as i32).map(|e| 10f64.powi(e)).collect()
    } else {
        (0..=5).map(|i| lo + (hi - lo) * i as f64 / 5.0).collect()
    };
    for t in ticks {
        let y = to_y(t);
        let label = if log { format!("1e{}", t.log10().round()) } else { format!("{t:.3}") };
        let _ = writeln!(s, r##"<line x1="{left}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/>"##, left + plot_w);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{label}</text>"#, left - 6.0, y + 4.0);
    }

    let groups = categories.len().max(1) as f64;
    let group_w = plot_w / groups;
    let bar_w = group_w * 0.8 / series.len().max(1) as f64;
    for (ci, cat) in categories.iter().enumerate() {
        let gx = left + group_w * ci as f64;
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, gx + group_w / 2.0, top + plot_h + 18.0, escape(cat));
        for (si, (_, vals)) in series.iter().enumerate() {
            let Some(v) = vals.get(ci).copied().flatten() else { continue };
            if !v.is_finite() || (log && v <= 0.0) {
                continue;
            }
            let x = gx + group_w * 0.1 + bar_w * si as f64;
            let y = to_y(v);
            let (y0, hgt) = if y < base { (y, base - y) } else { (base, y - base) };
            let _ = writeln!(
                s,
                r#"<rect x="{x:.2}" y="{y0:.2}" width="{:.2}" height="{hgt:.2}" fill="{}"><title>{v:e}</title></rect>"#,
                bar_w * 0.95,
                PALETTE[si % PALETTE.len()]
            );
        }
    }

    let _ = writeln!(s, r#"<line x1="{left}" y1="{base:.2}" x2="{:.2}" y2="{base:.2}" stroke="black"/>"#, left + plot_w);
    let _ = writeln!(s, r#"<line x1="{left}" y1="{top}" x2="{left}" y2="{:.2}" stroke="black"/>"#, top + plot_h);
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">Quantization bits</text>"#, left + plot_w / 2.0, h - 15.0);
    let _ = writeln!(
        s,
        r#"<text transform="translate(20 {:.2}) rotate(-90)" text-anchor="middle">{}</text>"#,
        top + plot_h / 2.0,
        escape(y_label)
    );
    for (si, (name, _)) in series.iter().enumerate() {
        let y = top + 10.0 + 20.0 * si as f64;
        let x = left + plot_w + 20.0;
        let _ = writeln!(s, r#"<rect x="{x}" y="{y}" width="12" height="12" fill="{}"/>"#, PALETTE[si % PALETTE.len()]);
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, x + 18.0, y + 10.0, escape(name));
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
