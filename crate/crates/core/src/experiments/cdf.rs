//! Empirical CDFs of trial errors, as CSV and as an SVG staircase plot.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::trials::TrialReport;
use crate::error::{Error, Result};
use crate::sampler::SamplerMethod;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CdfRow {
    pub method: SamplerMethod,
    pub sorted_error: f64,
    pub cdf_level: f64,
}

/// Sorted errors per method with levels `i/T`, methods in config order.
pub fn cdf_rows(report: &TrialReport) -> Vec<CdfRow> {
    let mut rows = Vec::new();
    for &method in &report.config.methods {
        let mut errs = report.errors(method);
        errs.sort_by(f64::total_cmp);
        let t = errs.len() as f64;
        rows.extend(errs.into_iter().enumerate().map(|(i, e)| CdfRow {
            method,
            sorted_error: e,
            cdf_level: (i + 1) as f64 / t,
        }));
    }
    rows
}

pub fn write_cdf_csv<W: Write>(report: &TrialReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in cdf_rows(report) {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_cdf(report: &TrialReport, path: &Path) -> Result<()> {
    if report.records.is_empty() {
        return Err(Error::Internal("empty trial report".into()));
    }
    write_cdf_csv(report, std::fs::File::create(path)?)
}

const COLORS: [&str; 4] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728"];

/// Staircase CDF per method on a log-scaled error axis, with a dashed
/// vertical line at the optimal error.
pub fn cdf_svg(report: &TrialReport) -> String {
    let rows = cdf_rows(report);
    let (w, h, pad) = (640.0, 420.0, 60.0);
    let positive = rows
        .iter()
        .map(|r| r.sorted_error)
        .chain(std::iter::once(report.optimal_relative_error))
        .filter(|e| *e > 0.0);
    let (lo, hi) = positive.fold((f64::INFINITY, 0.0f64), |(lo, hi), e| (lo.min(e), hi.max(e)));
    let (lo, hi) = if lo.is_finite() { (lo.log10().floor(), hi.log10().ceil().max(lo.log10().floor() + 1.0)) } else { (-1.0, 0.0) };
    let sx = |e: f64| pad + (e.max(1e-300).log10() - lo) / (hi - lo) * (w - 2.0 * pad);
    let sy = |c: f64| h - pad - c * (h - 2.0 * pad);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path d="M{x0},{y0} H{x1} M{x0},{y0} V{y1}" stroke="black" fill="none"/>"#,
        x0 = pad,
        y0 = h - pad,
        x1 = w - pad,
        y1 = pad
    );
    for p in lo as i32..=hi as i32 {
        let x = sx(10f64.powi(p));
        let _ = writeln!(s, r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">1e{p}</text>"#, h - pad + 18.0);
    }
    for c in [0.0, 0.5, 1.0] {
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{c}</text>"#, pad - 6.0, sy(c) + 4.0);
    }
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">relative error</text>"#, w / 2.0, h - 15.0);
    let _ = writeln!(s, r#"<text x="15" y="{:.1}" transform="rotate(-90 15 {:.1})" text-anchor="middle">CDF</text>"#, h / 2.0, h / 2.0);

    for (i, &method) in report.config.methods.iter().enumerate() {
        let color = COLORS[method.id() as usize % COLORS.len()];
        let mut d = String::new();
        for r in rows.iter().filter(|r| r.method == method) {
            let x = sx(r.sorted_error);
            if d.is_empty() {
                let _ = write!(d, "M{x:.2},{:.2}", sy(0.0));
            }
            let _ = write!(d, " H{x:.2} V{:.2}", sy(r.cdf_level));
        }
        let _ = write!(d, " H{:.2}", w - pad);
        let _ = writeln!(s, r#"<path d="{d}" stroke="{color}" fill="none" stroke-width="1.5"/>"#);
        let ly = pad + 16.0 * i as f64;
        let _ = writeln!(s, r#"<text x="{:.1}" y="{ly:.1}" fill="{color}">{method}</text>"#, w - pad - 120.0);
    }
    let x = sx(report.optimal_relative_error);
    let _ = writeln!(s, r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="gray" stroke-dasharray="4 3"/>"#, sy(0.0), sy(1.0));
    s.push_str("</svg>\n");
    s
}

pub fn emit_cdf_svg(report: &TrialReport, path: &Path) -> Result<()> {
    std::fs::write(path, cdf_svg(report))?;
    Ok(())
}
