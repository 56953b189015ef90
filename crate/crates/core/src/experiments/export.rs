use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::sweep::{spread, strictly_decreasing, SweepResult};
use crate::error::{Error, Result};
use crate::format::sig12;

pub const SWEEP_CSV_HEADER: &str = "eps,f_norm_crit,f_norm_q,phi_sup,implied_c,exp_moment,l1_lhs,l1_rhs";

/// One line of `sweep.csv`. Values are written in shortest round-trip form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepCsvRow {
    pub eps: f64,
    pub f_norm_crit: f64,
    pub f_norm_q: f64,
    pub phi_sup: f64,
    pub implied_c: f64,
    pub exp_moment: f64,
    pub l1_lhs: f64,
    pub l1_rhs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Svg,
    Text,
}

pub fn csv_rows(result: &SweepResult) -> Vec<SweepCsvRow> {
    result
        .rows
        .iter()
        .map(|r| SweepCsvRow {
            eps: r.eps,
            f_norm_crit: r.f_norm_crit,
            f_norm_q: r.f_norm_q,
            phi_sup: r.phi_sup,
            implied_c: r.implied_c,
            exp_moment: r.exp_moment,
            l1_lhs: r.l1_lhs,
            l1_rhs: r.l1_rhs,
        })
        .collect()
}

pub fn export(result: &SweepResult, path: &Path, format: ExportFormat) -> Result<()> {
    match format {
        ExportFormat::Csv => write_csv(&csv_rows(result), path),
        ExportFormat::Svg => write_text(path, &render_svg(result)),
        ExportFormat::Text => write_text(path, &render_text(result)),
    }
}

fn write_text(path: &Path, body: &str) -> Result<()> {
    std::fs::write(path, body).map_err(|e| Error::io(path, e))
}

pub fn write_csv(rows: &[SweepCsvRow], path: &Path) -> Result<()> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(csv_err)?;
    // explicit header so an empty sweep still gets one
    w.write_record(SWEEP_CSV_HEADER.split(',')).map_err(csv_err)?;
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_csv(path: &Path) -> Result<Vec<SweepCsvRow>> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let header: Vec<String> = r.headers().map_err(csv_err)?.iter().map(str::to_owned).collect();
    if header.join(",") != SWEEP_CSV_HEADER {
        return Err(Error::Config(format!(
            "{}: header {:?} does not match {SWEEP_CSV_HEADER}",
            path.display(),
            header.join(",")
        )));
    }
    r.deserialize().map(|row| row.map_err(csv_err)).collect()
}

pub fn render_text(result: &SweepResult) -> String {
    let mut s = String::new();
    let e = &result.exponents;
    let _ = writeln!(s, "N = {}", result.dim);
    let _ = writeln!(s, "q = {}", sig12(result.q));
    let _ = writeln!(s, "beta0 = {}", sig12(result.beta0));
    let _ = writeln!(s, "chi = {}", sig12(e.chi));
    let _ = writeln!(s, "alpha0 = {}", sig12(e.alpha0));
    let _ = writeln!(s, "r = {}", sig12(e.r));
    let _ = writeln!(s, "alpha = {}", sig12(e.alpha));
    let _ = writeln!(s, "final_exponent = {}", sig12(e.final_exponent));
    let _ = writeln!(s, "rows = {}", result.rows.len());
    let _ = writeln!(
        s,
        "{:>14} {:>14} {:>14} {:>14} {:>14} {:>14} {:>6} {:>6}",
        "eps", "f_norm_crit", "f_norm_q", "phi_sup", "implied_c", "exp_moment", "l1", "interp"
    );
    for r in &result.rows {
        let interp = r.diagnostics.branches().iter().all(|b| b.interpolation.pass);
        let _ = writeln!(
            s,
            "{:>14} {:>14} {:>14} {:>14} {:>14} {:>14} {:>6} {:>6}",
            sig12(r.eps),
            sig12(r.f_norm_crit),
            sig12(r.f_norm_q),
            sig12(r.phi_sup),
            sig12(r.implied_c),
            sig12(r.exp_moment),
            if r.diagnostics.l1.pass { "pass" } else { "FAIL" },
            if interp { "pass" } else { "FAIL" },
        );
    }
    for k in &result.skipped {
        let _ = writeln!(s, "skipped eps = {}: {}", sig12(k.eps), k.reason);
    }
    if !result.rows.is_empty() {
        let ratios: Vec<f64> = result.rows.iter().map(|r| r.classical_ratio()).collect();
        let _ = writeln!(s, "classical_ratio strictly decreasing = {}", strictly_decreasing(&ratios));
        let _ = writeln!(
            s,
            "implied_c spread = {}",
            sig12(spread(result.rows.iter().map(|r| r.implied_c)))
        );
        let _ = writeln!(
            s,
            "exp_moment spread = {}",
            sig12(spread(result.rows.iter().map(|r| r.exp_moment)))
        );
    }
    match &result.fit {
        Ok(fit) => {
            let _ = writeln!(
                s,
                "fit phi_sup = {} * ln(f_norm_q + 1) + {}  (R^2 = {}, curvature = {})",
                sig12(fit.slope),
                sig12(fit.intercept),
                sig12(fit.r_squared),
                sig12(fit.curvature)
            );
        }
        Err(reason) => {
            let _ = writeln!(s, "fit refused: {reason}");
        }
    }
    s
}

/// Scatter of `(ln(‖f‖_q + 1), ‖φ‖∞)` with the fitted line.
pub fn render_svg(result: &SweepResult) -> String {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const M: f64 = 60.0;
    let pts: Vec<(f64, f64)> = result.rows.iter().map(|r| (r.regressor(), r.phi_sup)).collect();
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let (mut x0, mut x1, mut y0, mut y1) = pts.iter().fold(
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
        |(a, b, c, d), &(x, y)| (a.min(x), b.max(x), c.min(y), d.max(y)),
    );
    if pts.is_empty() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 - x0 <= 0.0 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    y0 = y0.min(0.0);
    if y1 - y0 <= 0.0 {
        y1 = y0 + 1.0;
    }
    let (pad_x, pad_y) = (0.05 * (x1 - x0), 0.05 * (y1 - y0));
    let (x0, x1, y0, y1) = (x0 - pad_x, x1 + pad_x, y0, y1 + pad_y);
    let sx = |x: f64| M + (x - x0) / (x1 - x0) * (W - 2.0 * M);
    let sy = |y: f64| H - M - (y - y0) / (y1 - y0) * (H - 2.0 * M);
    let _ = writeln!(
        s,
        r#"<path d="M{a} {b} L{c} {b} M{a} {b} L{a} {d}" stroke="black" fill="none"/>"#,
        a = M,
        b = H - M,
        c = W - M,
        d = M
    );
    for (v, anchor) in [(x0, "start"), (x1, "end")] {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="{anchor}">{}</text>"#,
            sx(v),
            H - M + 16.0,
            sig12(v)
        );
    }
    for v in [y0, y1] {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{}</text>"#,
            M - 4.0,
            sy(v) + 4.0,
            sig12(v)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-size="13" text-anchor="middle">ln(|f|_q + 1)</text>"#,
        W / 2.0,
        H - 18.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" font-size="13" text-anchor="middle" transform="rotate(-90 16 {:.2})">|phi|_inf</text>"#,
        H / 2.0,
        H / 2.0
    );
    if let Ok(fit) = &result.fit {
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="steelblue" stroke-width="1.5"/>"#,
            sx(x0),
            sy(fit.slope * x0 + fit.intercept),
            sx(x1),
            sy(fit.slope * x1 + fit.intercept)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="12">slope {} R^2 {}</text>"#,
            M + 8.0,
            M - 8.0,
            sig12(fit.slope),
            sig12(fit.r_squared)
        );
    }
    for (x, y) in &pts {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="firebrick"/>"#,
            sx(*x),
            sy(*y)
        );
    }
    s.push_str("</svg>\n");
    s
}
