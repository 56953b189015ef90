use std::fmt::Write as _;
use std::path::Path;

use super::{BoundReport, Diagnostics, MoserTrace};
use crate::error::{Error, Result};
use crate::format::sig12;

pub const TRACE_CSV_HEADER: &str = "i,p,norm,ratio";

/// One ladder row per line; `ratio` is empty on the first row.
pub fn write_trace_csv(trace: &MoserTrace, path: &Path) -> Result<()> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut out = csv::Writer::from_path(path).map_err(csv_err)?;
    out.write_record(TRACE_CSV_HEADER.split(',')).map_err(csv_err)?;
    for row in &trace.ladder {
        out.write_record([
            row.i.to_string(),
            format!("{:?}", row.exponent),
            format!("{:?}", row.norm),
            row.ratio.map(|r| format!("{r:?}")).unwrap_or_default(),
        ])
        .map_err(csv_err)?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Text summary keyed by symbol names.
pub fn render_summary(report: &BoundReport, diagnostics: Option<&Diagnostics>) -> String {
    let mut s = String::new();
    let e = &report.exponents;
    let _ = writeln!(s, "phi_sup = {}", sig12(report.lhs));
    let _ = writeln!(s, "phi0_sup = {}", sig12(report.phi0_sup));
    let _ = writeln!(s, "f_norm_crit = {}", sig12(report.f_norm_crit));
    let _ = writeln!(s, "f_norm_q = {}", sig12(report.f_norm_q));
    let _ = writeln!(s, "log_term = {}", sig12(report.log_term));
    let _ = writeln!(s, "rhs_unit_c = {}", sig12(report.rhs_unit_c));
    let _ = writeln!(s, "implied_c = {}", sig12(report.implied_c));
    let _ = writeln!(s, "classical_ratio = {}", sig12(report.classical_ratio));
    let _ = writeln!(s, "chi = {}", sig12(e.chi));
    let _ = writeln!(s, "alpha0 = {}", sig12(e.alpha0));
    let _ = writeln!(s, "r = {}", sig12(e.r));
    let _ = writeln!(s, "alpha = {}", sig12(e.alpha));
    let _ = writeln!(s, "final_exponent = {}", sig12(e.final_exponent));
    if let Some(d) = diagnostics {
        let _ = writeln!(
            s,
            "l1_check: lhs = {} rhs = {} slack = {} pass = {}",
            sig12(d.l1.lhs),
            sig12(d.l1.rhs),
            sig12(d.l1.slack),
            d.l1.pass
        );
        for b in d.branches() {
            let t = &b.trace;
            let last = t.last();
            let _ = writeln!(
                s,
                "[{}] u_max = {} exp_moment = {} ladder_last_p = {} ladder_last = {} extrapolated_sup = {} measured_sup = {} monotone = {}{}",
                b.sign.label(),
                sig12(b.u_max),
                sig12(b.exp_moment),
                sig12(last.exponent),
                sig12(last.norm),
                sig12(t.extrapolated_sup),
                sig12(t.measured_sup),
                t.is_monotone(1e-12),
                if t.truncated { " (ladder truncated at p = 512)" } else { "" }
            );
            let _ = writeln!(
                s,
                "[{}] interpolation_check: lhs = {} rhs = {} pass = {}",
                b.sign.label(),
                sig12(b.interpolation.lhs),
                sig12(b.interpolation.rhs),
                b.interpolation.pass
            );
        }
        let _ = writeln!(s, "primary branch = {}", d.primary().sign.label());
    }
    s
}
