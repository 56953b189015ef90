use std::sync::Arc;

use rayon::prelude::*;

use super::bump::{check_bump, BumpFamily};
use super::fit::{fit_points, LogFit};
use crate::error::{Error, Result};
use crate::fields::{validate, Coefficient, Field, Grid, MatrixCoefficient, ProblemSpec};
use crate::moser::{
    alpha_candidates, assemble_bound, diagnose, exponents, first_admissible_alpha, normalize_owned,
    BoundReport, DiagnosticSettings, Diagnostics, Exponents, DEFAULT_BETA0, DEFAULT_I_MAX,
};
use crate::solver::{solve_ibvp, solve_split, SolveOptions};

/// Everything of a problem except the forcing, which the family supplies.
#[derive(Debug, Clone)]
pub struct SweepTemplate {
    pub grid: Arc<Grid>,
    pub a: MatrixCoefficient,
    pub omega: Coefficient,
    pub phi0: Field,
    pub lambda: f64,
    pub q: f64,
}

impl SweepTemplate {
    pub fn spec_with(&self, f: Field) -> Result<ProblemSpec> {
        ProblemSpec::new(
            &self.grid,
            self.a.clone(),
            self.omega.clone(),
            f,
            self.phi0.clone(),
            self.lambda,
            self.q,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    pub solve: SolveOptions,
    pub beta0: f64,
    /// Fixed `α`; `None` selects it across the sweep.
    pub alpha: Option<f64>,
    pub i_max: usize,
    /// Rows evaluated concurrently. Each live row holds a few space-time
    /// fields, so this bounds memory as well as parallelism.
    pub concurrent_rows: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            solve: SolveOptions::default(),
            beta0: DEFAULT_BETA0,
            alpha: None,
            i_max: DEFAULT_I_MAX,
            concurrent_rows: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub eps: f64,
    pub f_norm_crit: f64,
    pub f_norm_q: f64,
    pub phi_sup: f64,
    pub implied_c: f64,
    /// Exponential moment of the primary branch at the sweep's `α`.
    pub exp_moment: f64,
    pub l1_lhs: f64,
    pub l1_rhs: f64,
    /// Normalization scale `max{‖f‖_{1+N/2}, 1}`.
    pub scale: f64,
    pub bound: BoundReport,
    pub diagnostics: Diagnostics,
}

impl SweepRow {
    /// `‖φ‖∞/‖f‖_q`, the classical linear-growth ratio.
    pub fn classical_ratio(&self) -> f64 {
        self.bound.classical_ratio
    }

    /// `ln(‖f‖_q + 1)`, the regressor of the fit.
    pub fn regressor(&self) -> f64 {
        self.bound.log_term
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkippedRow {
    pub eps: f64,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub dim: usize,
    pub q: f64,
    pub beta0: f64,
    pub alpha: f64,
    pub exponents: Exponents,
    /// Sorted by `ε` descending.
    pub rows: Vec<SweepRow>,
    pub skipped: Vec<SkippedRow>,
    /// Fit of `‖φ‖∞` against `ln(‖f‖_q + 1)`, or why it was refused.
    pub fit: std::result::Result<LogFit, String>,
}

impl SweepResult {
    pub fn fit_rows(&self, rows: &[SweepRow]) -> std::result::Result<LogFit, String> {
        fit_log_law(rows).map_err(|e| e.to_string())
    }

    /// Rows with `ε` in `eps` (exact match), in row order.
    pub fn subset(&self, eps: &[f64]) -> Vec<SweepRow> {
        self.rows
            .iter()
            .filter(|r| eps.contains(&r.eps))
            .cloned()
            .collect()
    }
}

/// OLS of `‖φ‖∞` on `ln(‖f‖_q + 1)`.
pub fn fit_log_law(rows: &[SweepRow]) -> Result<LogFit> {
    let xs: Vec<f64> = rows.iter().map(SweepRow::regressor).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.phi_sup).collect();
    fit_points(&xs, &ys)
}

/// `max/min` of a positive series; `∞` if some entry is not positive.
pub fn spread(values: impl IntoIterator<Item = f64>) -> f64 {
    let (lo, hi) = values
        .into_iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if lo > 0.0 {
        hi / lo
    } else {
        f64::INFINITY
    }
}

pub fn strictly_decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] < w[0])
}

/// Outcome of one `ε` before `α` is final.
struct Evaluated {
    row: SweepRow,
    alpha_index: usize,
}

enum AlphaRule<'a> {
    Fixed(f64),
    /// Candidate list and the first index to try.
    Select(&'a [f64], usize),
}

fn evaluate(
    template: &SweepTemplate,
    family: &BumpFamily,
    eps: f64,
    opts: &SweepOptions,
    rule: AlphaRule<'_>,
) -> Result<Evaluated> {
    let grid = &template.grid;
    let q = template.q;
    let f = family.sample(eps, grid)?;
    let spec = template.spec_with(f)?;
    let report = validate(&spec);
    if !report.is_admissible() {
        let msgs: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
        return Err(Error::Config(msgs.join("; ")));
    }

    // provisional α for the exponent block of the bound; replaced below
    let provisional = match rule {
        AlphaRule::Fixed(a) => a,
        AlphaRule::Select(c, k) => c[k.min(c.len() - 1)],
    };
    let (phi1, bound) = if template.phi0.is_zero() {
        let phi = solve_ibvp(&spec, &opts.solve)?.phi;
        let bound = assemble_bound(&phi, &template.phi0, &spec.f, q, opts.beta0, provisional)?;
        (phi, bound)
    } else {
        let (s1, s2) = solve_split(&spec, &opts.solve)?;
        let phi = s1.phi.zip_with(&s2.phi, |a, b| a + b)?;
        drop(s2);
        let bound = assemble_bound(&phi, &template.phi0, &spec.f, q, opts.beta0, provisional)?;
        (s1.phi, bound)
    };
    let pair = normalize_owned(phi1, spec.into_forcing())?;

    let (alpha, alpha_index) = match rule {
        AlphaRule::Fixed(a) => (a, 0),
        AlphaRule::Select(candidates, start) => {
            let k = first_admissible_alpha(&pair.u, candidates, start).ok_or_else(|| {
                Error::Range(format!(
                    "no alpha candidate keeps the exponential moment below the ceiling at eps = {eps}"
                ))
            })?;
            (candidates[k], k)
        }
    };
    let settings = DiagnosticSettings {
        beta0: opts.beta0,
        alpha,
        i_max: opts.i_max,
    };
    let diagnostics = diagnose(&pair, q, &settings)?;
    let mut bound = bound;
    bound.exponents = exponents(opts.beta0, q, grid.dim(), alpha)?;
    let row = SweepRow {
        eps,
        f_norm_crit: bound.f_norm_crit,
        f_norm_q: bound.f_norm_q,
        phi_sup: bound.lhs,
        implied_c: bound.implied_c,
        exp_moment: diagnostics.primary().exp_moment,
        l1_lhs: diagnostics.l1.lhs,
        l1_rhs: diagnostics.l1.rhs,
        scale: pair.scale,
        bound,
        diagnostics,
    };
    Ok(Evaluated { row, alpha_index })
}

/// Solver-side failures become skipped rows; configuration problems abort.
fn is_row_failure(e: &Error) -> bool {
    matches!(
        e,
        Error::Solver { .. } | Error::Evaluation { .. } | Error::Range(_) | Error::Consistency(_)
    )
}

/// Solves, normalizes, diagnoses and bounds the problem for each `ε`, then
/// fits the logarithmic law.
///
/// Without a fixed `α`, the largest candidate `2^{-k}` admissible for every
/// row is chosen; rows evaluated with a larger candidate than the final one
/// are evaluated again.
pub fn run_sweep(
    template: &SweepTemplate,
    family: &BumpFamily,
    eps_list: &[f64],
    opts: &SweepOptions,
) -> Result<SweepResult> {
    if eps_list.is_empty() {
        return Err(Error::EmptySweep);
    }
    opts.solve.check()?;
    let dim = template.grid.dim();
    let q = template.q;
    let r = (1.0 + opts.beta0) * q / (q - 1.0);
    if let Some(a) = opts.alpha {
        exponents(opts.beta0, q, dim, a)?;
    } else {
        exponents(opts.beta0, q, dim, r / 2.0)?;
    }
    let mut eps: Vec<f64> = eps_list.to_vec();
    eps.sort_by(|a, b| b.total_cmp(a));
    eps.dedup();
    let center = family.center_on(&template.grid);
    for &e in &eps {
        check_bump(e, &center, &template.grid)?;
    }

    let candidates = alpha_candidates(r);
    let chunk = opts.concurrent_rows.max(1);
    let run = |list: &[f64], start: usize| -> Result<Vec<(f64, std::result::Result<Evaluated, Error>)>> {
        let mut out = Vec::with_capacity(list.len());
        for group in list.chunks(chunk) {
            let results: Vec<_> = group
                .par_iter()
                .map(|&e| {
                    let rule = match opts.alpha {
                        Some(a) => AlphaRule::Fixed(a),
                        None => AlphaRule::Select(&candidates, start),
                    };
                    (e, evaluate(template, family, e, opts, rule))
                })
                .collect();
            for (e, res) in results {
                match res {
                    Err(err) if !is_row_failure(&err) => return Err(err),
                    other => out.push((e, other)),
                }
            }
        }
        Ok(out)
    };

    let mut outcomes = run(&eps, 0)?;
    if opts.alpha.is_none() {
        let k = outcomes
            .iter()
            .filter_map(|(_, r)| r.as_ref().ok().map(|ev| ev.alpha_index))
            .max()
            .unwrap_or(0);
        let redo: Vec<f64> = outcomes
            .iter()
            .filter(|(_, r)| matches!(r, Ok(ev) if ev.alpha_index < k))
            .map(|(e, _)| *e)
            .collect();
        if !redo.is_empty() {
            let again = run(&redo, k)?;
            for (e, res) in again {
                let slot = outcomes.iter_mut().find(|(x, _)| *x == e).expect("row exists");
                slot.1 = res;
            }
        }
    }

    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    let mut alpha = opts.alpha;
    for (e, res) in outcomes {
        match res {
            Ok(ev) => {
                alpha.get_or_insert(ev.row.diagnostics.alpha);
                rows.push(ev.row);
            }
            Err(err) => skipped.push(SkippedRow {
                eps: e,
                reason: err.to_string(),
            }),
        }
    }
    let alpha = alpha.unwrap_or(candidates[0]);
    let fit = fit_log_law(&rows).map_err(|e| e.to_string());
    Ok(SweepResult {
        dim,
        q,
        beta0: opts.beta0,
        alpha,
        exponents: exponents(opts.beta0, q, dim, alpha)?,
        rows,
        skipped,
        fit,
    })
}
