//! Executable diagnostics of the logarithmic sup-norm bound.
//!
//! The pipeline for a forced solution `φ₁` with forcing `f`:
//!
//! 1. [`normalize`]: `u = φ₁/s`, `g = f/s` with `s = max{‖f‖_{1+N/2}, 1}`.
//! 2. [`l1_check`]: `sup_t ∫|u| dx ≤ ∫∫|g|`.
//! 3. [`exp_change`]: `v = eᵘ`, `w = max{v, 1}`.
//! 4. [`exp_moment`]: `∫∫ e^{α(1+2/N)u}` stays bounded for small `α`.
//! 5. [`trace`]: averaged norms of `w` along `p_i = (1+β₀)(q/(q−1))χ^i`.
//! 6. [`interpolation_check`]: `‖w‖_r ≤ ‖w‖∞^{(r−α)/r} ‖w‖_α^{α/r}`.
//! 7. [`assemble_bound`]: both sides of the final inequality and the
//!    implied constant.
//!
//! [`diagnose`] runs steps 2–6 on `u` and on `−u`.

mod exponents;
mod report;
mod transformed;

pub use exponents::{
    chi, critical_exponent, exponents, geometric_sum, ladder, weighted_geometric_sum, Exponents,
};
pub use report::{render_summary, write_trace_csv, TRACE_CSV_HEADER};
pub use transformed::transformed_equation_residual;

use crate::error::{Error, Result};
use crate::fields::Field;
use crate::norms::{ess_sup, lq_norm_from_log, lq_spacetime, sup_t_spatial_l1, Normalization};
use crate::reduce::{max_by, pairwise_sum_by};

pub const DEFAULT_BETA0: f64 = 1.0;

/// Ladder exponents above this are not evaluated.
pub const LADDER_CAP: f64 = 512.0;

/// Relative slack of the L¹ check before discretization slack.
pub const L1_TOLERANCE: f64 = 1e-6;

/// Coefficient `C` of the discretization slack `C(h² + dt)` in the L¹ check.
pub const L1_SLACK_FACTOR: f64 = 10.0;

/// Relative slack of the interpolation check.
pub const INTERPOLATION_TOLERANCE: f64 = 1e-10;

/// Moments above `MOMENT_CEILING·|Ω_T|` disqualify an `α` candidate.
pub const MOMENT_CEILING: f64 = 10.0;

/// Candidates are `α = 2^{-k}` for `k = 0..=MAX_ALPHA_HALVINGS`.
pub const MAX_ALPHA_HALVINGS: u32 = 30;

#[derive(Debug, Clone)]
pub struct NormalizedPair {
    pub u: Field,
    pub g: Field,
    pub scale: f64,
}

/// Divides `φ₁` and `f` by `max{‖f‖_{1+N/2}, 1}`; `φ₁` is scaled in place.
pub fn normalize(phi1: Field, f: &Field) -> Result<NormalizedPair> {
    normalize_owned(phi1, f.clone())
}

/// [`normalize`] taking ownership of the forcing, scaling both in place.
pub fn normalize_owned(phi1: Field, f: Field) -> Result<NormalizedPair> {
    phi1.check_compatible(&f)?;
    let dim = f.grid().dim();
    let crit = lq_spacetime(&f, critical_exponent(dim), Normalization::Raw)?;
    let scale = crit.max(1.0);
    let (mut u, mut g) = (phi1, f);
    if scale != 1.0 {
        u.scale_in_place(1.0 / scale)?;
        g.scale_in_place(1.0 / scale)?;
    }
    Ok(NormalizedPair { u, g, scale })
}

/// `v = eᵘ` and `w = max{v, 1}` pointwise.
pub fn exp_change(u: &Field) -> Result<(Field, Field)> {
    let max_u = u.max_value();
    if max_u >= f64::MAX.ln() {
        return Err(Error::Range(format!(
            "exp(u) overflows: max u = {max_u}; normalize the forcing first"
        )));
    }
    let v = u.map(f64::exp)?;
    let w = v.map(|x| x.max(1.0))?;
    Ok((v, w))
}

/// `∫∫ exp(α(1+2/N)u) dx dt`.
pub fn exp_moment(u: &Field, alpha: f64) -> Result<f64> {
    signed_moment(u, alpha, Sign::Plus)
}

/// `∫∫ exp(α(1+2/N)·(±u))`, without materializing `−u`.
fn signed_moment(u: &Field, alpha: f64, sign: Sign) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!("alpha = {alpha} must be positive")));
    }
    let dim = u.grid().dim() as f64;
    let k = alpha * (1.0 + 2.0 / dim) * sign.factor();
    let values = &u.values()[u.quadrature_range()];
    let sum = pairwise_sum_by(values.len(), |i| (k * values[i]).exp());
    let moment = sum * u.sample_weight();
    if !moment.is_finite() {
        return Err(Error::Range(format!(
            "exponential moment overflows at alpha = {alpha} (max {}u = {}); alpha is too large",
            if sign == Sign::Minus { "-" } else { "" },
            signed_max(u, sign)
        )));
    }
    Ok(moment)
}

fn signed_max(u: &Field, sign: Sign) -> f64 {
    match sign {
        Sign::Plus => u.max_value(),
        Sign::Minus => -u.min_value(),
    }
}

/// `ln w = max{±u, 0}` for `w = max{e^{±u}, 1}`, without forming `w`.
fn truncated_log(u: &Field, sign: Sign) -> Result<Field> {
    let k = sign.factor();
    u.map(|x| (k * x).max(0.0))
}

/// Candidate `α` values, largest first, restricted to `α < r`.
pub fn alpha_candidates(r: f64) -> Vec<f64> {
    (0..=MAX_ALPHA_HALVINGS)
        .map(|k| 0.5f64.powi(k as i32))
        .filter(|&a| a < r)
        .collect()
}

/// Moments of `u` at every candidate; `None` marks overflow.
pub fn moment_table(u: &Field, candidates: &[f64]) -> Vec<Option<f64>> {
    candidates.iter().map(|&a| exp_moment(u, a).ok()).collect()
}

/// First candidate index `≥ start` at which the moments of both `u` and `−u`
/// are finite and `≤ MOMENT_CEILING·|Ω_T|`.
///
/// The moment is convex in `α` and equals `|Ω_T|` at `α = 0`, so the
/// admissible candidates form a tail of the (decreasing) candidate list.
pub fn first_admissible_alpha(u: &Field, candidates: &[f64], start: usize) -> Option<usize> {
    let ceiling = MOMENT_CEILING * u.measure();
    (start..candidates.len()).find(|&k| {
        [Sign::Plus, Sign::Minus]
            .into_iter()
            .all(|s| matches!(signed_moment(u, candidates[k], s), Ok(m) if m <= ceiling))
    })
}

/// Largest candidate whose moment is finite and `≤ MOMENT_CEILING·|Ω_T|` for
/// every table. Returns the candidate index.
pub fn select_alpha(tables: &[Vec<Option<f64>>], spacetime_volume: f64) -> Option<usize> {
    let len = tables.iter().map(Vec::len).min()?;
    let ceiling = MOMENT_CEILING * spacetime_volume;
    (0..len).find(|&k| {
        tables
            .iter()
            .all(|t| matches!(t[k], Some(m) if m <= ceiling))
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L1Check {
    pub lhs: f64,
    pub rhs: f64,
    /// Additive discretization slack `C(h² + dt)`.
    pub slack: f64,
    pub pass: bool,
}

/// `sup_t ∫_Ω |u| dx` against `∫∫ |g| dx dt`.
pub fn l1_check(u: &Field, g: &Field) -> Result<L1Check> {
    u.check_compatible(g)?;
    let grid = u.grid();
    let lhs = sup_t_spatial_l1(u);
    let rhs = lq_spacetime(g, 1.0, Normalization::Raw)?;
    let h = grid.max_h();
    let slack = L1_SLACK_FACTOR * (h * h + grid.dt());
    Ok(L1Check {
        lhs,
        rhs,
        slack,
        pass: lhs <= rhs * (1.0 + L1_TOLERANCE) + slack,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderRow {
    pub i: usize,
    pub exponent: f64,
    /// Averaged `L^{p_i}` norm.
    pub norm: f64,
    /// `norm_i / norm_{i−1}`; absent for `i = 0`.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MoserTrace {
    pub beta0: f64,
    pub chi: f64,
    pub ladder: Vec<LadderRow>,
    pub extrapolated_sup: f64,
    pub measured_sup: f64,
    /// Set when the ladder stopped at [`LADDER_CAP`] before `i_max`.
    pub truncated: bool,
}

impl MoserTrace {
    pub fn last(&self) -> &LadderRow {
        self.ladder.last().expect("ladder has at least one row")
    }

    /// Nondecreasing up to relative rounding `tol`.
    pub fn is_monotone(&self, tol: f64) -> bool {
        self.ladder
            .windows(2)
            .all(|w| w[1].norm >= w[0].norm * (1.0 - tol))
    }
}

/// `ln w` of a positive `w`.
fn log_of(w: &Field, what: &str) -> Result<Field> {
    if !(w.min_value() > 0.0) {
        return Err(Error::Domain(format!("{what} needs w > 0 (min w = {})", w.min_value())));
    }
    w.map(f64::ln)
}

/// Averaged norms of `w` along the exponent ladder; `w` must be positive.
pub fn trace(w: &Field, beta0: f64, q: f64, i_max: usize) -> Result<MoserTrace> {
    trace_log(&log_of(w, "trace")?, beta0, q, i_max)
}

/// [`trace`] from samples of `ln w`.
fn trace_log(log_w: &Field, beta0: f64, q: f64, i_max: usize) -> Result<MoserTrace> {
    let dim = log_w.grid().dim();
    let exps = ladder(beta0, q, dim, i_max)?;
    let chi = chi(dim, q)?;
    let mut rows: Vec<LadderRow> = Vec::with_capacity(exps.len());
    let mut truncated = false;
    for (i, &p) in exps.iter().enumerate() {
        if p > LADDER_CAP {
            truncated = true;
            break;
        }
        let norm = lq_norm_from_log(log_w, p, Normalization::Averaged)?;
        let ratio = rows.last().map(|prev| norm / prev.norm);
        rows.push(LadderRow {
            i,
            exponent: p,
            norm,
            ratio,
        });
    }
    if rows.is_empty() {
        return Err(Error::Domain(format!(
            "first ladder exponent {} already exceeds the cap {LADDER_CAP}",
            exps[0]
        )));
    }
    let extrapolated_sup = extrapolate(&rows);
    Ok(MoserTrace {
        beta0,
        chi,
        ladder: rows,
        extrapolated_sup,
        measured_sup: max_by(log_w.len(), |i| log_w.values()[i]).exp(),
        truncated,
    })
}

/// Limit of the ladder from its last three rows.
///
/// Near a nondegenerate maximum the mean of `w^p` behaves like
/// `C·M^p·p^{−b}`, so `ln‖w‖_p = ln M + a/p − b·ln(p)/p`; the three unknowns
/// are solved exactly. The estimate never falls below the last norm.
fn extrapolate(rows: &[LadderRow]) -> f64 {
    let last = rows[rows.len() - 1].norm;
    let [r1, r2, r3] = match rows {
        [.., a, b, c] => [a, b, c],
        _ => return last,
    };
    let m: Vec<[f64; 4]> = [r1, r2, r3]
        .iter()
        .map(|r| [1.0, 1.0 / r.exponent, -r.exponent.ln() / r.exponent, r.norm.ln()])
        .collect();
    let det3 = |c: [usize; 3]| {
        m[0][c[0]] * (m[1][c[1]] * m[2][c[2]] - m[1][c[2]] * m[2][c[1]])
            - m[0][c[1]] * (m[1][c[0]] * m[2][c[2]] - m[1][c[2]] * m[2][c[0]])
            + m[0][c[2]] * (m[1][c[0]] * m[2][c[1]] - m[1][c[1]] * m[2][c[0]])
    };
    let det = det3([0, 1, 2]);
    if det == 0.0 || !det.is_finite() {
        return last;
    }
    let log_m = det3([3, 1, 2]) / det;
    let est = log_m.exp();
    if est.is_finite() && est > last {
        est
    } else {
        last
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpolationCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// `‖w‖_r ≤ ‖w‖∞^{(r−α)/r} ‖w‖_α^{α/r}` with raw norms; for `α < 1` the
/// right factor is the quasi-norm `(∫w^α)^{1/α}`.
pub fn interpolation_check(w: &Field, r: f64, alpha: f64) -> Result<InterpolationCheck> {
    interpolation_log(&log_of(w, "interpolation_check")?, r, alpha)
}

fn interpolation_log(log_w: &Field, r: f64, alpha: f64) -> Result<InterpolationCheck> {
    if !(alpha > 0.0 && alpha < r) {
        return Err(Error::Domain(format!("need 0 < alpha < r (alpha = {alpha}, r = {r})")));
    }
    let lhs = lq_norm_from_log(log_w, r, Normalization::Raw)?;
    let norm_alpha = lq_norm_from_log(log_w, alpha, Normalization::Raw)?;
    let log_sup = max_by(log_w.len(), |i| log_w.values()[i]);
    let rhs = (log_sup * (r - alpha) / r).exp() * norm_alpha.powf(alpha / r);
    Ok(InterpolationCheck {
        lhs,
        rhs,
        pass: lhs <= rhs * (1.0 + INTERPOLATION_TOLERANCE),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Sign::Plus => "+u",
            Sign::Minus => "-u",
        }
    }
}

#[derive(Debug, Clone)]
pub struct BranchDiagnostics {
    pub sign: Sign,
    /// `max(±u)` over all samples.
    pub u_max: f64,
    pub exp_moment: f64,
    pub trace: MoserTrace,
    pub interpolation: InterpolationCheck,
}

#[derive(Debug, Clone)]
pub struct Diagnostics {
    pub l1: L1Check,
    pub plus: BranchDiagnostics,
    pub minus: BranchDiagnostics,
    pub alpha: f64,
}

impl Diagnostics {
    /// Branch where the signed `u` attains `‖u‖∞`.
    pub fn primary(&self) -> &BranchDiagnostics {
        if self.minus.u_max > self.plus.u_max {
            &self.minus
        } else {
            &self.plus
        }
    }

    pub fn branches(&self) -> [&BranchDiagnostics; 2] {
        [&self.plus, &self.minus]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticSettings {
    pub beta0: f64,
    pub alpha: f64,
    pub i_max: usize,
}

/// Ladder length that always reaches [`LADDER_CAP`].
pub const DEFAULT_I_MAX: usize = 200;

fn branch(u: &Field, sign: Sign, q: f64, settings: &DiagnosticSettings, r: f64) -> Result<BranchDiagnostics> {
    let exp_moment = signed_moment(u, settings.alpha, sign)?;
    let log_w = truncated_log(u, sign)?;
    let trace = trace_log(&log_w, settings.beta0, q, settings.i_max)?;
    let interpolation = interpolation_log(&log_w, r, settings.alpha)?;
    Ok(BranchDiagnostics {
        sign,
        u_max: signed_max(u, sign),
        exp_moment,
        trace,
        interpolation,
    })
}

/// Runs the checks on `u` and `−u` concurrently.
pub fn diagnose(pair: &NormalizedPair, q: f64, settings: &DiagnosticSettings) -> Result<Diagnostics> {
    let dim = pair.u.grid().dim();
    let r = exponents(settings.beta0, q, dim, settings.alpha)?.r;
    let l1 = l1_check(&pair.u, &pair.g)?;
    let (plus, minus) = rayon::join(
        || branch(&pair.u, Sign::Plus, q, settings, r),
        || branch(&pair.u, Sign::Minus, q, settings, r),
    );
    Ok(Diagnostics {
        l1,
        plus: plus?,
        minus: minus?,
        alpha: settings.alpha,
    })
}

/// `α` chosen for a single solution by the same rule as a sweep.
pub fn default_alpha(u: &Field, beta0: f64, q: f64) -> Result<f64> {
    let dim = u.grid().dim();
    let r = (1.0 + beta0) * q / (q - 1.0);
    exponents(beta0, q, dim, 0.5f64.min(r / 2.0))?;
    let candidates = alpha_candidates(r);
    first_admissible_alpha(u, &candidates, 0)
        .map(|k| candidates[k])
        .ok_or_else(|| Error::Range("no alpha candidate keeps the exponential moment bounded".into()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    /// `‖φ‖∞`.
    pub lhs: f64,
    pub phi0_sup: f64,
    /// `‖f‖_{1+N/2}`.
    pub f_norm_crit: f64,
    /// `‖f‖_q`.
    pub f_norm_q: f64,
    /// `ln(‖f‖_q + 1)`.
    pub log_term: f64,
    /// `‖φ₀‖∞ + ‖f‖_{1+N/2}(ln(‖f‖_q+1)+1)`, the bound with `c = 1`.
    pub rhs_unit_c: f64,
    /// `(lhs − ‖φ₀‖∞) / (‖f‖_{1+N/2}(ln(‖f‖_q+1)+1))`, 0 when undefined.
    pub implied_c: f64,
    /// `‖φ‖∞ / ‖f‖_q`, the classical linear-growth ratio; 0 when `f = 0`.
    pub classical_ratio: f64,
    pub exponents: Exponents,
}

/// Relative tolerance for `‖φ‖∞ ≤ ‖φ₀‖∞` when the forcing vanishes.
pub const HOMOGENEOUS_TOLERANCE: f64 = 1e-8;

pub fn assemble_bound(phi: &Field, phi0: &Field, f: &Field, q: f64, beta0: f64, alpha: f64) -> Result<BoundReport> {
    let dim = f.grid().dim();
    let exponents = exponents(beta0, q, dim, alpha)?;
    let lhs = ess_sup(phi);
    let phi0_sup = ess_sup(phi0);
    let f_norm_crit = lq_spacetime(f, critical_exponent(dim), Normalization::Raw)?;
    let f_norm_q = lq_spacetime(f, q, Normalization::Raw)?;
    let log_term = (f_norm_q + 1.0).ln();
    if f_norm_q == 0.0 && lhs > phi0_sup + HOMOGENEOUS_TOLERANCE * (1.0 + phi0_sup) {
        return Err(Error::Consistency(format!(
            "zero forcing but ‖φ‖∞ = {lhs} exceeds ‖φ₀‖∞ = {phi0_sup}"
        )));
    }
    let denom = f_norm_crit * (log_term + 1.0);
    let implied_c = if lhs > phi0_sup && denom > 0.0 {
        (lhs - phi0_sup) / denom
    } else {
        0.0
    };
    Ok(BoundReport {
        lhs,
        phi0_sup,
        f_norm_crit,
        f_norm_q,
        log_term,
        rhs_unit_c: phi0_sup + denom,
        implied_c,
        classical_ratio: if f_norm_q > 0.0 { lhs / f_norm_q } else { 0.0 },
        exponents,
    })
}
