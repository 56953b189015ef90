//! Closed-form exponents of the iteration.

use crate::error::{Error, Result};

/// `1 + N/2`, the integrability threshold for the forcing.
pub fn critical_exponent(dim: usize) -> f64 {
    1.0 + dim as f64 / 2.0
}

/// Gain factor `χ = ((N+2)/N) / (q/(q−1))` of one iteration step.
pub fn chi(dim: usize, q: f64) -> Result<f64> {
    if dim == 0 {
        return Err(Error::Domain("dimension must be positive".into()));
    }
    let critical = critical_exponent(dim);
    if !(q > critical) || !q.is_finite() {
        return Err(Error::Domain(format!(
            "q = {q} must exceed 1 + N/2 = {critical}; the iteration does not gain integrability"
        )));
    }
    let n = dim as f64;
    Ok(((n + 2.0) / n) / (q / (q - 1.0)))
}

/// Exponents `p_i = (1+β₀)(q/(q−1))χ^i` for `i = 0..=i_max`.
pub fn ladder(beta0: f64, q: f64, dim: usize, i_max: usize) -> Result<Vec<f64>> {
    check_beta0(beta0)?;
    let chi = chi(dim, q)?;
    let base = (1.0 + beta0) * (q / (q - 1.0));
    Ok((0..=i_max).map(|i| base * chi.powi(i as i32)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponents {
    pub chi: f64,
    /// `α₀ = χ / ((1+β₀)(χ−1))`.
    pub alpha0: f64,
    /// `r = (1+β₀) q/(q−1)`.
    pub r: f64,
    pub alpha: f64,
    /// `α₀ r/α + 1/α`.
    pub final_exponent: f64,
}

/// Exponents of the final bound for a chosen `α ∈ (0, r)`.
pub fn exponents(beta0: f64, q: f64, dim: usize, alpha: f64) -> Result<Exponents> {
    check_beta0(beta0)?;
    let chi = chi(dim, q)?;
    let alpha0 = chi / ((1.0 + beta0) * (chi - 1.0));
    let r = (1.0 + beta0) * q / (q - 1.0);
    if !(alpha > 0.0 && alpha < r) {
        return Err(Error::Domain(format!("alpha = {alpha} must lie in (0, r = {r})")));
    }
    Ok(Exponents {
        chi,
        alpha0,
        r,
        alpha,
        final_exponent: alpha0 * r / alpha + 1.0 / alpha,
    })
}

/// `Σ_{i≥0} χ^{-i} = χ/(χ−1)`.
pub fn geometric_sum(chi: f64) -> f64 {
    chi / (chi - 1.0)
}

/// `Σ_{i≥0} i·χ^{-i} = χ/(χ−1)²`.
pub fn weighted_geometric_sum(chi: f64) -> f64 {
    chi / ((chi - 1.0) * (chi - 1.0))
}

fn check_beta0(beta0: f64) -> Result<()> {
    if !(beta0 > 0.0 && beta0.is_finite()) {
        return Err(Error::Domain(format!("beta0 = {beta0} must be positive")));
    }
    Ok(())
}
