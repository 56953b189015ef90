//! Norm functionals on grid fields by midpoint quadrature.
//!
//! Space-time integrals run over levels `1..=nt` (each standing for one time
//! step), so `∫∫ 1 = |Ω_T|` exactly; see [`Field::quadrature_range`].
//! Suprema run over every stored sample, including the initial level.

mod sobolev;

pub use sobolev::{
    dirichlet_energy, embedding_exponent, rayleigh_quotient, sobolev_constant_estimate,
    SobolevEstimate, SobolevOptions,
};

use crate::error::{Error, Result};
use crate::fields::{Field, FieldKind};
use crate::reduce::{max_by, pairwise_sum_by};

/// Exponents at or above this are evaluated through log-sum-exp.
pub const LOG_SPACE_THRESHOLD: f64 = 32.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// Plain `dx dt` measure.
    Raw,
    /// Measure normalized to total mass 1.
    Averaged,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Sup,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormRequest {
    pub exponent: Exponent,
    pub normalization: Normalization,
}

impl NormRequest {
    pub fn raw(p: f64) -> Self {
        NormRequest {
            exponent: Exponent::Finite(p),
            normalization: Normalization::Raw,
        }
    }

    pub fn averaged(p: f64) -> Self {
        NormRequest {
            exponent: Exponent::Finite(p),
            normalization: Normalization::Averaged,
        }
    }

    pub fn sup() -> Self {
        NormRequest {
            exponent: Exponent::Sup,
            normalization: Normalization::Raw,
        }
    }

    pub fn evaluate(&self, field: &Field) -> Result<f64> {
        match self.exponent {
            Exponent::Sup => Ok(ess_sup(field)),
            Exponent::Finite(p) => lq_norm(field, p, self.normalization),
        }
    }
}

/// `‖v‖_{p,Ω_T}` of a space-time field.
pub fn lq_spacetime(field: &Field, p: f64, normalization: Normalization) -> Result<f64> {
    if field.kind() != FieldKind::SpaceTime {
        return Err(Error::Config("lq_spacetime expects a space-time field".into()));
    }
    lq_norm(field, p, normalization)
}

/// `L^p` norm over the field's quadrature set (space-time or one slice).
pub fn lq_norm(field: &Field, p: f64, normalization: Normalization) -> Result<f64> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::Domain(format!("norm exponent p = {p} must be a finite number >= 1")));
    }
    let range = field.quadrature_range();
    let values = &field.values()[range];
    let count = values.len() as f64;
    let scale = match normalization {
        Normalization::Raw => field.sample_weight(),
        Normalization::Averaged => 1.0 / count,
    };

    let peak = max_by(values.len(), |i| values[i].abs());
    if peak == 0.0 || values.is_empty() {
        return Ok(0.0);
    }

    if p >= LOG_SPACE_THRESHOLD {
        let log_sum = log_sum_pow(values, p, peak);
        return Ok(((log_sum + scale.ln()) / p).exp());
    }

    let sum = if p == 1.0 {
        pairwise_sum_by(values.len(), |i| values[i].abs())
    } else if p == 2.0 {
        pairwise_sum_by(values.len(), |i| values[i] * values[i])
    } else {
        pairwise_sum_by(values.len(), |i| values[i].abs().powf(p))
    };
    if !sum.is_finite() {
        return Err(Error::Range(format!(
            "sum of |v|^{p} overflowed (max |v| = {peak:e}); use the averaged form or rescale the exponent"
        )));
    }
    Ok((sum * scale).powf(1.0 / p))
}

/// `ln Σ |v|^p`, shifted by the peak so no term exceeds 1.
fn log_sum_pow(values: &[f64], p: f64, peak: f64) -> f64 {
    let log_peak = peak.ln();
    let shifted = pairwise_sum_by(values.len(), |i| {
        let a = values[i].abs();
        if a == 0.0 {
            0.0
        } else {
            (p * (a.ln() - log_peak)).exp()
        }
    });
    p * log_peak + shifted.ln()
}

/// `L^p` norm of `w` from samples of `ln|w|`, in log space for every `p > 0`.
///
/// For `p < 1` this is the quasi-norm `(∫|w|^p)^{1/p}`. Exact zeros of `w`
/// cannot be represented and must be handled by the caller.
pub fn lq_norm_from_log(log_w: &Field, p: f64, normalization: Normalization) -> Result<f64> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::Domain(format!("norm exponent p = {p} must be positive and finite")));
    }
    let values = &log_w.values()[log_w.quadrature_range()];
    if values.is_empty() {
        return Ok(0.0);
    }
    let scale = match normalization {
        Normalization::Raw => log_w.sample_weight(),
        Normalization::Averaged => 1.0 / values.len() as f64,
    };
    let peak = max_by(values.len(), |i| values[i]);
    let shifted = pairwise_sum_by(values.len(), |i| (p * (values[i] - peak)).exp());
    Ok((peak + (shifted.ln() + scale.ln()) / p).exp())
}

/// Largest absolute sample over all stored levels.
pub fn ess_sup(field: &Field) -> f64 {
    let values = field.values();
    max_by(values.len(), |i| values[i].abs()).max(0.0)
}

/// `max_n ∫_Ω |v(·, t_n)| dx` over every stored level.
pub fn sup_t_spatial_l1(field: &Field) -> f64 {
    let weight = field.grid().cell_volume();
    (0..field.slice_count())
        .map(|n| {
            let slice = field.slice(n);
            weight * pairwise_sum_by(slice.len(), |i| slice[i].abs())
        })
        .fold(0.0, f64::max)
}
