//! Grid estimate of the embedding constant in `‖φ‖_p ≤ c‖∇φ‖₂` for
//! functions vanishing on the boundary.
//!
//! For `N ≥ 3` the exponent is `2N/(N−2)`; for `N = 2` it is a free `s > 2`.
//! The estimate minimizes `Q(φ) = ‖∇_hφ‖₂ / ‖φ‖_p` by a Sobolev-gradient
//! descent whose unit step is the nonlinear inverse iteration
//! `φ ← L⁻¹(|φ|^{p−2}φ)`, with backtracking so `Q` never increases.
//! The constant is `1/Q` at the final iterate.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fields::{sample_slice, Coefficient, Field, FieldKind, Grid, MatrixCoefficient};
use crate::reduce::{dot, pairwise_sum_by};
use crate::solver::{pcg, EllipticOperator};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SobolevOptions {
    /// Embedding exponent used when `N = 2`.
    pub s: f64,
    pub max_iterations: usize,
    /// Stop once one step lowers `Q` by less than this relative amount.
    pub tolerance: f64,
}

impl Default for SobolevOptions {
    fn default() -> Self {
        SobolevOptions {
            s: 4.0,
            max_iterations: 400,
            tolerance: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SobolevEstimate {
    /// Estimate of the embedding constant, `1/Q`.
    pub constant: f64,
    /// Final Rayleigh quotient `‖∇φ‖₂/‖φ‖_p`.
    pub quotient: f64,
    pub exponent: f64,
    pub iterations: usize,
    /// Final iterate, normalized to `‖φ‖_p = 1`.
    pub minimizer: Field,
}

/// `2N/(N−2)` for `N ≥ 3`, `s` for `N = 2`.
pub fn embedding_exponent(dim: usize, s: f64) -> Result<f64> {
    match dim {
        0 | 1 => Err(Error::Domain(format!(
            "no L^p embedding constant is estimated for N = {dim}"
        ))),
        2 if s > 2.0 && s.is_finite() => Ok(s),
        2 => Err(Error::Domain(format!("N = 2 needs s > 2 (got {s})"))),
        n => Ok(2.0 * n as f64 / (n as f64 - 2.0)),
    }
}

/// `‖∇_hφ‖₂² = |cell|·φᵀLφ` with the Dirichlet Laplacian `L`.
pub fn dirichlet_energy(phi: &Field) -> f64 {
    let grid = phi.grid();
    let a = MatrixCoefficient::identity(grid.dim());
    let omega = Coefficient::Uniform(0.0);
    let op = EllipticOperator::new(grid, &a, &omega, 0);
    let mut lphi = vec![0.0; phi.len()];
    op.apply_shifted(phi.values(), &mut lphi, 0.0, 1.0);
    grid.cell_volume() * dot(phi.values(), &lphi)
}

fn slice_lp(phi: &[f64], p: f64, weight: f64) -> f64 {
    (weight * pairwise_sum_by(phi.len(), |i| phi[i].abs().powf(p))).powf(1.0 / p)
}

/// `‖∇_hφ‖₂ / ‖φ‖_p` on a time slice.
pub fn rayleigh_quotient(phi: &Field, p: f64) -> f64 {
    let w = phi.grid().cell_volume();
    dirichlet_energy(phi).sqrt() / slice_lp(phi.values(), p, w)
}

pub fn sobolev_constant_estimate(grid: &Arc<Grid>, opts: &SobolevOptions) -> Result<SobolevEstimate> {
    let p = embedding_exponent(grid.dim(), opts.s)?;
    let weight = grid.cell_volume();
    let lo = grid.lo().to_vec();
    let len: Vec<f64> = grid.lo().iter().zip(grid.hi()).map(|(l, h)| h - l).collect();
    let start = sample_slice(
        |x, _| {
            x.iter()
                .enumerate()
                .map(|(k, xk)| (PI * (xk - lo[k]) / len[k]).sin())
                .product()
        },
        grid,
        0.0,
    )?;

    let a = MatrixCoefficient::identity(grid.dim());
    let omega = Coefficient::Uniform(0.0);
    let op = EllipticOperator::new(grid, &a, &omega, 0);
    let inv_diag: Vec<f64> = op.diagonal(0.0, 1.0).into_iter().map(|d| 1.0 / d).collect();
    let n = grid.cells();

    let normalize = |v: &mut Vec<f64>| {
        let norm = slice_lp(v, p, weight);
        v.iter_mut().for_each(|x| *x /= norm);
    };
    let quotient = |v: &[f64]| -> f64 {
        let mut lv = vec![0.0; n];
        op.apply_shifted(v, &mut lv, 0.0, 1.0);
        (weight * dot(v, &lv)).sqrt() / slice_lp(v, p, weight)
    };

    let mut phi = start.into_values();
    normalize(&mut phi);
    let mut q = quotient(&phi);
    let mut converged = false;
    let mut iterations = 0;
    let mut target = phi.clone();
    while iterations < opts.max_iterations {
        iterations += 1;
        let rhs: Vec<f64> = phi.iter().map(|v| v.abs().powf(p - 2.0) * v).collect();
        target.copy_from_slice(&phi);
        let out = pcg(
            |x, y| op.apply_shifted(x, y, 0.0, 1.0),
            &inv_diag,
            &rhs,
            &mut target,
            1e-12,
            10 * n,
        );
        if !out.converged {
            return Err(Error::Estimation {
                iterations,
                last: 1.0 / q,
            });
        }
        normalize(&mut target);

        let mut tau = 1.0;
        let mut accepted = None;
        while tau > 1e-6 {
            let mut trial: Vec<f64> = phi
                .iter()
                .zip(&target)
                .map(|(a, b)| (1.0 - tau) * a + tau * b)
                .collect();
            normalize(&mut trial);
            let qt = quotient(&trial);
            if qt < q {
                accepted = Some((trial, qt));
                break;
            }
            tau *= 0.5;
        }
        match accepted {
            Some((trial, qt)) => {
                let decrease = (q - qt) / q;
                phi = trial;
                q = qt;
                if decrease < opts.tolerance {
                    converged = true;
                    break;
                }
            }
            None => {
                converged = true;
                break;
            }
        }
    }
    if !converged {
        return Err(Error::Estimation {
            iterations,
            last: 1.0 / q,
        });
    }
    Ok(SobolevEstimate {
        constant: 1.0 / q,
        quotient: q,
        exponent: p,
        iterations,
        minimizer: Field::from_values(grid, FieldKind::TimeSlice, phi)?,
    })
}
