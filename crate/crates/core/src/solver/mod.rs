//! Backward Euler finite-volume solution of
//! `∂tφ − div(A∇φ) + ωφ = f` with `φ = 0` on the lateral boundary.
//!
//! Each step solves `(I + dt·L)φⁿ⁺¹ = φⁿ + dt·fⁿ⁺¹`, where `L` is the
//! [`EllipticOperator`] with coefficients frozen at the new level.

mod cg;
mod export;
mod operator;

use std::sync::Arc;

pub use cg::{pcg, CgOutcome};
pub use export::{read_solution_csv, write_solution_binary, write_solution_csv};
pub use operator::EllipticOperator;

use crate::error::{Error, Result};
use crate::fields::{Coefficient, Field, FieldKind, Grid, MatrixCoefficient, ProblemSpec};

pub const DEFAULT_TOLERANCE: f64 = 1e-10;
pub const MAX_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Relative residual target of each linear solve.
    pub tolerance: f64,
    /// Iteration cap per linear solve; `None` means 10 × unknowns.
    pub max_iterations: Option<usize>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tolerance: DEFAULT_TOLERANCE,
            max_iterations: None,
        }
    }
}

impl SolveOptions {
    pub fn with_tolerance(tolerance: f64) -> Self {
        SolveOptions {
            tolerance,
            ..Self::default()
        }
    }

    pub fn check(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance <= MAX_TOLERANCE) {
            return Err(Error::Config(format!(
                "solver tolerance {} outside (0, {MAX_TOLERANCE}]",
                self.tolerance
            )));
        }
        if self.max_iterations == Some(0) {
            return Err(Error::Config("max iterations must be at least 1".into()));
        }
        Ok(())
    }

    fn iteration_cap(&self, unknowns: usize) -> usize {
        self.max_iterations.unwrap_or(10 * unknowns)
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub phi: Field,
    /// Relative residual of each step's linear solve.
    pub residuals: Vec<f64>,
    /// CG iterations of each step.
    pub iterations: Vec<usize>,
    pub steps: usize,
}

/// Coefficients of the operator, borrowed from a [`ProblemSpec`].
#[derive(Clone, Copy)]
struct Coefficients<'a> {
    grid: &'a Arc<Grid>,
    a: &'a MatrixCoefficient,
    omega: &'a Coefficient,
}

impl<'a> Coefficients<'a> {
    fn of(spec: &'a ProblemSpec) -> Self {
        Coefficients {
            grid: spec.grid(),
            a: &spec.a,
            omega: &spec.omega,
        }
    }
}

/// Advances one backward Euler step from `state` to the time level `level`.
pub fn step(state: &Field, spec: &ProblemSpec, level: usize, opts: &SolveOptions) -> Result<Field> {
    opts.check()?;
    if state.kind() != FieldKind::TimeSlice || **state.grid() != **spec.grid() {
        return Err(Error::Config("step expects a time slice on the problem grid".into()));
    }
    if level == 0 || level > spec.grid().nt() {
        return Err(Error::Config(format!(
            "time level {level} outside 1..={}",
            spec.grid().nt()
        )));
    }
    let mut next = state.values().to_vec();
    let outcome = advance(
        Coefficients::of(spec),
        state.values(),
        Some(spec.f.slice(level)),
        level,
        &mut next,
        opts,
    );
    if !outcome.converged {
        return Err(Error::Solver {
            step: level,
            residual: outcome.relative_residual,
            iterations: outcome.iterations,
        });
    }
    Field::from_values(spec.grid(), FieldKind::TimeSlice, next)
}

fn advance(
    coeffs: Coefficients<'_>,
    state: &[f64],
    forcing: Option<&[f64]>,
    level: usize,
    next: &mut [f64],
    opts: &SolveOptions,
) -> CgOutcome {
    let grid = coeffs.grid;
    let dt = grid.dt();
    let op = EllipticOperator::new(grid, coeffs.a, coeffs.omega, level);
    let rhs: Vec<f64> = match forcing {
        Some(f) => state.iter().zip(f).map(|(s, f)| s + dt * f).collect(),
        None => state.to_vec(),
    };
    let inv_diag: Vec<f64> = op.diagonal(1.0, dt).into_iter().map(|d| 1.0 / d).collect();
    next.copy_from_slice(state);
    pcg(
        |x, y| op.apply_shifted(x, y, 1.0, dt),
        &inv_diag,
        &rhs,
        next,
        opts.tolerance,
        opts.iteration_cap(grid.cells()),
    )
}

fn march(
    coeffs: Coefficients<'_>,
    forcing: Option<&Field>,
    initial: Option<&Field>,
    opts: &SolveOptions,
) -> Result<Solution> {
    opts.check()?;
    let grid = coeffs.grid;
    let mut phi = Field::zeros(grid, FieldKind::SpaceTime);
    if let Some(init) = initial {
        phi.slice_mut(0).copy_from_slice(init.values());
    }
    let nt = grid.nt();
    let mut residuals = Vec::with_capacity(nt);
    let mut iterations = Vec::with_capacity(nt);
    let cells = grid.cells();
    for level in 1..=nt {
        let (done, rest) = phi.values_mut().split_at_mut(level * cells);
        let state = &done[(level - 1) * cells..];
        let next = &mut rest[..cells];
        let outcome = advance(coeffs, state, forcing.map(|f| f.slice(level)), level, next, opts);
        if !outcome.converged {
            return Err(Error::Solver {
                step: level,
                residual: outcome.relative_residual,
                iterations: outcome.iterations,
            });
        }
        residuals.push(outcome.relative_residual);
        iterations.push(outcome.iterations);
    }
    if let Some(i) = phi.values().iter().position(|v| !v.is_finite()) {
        let (point, time) = phi.location(i);
        return Err(Error::Evaluation {
            point,
            time,
            value: phi.values()[i],
        });
    }
    Ok(Solution {
        phi,
        residuals,
        iterations,
        steps: nt,
    })
}

/// Marches all `nt` steps from `φ₀`.
pub fn solve_ibvp(spec: &ProblemSpec, opts: &SolveOptions) -> Result<Solution> {
    march(Coefficients::of(spec), Some(&spec.f), Some(&spec.phi0), opts)
}

/// Splits `φ = φ₁ + φ₂`: `φ₁` carries the forcing from zero initial data,
/// `φ₂` carries `φ₀` without forcing.
pub fn solve_split(spec: &ProblemSpec, opts: &SolveOptions) -> Result<(Solution, Solution)> {
    let coeffs = Coefficients::of(spec);
    let phi1 = march(coeffs, Some(&spec.f), None, opts)?;
    let phi2 = march(coeffs, None, Some(&spec.phi0), opts)?;
    Ok((phi1, phi2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{make_grid, sample, sample_slice};
    use std::f64::consts::PI;

    fn heat_spec(grid: &Arc<Grid>, f: Field, phi0: Field) -> ProblemSpec {
        ProblemSpec::new(
            grid,
            MatrixCoefficient::identity(grid.dim()),
            Coefficient::Uniform(0.0),
            f,
            phi0,
            1.0,
            4.0,
        )
        .unwrap()
    }

    fn sup(values: &[f64]) -> f64 {
        values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    #[test]
    fn zero_is_a_fixed_point() {
        let g = Arc::new(make_grid(&[(0.0, 1.0)], &[8], 1.0, 4).unwrap());
        let spec = heat_spec(&g, Field::zeros(&g, FieldKind::SpaceTime), Field::zeros(&g, FieldKind::TimeSlice));
        let next = step(&spec.phi0, &spec, 1, &SolveOptions::default()).unwrap();
        assert!(next.is_zero());
    }

    #[test]
    fn sine_mode_decays_by_discrete_eigenvalue() {
        let nx = 32;
        let g = Arc::new(make_grid(&[(0.0, 1.0)], &[nx], 0.1, 10).unwrap());
        let phi0 = sample_slice(|x, _| (PI * x[0]).sin(), &g, 0.0).unwrap();
        let spec = heat_spec(&g, Field::zeros(&g, FieldKind::SpaceTime), phi0.clone());
        let opts = SolveOptions::with_tolerance(1e-13);
        let next = step(&phi0, &spec, 1, &opts).unwrap();
        let h = g.h()[0];
        let dt = g.dt();
        // closed-form eigenvalue of the cell-centered Dirichlet Laplacian
        let lambda_h = 4.0 / (h * h) * (PI * h / 2.0).sin().powi(2);
        let discrete = 1.0 / (1.0 + dt * lambda_h);
        let ratio = sup(next.values()) / sup(phi0.values());
        assert!((ratio - discrete).abs() < 1e-11, "{ratio} vs {discrete}");
        let continuum = 1.0 / (1.0 + dt * PI * PI);
        assert!((ratio - continuum).abs() < 2.0 * dt * PI.powi(4) * h * h / 12.0);
    }

    #[test]
    fn thin_diffusion_with_absorption_is_solvable() {
        let g = Arc::new(make_grid(&[(0.0, 1.0), (0.0, 1.0)], &[8, 8], 1.0, 4).unwrap());
        let eps = 1e-3;
        let spec = ProblemSpec::new(
            &g,
            MatrixCoefficient::scaled_identity(2, eps),
            Coefficient::Uniform(1.0),
            Field::constant(&g, FieldKind::SpaceTime, 1.0),
            Field::zeros(&g, FieldKind::TimeSlice),
            eps,
            4.0,
        )
        .unwrap();
        let sol = solve_ibvp(&spec, &SolveOptions::default()).unwrap();
        assert!(sol.phi.min_value() >= 0.0);
        assert!(sol.residuals.iter().all(|&r| r <= DEFAULT_TOLERANCE));
    }

    #[test]
    fn zero_data_gives_zero() {
        let g = Arc::new(make_grid(&[(0.0, 1.0), (0.0, 1.0)], &[6, 5], 1.0, 3).unwrap());
        let spec = heat_spec(&g, Field::zeros(&g, FieldKind::SpaceTime), Field::zeros(&g, FieldKind::TimeSlice));
        let sol = solve_ibvp(&spec, &SolveOptions::default()).unwrap();
        assert!(sol.phi.is_zero());
        assert_eq!(sol.steps, 3);
    }

    #[test]
    fn split_parts_in_degenerate_cases() {
        let g = Arc::new(make_grid(&[(0.0, 1.0)], &[16], 0.5, 8).unwrap());
        let f = sample(|x, t| x[0] * (1.0 - x[0]) * (1.0 + t), &g).unwrap();
        let phi0 = sample_slice(|x, _| (PI * x[0]).sin(), &g, 0.0).unwrap();
        let opts = SolveOptions::default();

        let forced = heat_spec(&g, f.clone(), Field::zeros(&g, FieldKind::TimeSlice));
        let phi = solve_ibvp(&forced, &opts).unwrap().phi;
        let (p1, p2) = solve_split(&forced, &opts).unwrap();
        assert!(p2.phi.is_zero());
        assert_eq!(p1.phi, phi);

        let free = heat_spec(&g, Field::zeros(&g, FieldKind::SpaceTime), phi0);
        let phi = solve_ibvp(&free, &opts).unwrap().phi;
        let (p1, p2) = solve_split(&free, &opts).unwrap();
        assert!(p1.phi.is_zero());
        assert_eq!(p2.phi, phi);
    }

    #[test]
    fn non_convergence_is_reported_with_step() {
        let g = Arc::new(make_grid(&[(0.0, 1.0)], &[32], 1.0, 4).unwrap());
        let spec = heat_spec(
            &g,
            Field::constant(&g, FieldKind::SpaceTime, 1.0),
            Field::zeros(&g, FieldKind::TimeSlice),
        );
        let opts = SolveOptions {
            tolerance: 1e-12,
            max_iterations: Some(1),
        };
        match solve_ibvp(&spec, &opts) {
            Err(Error::Solver { step, iterations, .. }) => {
                assert_eq!(step, 1);
                assert_eq!(iterations, 1);
            }
            other => panic!("expected solver error, got {other:?}"),
        }
    }

    #[test]
    fn options_are_checked() {
        assert!(SolveOptions::with_tolerance(1e-3).check().is_err());
        assert!(SolveOptions::with_tolerance(0.0).check().is_err());
        assert!(SolveOptions { tolerance: 1e-8, max_iterations: Some(0) }.check().is_err());
        assert!(SolveOptions::default().check().is_ok());
    }
}
