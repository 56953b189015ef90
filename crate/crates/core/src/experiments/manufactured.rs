//! Grid refinement against `φ* = Π sin(πx_k)·e^{−t}` on the unit cube.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fields::{make_grid, sample, sample_slice, Coefficient, MatrixCoefficient, ProblemSpec};
use crate::solver::{solve_ibvp, SolveOptions};

pub const DEFAULT_LEVELS: [usize; 3] = [16, 32, 64];
pub const DEFAULT_T_FINAL: f64 = 0.25;
/// `dt = DT_PER_H2 · h²`.
pub const DT_PER_H2: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub nx: usize,
    pub nt: usize,
    pub h: f64,
    pub dt: f64,
    /// Max over all cells and levels of `|φ − φ*|`.
    pub error_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub dim: usize,
    pub rows: Vec<ConvergenceRow>,
    /// `log2` error ratios of consecutive rows; assumes halving `h`.
    pub orders: Vec<f64>,
}

impl ConvergenceReport {
    pub fn min_order(&self) -> f64 {
        self.orders.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

fn exact(x: &[f64], t: f64) -> f64 {
    x.iter().map(|&xk| (PI * xk).sin()).product::<f64>() * (-t).exp()
}

/// Heat equation with forcing and initial data chosen so that `φ*` solves it.
pub fn manufactured_problem(dim: usize, nx: usize, t_final: f64) -> Result<ProblemSpec> {
    let h = 1.0 / nx as f64;
    let nt = ((t_final / (DT_PER_H2 * h * h)).round() as usize).max(1);
    let grid = Arc::new(make_grid(&vec![(0.0, 1.0); dim], &vec![nx; dim], t_final, nt)?);
    // ∂t φ* − Δφ* = (Nπ² − 1) φ*
    let rate = dim as f64 * PI * PI - 1.0;
    let f = sample(|x, t| rate * exact(x, t), &grid)?;
    let phi0 = sample_slice(exact, &grid, 0.0)?;
    ProblemSpec::new(
        &grid,
        MatrixCoefficient::identity(dim),
        Coefficient::Uniform(0.0),
        f,
        phi0,
        1.0,
        4.0,
    )
}

/// Solves the manufactured problem at each resolution in `levels`.
pub fn convergence_study(dim: usize, levels: &[usize], t_final: f64, opts: &SolveOptions) -> Result<ConvergenceReport> {
    if !(1..=3).contains(&dim) {
        return Err(Error::Config(format!("convergence study supports N = 1, 2, 3, not {dim}")));
    }
    if levels.len() < 2 {
        return Err(Error::Config("convergence study needs at least two resolutions".into()));
    }
    let mut rows = Vec::with_capacity(levels.len());
    for &nx in levels {
        let spec = manufactured_problem(dim, nx, t_final)?;
        let sol = solve_ibvp(&spec, opts)?;
        let grid = spec.grid();
        let mut x = vec![0.0; dim];
        let mut error_max: f64 = 0.0;
        for level in 0..=grid.nt() {
            let t = grid.time(level);
            for (c, v) in sol.phi.slice(level).iter().enumerate() {
                grid.cell_center(c, &mut x);
                error_max = error_max.max((v - exact(&x, t)).abs());
            }
        }
        rows.push(ConvergenceRow {
            nx,
            nt: grid.nt(),
            h: grid.max_h(),
            dt: grid.dt(),
            error_max,
        });
    }
    let orders = rows
        .windows(2)
        .map(|w| (w[0].error_max / w[1].error_max).ln() / (w[0].h / w[1].h).ln())
        .collect();
    Ok(ConvergenceReport { dim, rows, orders })
}
