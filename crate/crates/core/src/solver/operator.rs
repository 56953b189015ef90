use rayon::prelude::*;

use crate::fields::{Coefficient, Grid, MatrixCoefficient};

/// Discretization of `v ↦ −div(A∇v) + ωv` at one time level.
///
/// Diagonal entries of `A` use compact two-point fluxes with arithmetic face
/// averages; a boundary face sees the adjacent cell value at half-cell
/// distance (odd reflection, so `v = 0` on the wall). Off-diagonal entries use
/// `Σ_{i≠j} D_iᵀ a_ij D_j` with central differences `D_k`, which keeps the
/// operator symmetric.
pub struct EllipticOperator<'a> {
    grid: &'a Grid,
    a: &'a MatrixCoefficient,
    omega: &'a Coefficient,
    level: usize,
    strides: Vec<usize>,
    inv_h2: Vec<f64>,
    diagonal_a: bool,
    /// `(a_kk/h_k², ω)` when both are constant in space and time.
    uniform: Option<(Vec<f64>, f64)>,
}

impl<'a> EllipticOperator<'a> {
    pub fn new(grid: &'a Grid, a: &'a MatrixCoefficient, omega: &'a Coefficient, level: usize) -> Self {
        EllipticOperator {
            grid,
            a,
            omega,
            level,
            strides: grid.strides(),
            inv_h2: grid.h().iter().map(|h| 1.0 / (h * h)).collect(),
            diagonal_a: a.is_diagonal(),
            uniform: None,
        }
        .with_uniform_fast_path()
    }

    fn with_uniform_fast_path(mut self) -> Self {
        if let Coefficient::Uniform(w) = self.omega {
            let diag: Option<Vec<f64>> = (0..self.grid.dim())
                .map(|k| match self.a.entry(k, k) {
                    Coefficient::Uniform(v) => Some(v * self.inv_h2[k]),
                    Coefficient::Sampled(_) => None,
                })
                .collect();
            self.uniform = diag.map(|d| (d, *w));
        }
        self
    }

    pub fn len(&self) -> usize {
        self.grid.cells()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Axis index of `cell` along `axis`.
    #[inline]
    fn axis_index(&self, cell: usize, axis: usize) -> usize {
        (cell / self.strides[axis]) % self.grid.nx()[axis]
    }

    /// `y = shift·x + scale·L x`.
    pub fn apply_shifted(&self, x: &[f64], y: &mut [f64], shift: f64, scale: f64) {
        let dim = self.grid.dim();
        let level = self.level;
        match &self.uniform {
            Some((coef, omega)) => self.apply_uniform(x, y, shift, scale, coef, *omega),
            None => self.apply_compact(x, y, shift, scale),
        }

        if !self.diagonal_a {
            let len = x.len();
            let mut grad = vec![0.0; len];
            let mut back = vec![0.0; len];
            for i in 0..dim {
                for j in 0..dim {
                    if i == j || self.a.entry(i, j).is_zero() {
                        continue;
                    }
                    self.central_difference(j, x, &mut grad);
                    grad.par_iter_mut().enumerate().for_each(|(c, g)| {
                        *g *= self.a.at(i, j, level, c);
                    });
                    self.central_difference_transpose(i, &grad, &mut back);
                    y.par_iter_mut()
                        .zip(back.par_iter())
                        .for_each(|(out, b)| *out += scale * b);
                }
            }
        }
    }

    /// Compact part with coefficients sampled per cell.
    fn apply_compact(&self, x: &[f64], y: &mut [f64], shift: f64, scale: f64) {
        let dim = self.grid.dim();
        let level = self.level;
        y.par_iter_mut().enumerate().for_each(|(c, out)| {
            let xc = x[c];
            let mut acc = 0.0;
            for k in 0..dim {
                let s = self.strides[k];
                let n = self.grid.nx()[k];
                let i = self.axis_index(c, k);
                let akk = self.a.at(k, k, level, c);
                let mut flux = 0.0;
                if i > 0 {
                    let face = 0.5 * (akk + self.a.at(k, k, level, c - s));
                    flux += face * (xc - x[c - s]);
                } else {
                    flux += 2.0 * akk * xc;
                }
                if i + 1 < n {
                    let face = 0.5 * (akk + self.a.at(k, k, level, c + s));
                    flux += face * (xc - x[c + s]);
                } else {
                    flux += 2.0 * akk * xc;
                }
                acc += flux * self.inv_h2[k];
            }
            acc += self.omega.at(level, c) * xc;
            *out = shift * xc + scale * acc;
        });
    }

    /// Compact part for constant coefficients, walking rows of the last
    /// axis so outer indices are computed once per row.
    fn apply_uniform(&self, x: &[f64], y: &mut [f64], shift: f64, scale: f64, coef: &[f64], omega: f64) {
        let dim = self.grid.dim();
        let nx = self.grid.nx();
        let last = dim - 1;
        let n_last = nx[last];
        y.par_chunks_mut(n_last).enumerate().for_each(|(row, out)| {
            let base = row * n_last;
            let mut outer = [0usize; 3];
            for k in 0..last {
                outer[k] = self.axis_index(base, k);
            }
            for (j, o) in out.iter_mut().enumerate() {
                let c = base + j;
                let xc = x[c];
                let mut acc = omega * xc;
                for k in 0..dim {
                    let s = self.strides[k];
                    let i = if k == last { j } else { outer[k] };
                    let lower = if i > 0 { xc - x[c - s] } else { 2.0 * xc };
                    let upper = if i + 1 < nx[k] { xc - x[c + s] } else { 2.0 * xc };
                    acc += coef[k] * (lower + upper);
                }
                *o = shift * xc + scale * acc;
            }
        });
    }

    /// Diagonal of `shift·I + scale·L` restricted to its compact part.
    pub fn diagonal(&self, shift: f64, scale: f64) -> Vec<f64> {
        let dim = self.grid.dim();
        let level = self.level;
        (0..self.len())
            .into_par_iter()
            .map(|c| {
                let mut acc = 0.0;
                for k in 0..dim {
                    let s = self.strides[k];
                    let n = self.grid.nx()[k];
                    let i = self.axis_index(c, k);
                    let akk = self.a.at(k, k, level, c);
                    let lower = if i > 0 {
                        0.5 * (akk + self.a.at(k, k, level, c - s))
                    } else {
                        2.0 * akk
                    };
                    let upper = if i + 1 < n {
                        0.5 * (akk + self.a.at(k, k, level, c + s))
                    } else {
                        2.0 * akk
                    };
                    acc += (lower + upper) * self.inv_h2[k];
                }
                acc += self.omega.at(level, c);
                shift + scale * acc
            })
            .collect()
    }

    /// `out = D_axis x` with odd ghost values beyond the wall.
    fn central_difference(&self, axis: usize, x: &[f64], out: &mut [f64]) {
        let s = self.strides[axis];
        let n = self.grid.nx()[axis];
        let inv = 0.5 / self.grid.h()[axis];
        out.par_iter_mut().enumerate().for_each(|(c, o)| {
            let i = self.axis_index(c, axis);
            let plus = if i + 1 < n { x[c + s] } else { -x[c] };
            let minus = if i > 0 { x[c - s] } else { -x[c] };
            *o = (plus - minus) * inv;
        });
    }

    /// `out = D_axisᵀ z`.
    fn central_difference_transpose(&self, axis: usize, z: &[f64], out: &mut [f64]) {
        let s = self.strides[axis];
        let n = self.grid.nx()[axis];
        let inv = 0.5 / self.grid.h()[axis];
        out.par_iter_mut().enumerate().for_each(|(d, o)| {
            let i = self.axis_index(d, axis);
            let mut acc = 0.0;
            if i >= 1 {
                acc += z[d - s];
            } else {
                acc += z[d];
            }
            if i + 1 < n {
                acc -= z[d + s];
            } else {
                acc -= z[d];
            }
            *o = acc * inv;
        });
    }
}
