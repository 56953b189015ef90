use crate::error::{Error, Result};

/// Uniform cell-centered grid on a box `Ω = Π (lo_k, hi_k)` times `[0, T]`.
///
/// Space is split into `nx[k]` cells per axis, sampled at cell midpoints.
/// Time carries `nt + 1` levels `t_n = n·dt`; level 0 is the initial slice.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    lo: Vec<f64>,
    hi: Vec<f64>,
    nx: Vec<usize>,
    h: Vec<f64>,
    t_final: f64,
    nt: usize,
    dt: f64,
}

pub const MIN_CELLS_PER_AXIS: usize = 4;
pub const MIN_TIME_STEPS: usize = 2;

impl Grid {
    pub fn new(bounds: &[(f64, f64)], nx: &[usize], t_final: f64, nt: usize) -> Result<Self> {
        let dim = bounds.len();
        if !(1..=3).contains(&dim) {
            return Err(Error::Config(format!(
                "dimension must be 1, 2 or 3 (got {dim})"
            )));
        }
        if nx.len() != dim {
            return Err(Error::Config(format!(
                "{} cell counts given for {dim} axes",
                nx.len()
            )));
        }
        for (axis, (&(lo, hi), &n)) in bounds.iter().zip(nx).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::Config(format!(
                    "axis {axis}: degenerate interval ({lo}, {hi})"
                )));
            }
            if n < MIN_CELLS_PER_AXIS {
                return Err(Error::Config(format!(
                    "axis {axis}: nx = {n} is below the minimum of {MIN_CELLS_PER_AXIS}"
                )));
            }
        }
        if !(t_final.is_finite() && t_final > 0.0) {
            return Err(Error::Config(format!("final time T = {t_final} must be positive")));
        }
        if nt < MIN_TIME_STEPS {
            return Err(Error::Config(format!(
                "time axis: nt = {nt} is below the minimum of {MIN_TIME_STEPS}"
            )));
        }
        let lo: Vec<f64> = bounds.iter().map(|b| b.0).collect();
        let hi: Vec<f64> = bounds.iter().map(|b| b.1).collect();
        let h = bounds
            .iter()
            .zip(nx)
            .map(|(&(lo, hi), &n)| (hi - lo) / n as f64)
            .collect();
        Ok(Grid {
            lo,
            hi,
            nx: nx.to_vec(),
            h,
            t_final,
            nt,
            dt: t_final / nt as f64,
        })
    }

    pub fn dim(&self) -> usize {
        self.nx.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn nx(&self) -> &[usize] {
        &self.nx
    }

    pub fn h(&self) -> &[f64] {
        &self.h
    }

    pub fn max_h(&self) -> f64 {
        self.h.iter().copied().fold(0.0, f64::max)
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn nt(&self) -> usize {
        self.nt
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Number of spatial cells.
    pub fn cells(&self) -> usize {
        self.nx.iter().product()
    }

    /// Number of time levels, `nt + 1`.
    pub fn levels(&self) -> usize {
        self.nt + 1
    }

    pub fn cell_volume(&self) -> f64 {
        self.h.iter().product()
    }

    /// `|Ω|` from the box extents.
    pub fn domain_volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(lo, hi)| hi - lo).product()
    }

    /// `|Ω_T| = |Ω|·T`.
    pub fn spacetime_volume(&self) -> f64 {
        self.domain_volume() * self.t_final
    }

    pub fn time(&self, level: usize) -> f64 {
        level as f64 * self.dt
    }

    /// Row-major strides: the last axis varies fastest.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dim()];
        for k in (0..self.dim().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.nx[k + 1];
        }
        strides
    }

    /// Per-axis index of a flat cell index.
    pub fn multi_index(&self, cell: usize, out: &mut [usize]) {
        let mut rest = cell;
        for k in (0..self.dim()).rev() {
            out[k] = rest % self.nx[k];
            rest /= self.nx[k];
        }
    }

    /// Midpoint coordinates of a flat cell index.
    pub fn cell_center(&self, cell: usize, out: &mut [f64]) {
        let mut rest = cell;
        for k in (0..self.dim()).rev() {
            let i = rest % self.nx[k];
            rest /= self.nx[k];
            out[k] = self.lo[k] + (i as f64 + 0.5) * self.h[k];
        }
    }

    /// The spatial midpoint of the box.
    pub fn box_center(&self) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(lo, hi)| 0.5 * (lo + hi))
            .collect()
    }
}

/// Builds a grid; see [`Grid::new`].
pub fn make_grid(bounds: &[(f64, f64)], nx: &[usize], t_final: f64, nt: usize) -> Result<Grid> {
    Grid::new(bounds, nx, t_final, nt)
}
