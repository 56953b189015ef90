use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fields::{sample, Field, Grid};

pub const DEFAULT_GAMMA: f64 = 2.0;

/// Default bump time as a fraction of `T`.
pub const CENTER_TIME_FRACTION: f64 = 0.6;

/// Minimum cells per bump radius, in space (`ε ≥ 4h`) and parabolically in
/// time (`ε² ≥ 4dt`).
pub const CELLS_PER_RADIUS: f64 = 4.0;

#[derive(Debug, Clone, PartialEq)]
pub struct BumpCenter {
    pub x: Vec<f64>,
    pub t: f64,
}

impl BumpCenter {
    /// Box midpoint at `t₀ = 0.6T`.
    pub fn default_for(grid: &Grid) -> Self {
        BumpCenter {
            x: grid.box_center(),
            t: CENTER_TIME_FRACTION * grid.t_final(),
        }
    }
}

/// `f_ε = ε^{−γ} ψ((x − x₀)/ε, (t − t₀)/ε²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BumpFamily {
    pub gamma: f64,
    /// `None` selects [`BumpCenter::default_for`].
    pub center: Option<BumpCenter>,
}

impl Default for BumpFamily {
    fn default() -> Self {
        BumpFamily {
            gamma: DEFAULT_GAMMA,
            center: None,
        }
    }
}

impl BumpFamily {
    pub fn center_on(&self, grid: &Grid) -> BumpCenter {
        self.center.clone().unwrap_or_else(|| BumpCenter::default_for(grid))
    }

    pub fn sample(&self, eps: f64, grid: &Arc<Grid>) -> Result<Field> {
        bump(eps, self.gamma, Some(&self.center_on(grid)), grid)
    }
}

/// `ψ` as a function of `ρ² = |y|² + s²`: `exp(−1/(1 − ρ²))` inside the unit
/// ball, 0 outside.
pub fn bump_profile(rho2: f64) -> f64 {
    if rho2 < 1.0 {
        (-1.0 / (1.0 - rho2)).exp()
    } else {
        0.0
    }
}

/// Checks that `ε` is resolved and that the bump's support stays inside
/// the box and the time interval.
pub fn check_bump(eps: f64, center: &BumpCenter, grid: &Grid) -> Result<()> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Domain(format!("eps = {eps} must be positive")));
    }
    let h = grid.max_h();
    let dt = grid.dt();
    if eps < CELLS_PER_RADIUS * h || eps * eps < CELLS_PER_RADIUS * dt {
        let h_need = eps / CELLS_PER_RADIUS;
        let dt_need = eps * eps / CELLS_PER_RADIUS;
        let nx_need: Vec<usize> = (0..grid.dim())
            .map(|k| ((grid.hi()[k] - grid.lo()[k]) / h_need).ceil() as usize)
            .collect();
        let nt_need = (grid.t_final() / dt_need).ceil() as usize;
        return Err(Error::Resolution {
            eps,
            detail: format!(
                "need h <= {h_need} and dt <= {dt_need} (nx >= {nx_need:?}, nt >= {nt_need}); grid has h = {h}, dt = {dt}"
            ),
        });
    }
    if center.x.len() != grid.dim() {
        return Err(Error::Config(format!(
            "bump center has {} coordinates on a {}-dimensional grid",
            center.x.len(),
            grid.dim()
        )));
    }
    for k in 0..grid.dim() {
        if center.x[k] - eps < grid.lo()[k] || center.x[k] + eps > grid.hi()[k] {
            return Err(Error::Domain(format!(
                "bump support [{}, {}] leaves the box along axis {k}",
                center.x[k] - eps,
                center.x[k] + eps
            )));
        }
    }
    let (t_lo, t_hi) = (center.t - eps * eps, center.t + eps * eps);
    if t_lo < 0.0 || t_hi > grid.t_final() {
        return Err(Error::Domain(format!(
            "bump support [{t_lo}, {t_hi}] in time leaves [0, {}]",
            grid.t_final()
        )));
    }
    Ok(())
}

/// Samples `f_ε` on `grid`; `center = None` uses the default center.
pub fn bump(eps: f64, gamma: f64, center: Option<&BumpCenter>, grid: &Arc<Grid>) -> Result<Field> {
    let default;
    let center = match center {
        Some(c) => c,
        None => {
            default = BumpCenter::default_for(grid);
            &default
        }
    };
    check_bump(eps, center, grid)?;
    if !gamma.is_finite() {
        return Err(Error::Domain(format!("gamma = {gamma} must be finite")));
    }
    let amplitude = eps.powf(-gamma);
    let inv_eps2 = 1.0 / (eps * eps);
    sample(
        |x, t| {
            let mut rho2 = 0.0;
            for (xi, ci) in x.iter().zip(&center.x) {
                rho2 += (xi - ci) * (xi - ci) * inv_eps2;
            }
            let s = (t - center.t) * inv_eps2;
            amplitude * bump_profile(rho2 + s * s)
        },
        grid,
    )
}
