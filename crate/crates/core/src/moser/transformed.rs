use crate::error::{Error, Result};
use crate::fields::{Coefficient, Field};

/// Max residual of `∂tv − Δv + |∇v|²/v + ω v ln v − g v` with `v = eᵘ`,
/// `A = I`, over interior cells and levels `n ≥ 1`, relative to `max v`.
///
/// Derivatives are backward in time and central in space, so for smooth `u`
/// and `g = ∂tu − Δu + ωu` the residual is `O(h² + dt)`.
pub fn transformed_equation_residual(u: &Field, omega: &Coefficient, g: &Field) -> Result<f64> {
    u.check_compatible(g)?;
    let grid = u.grid();
    let dim = grid.dim();
    let strides = grid.strides();
    let cells = grid.cells();
    let dt = grid.dt();
    let v = u.map(f64::exp)?;
    let v_max = v.max_value();
    if !v_max.is_finite() {
        return Err(Error::Range("exp(u) overflows".into()));
    }
    let mut idx = vec![0usize; dim];
    let mut worst = 0.0f64;
    for level in 1..grid.levels() {
        let now = v.slice(level);
        let before = v.slice(level - 1);
        let gs = g.slice(level);
        'cells: for c in 0..cells {
            grid.multi_index(c, &mut idx);
            for k in 0..dim {
                if idx[k] == 0 || idx[k] + 1 == grid.nx()[k] {
                    continue 'cells;
                }
            }
            let vc = now[c];
            let mut lap = 0.0;
            let mut grad2 = 0.0;
            for k in 0..dim {
                let h = grid.h()[k];
                let (m, p) = (now[c - strides[k]], now[c + strides[k]]);
                lap += (p - 2.0 * vc + m) / (h * h);
                let d = (p - m) / (2.0 * h);
                grad2 += d * d;
            }
            let dvdt = (vc - before[c]) / dt;
            let w = omega.at(level, c);
            let residual = dvdt - lap + grad2 / vc + w * vc * vc.ln() - gs[c] * vc;
            worst = worst.max(residual.abs());
        }
    }
    Ok(worst / v_max)
}
