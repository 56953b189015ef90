use crate::error::{Error, Result};

/// Fits need at least this many points.
pub const MIN_FIT_POINTS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Leading coefficient of the least-squares quadratic through the same
    /// points; positive means the data bend upward away from the line.
    pub curvature: f64,
    pub points: usize,
}

impl LogFit {
    pub fn is_convex(&self) -> bool {
        self.curvature > 0.0
    }
}

/// Ordinary least squares of `y` on `x`.
pub fn fit_points(xs: &[f64], ys: &[f64]) -> Result<LogFit> {
    if xs.len() != ys.len() {
        return Err(Error::Fit(format!("{} regressors for {} responses", xs.len(), ys.len())));
    }
    let n = xs.len();
    if n < MIN_FIT_POINTS {
        return Err(Error::Fit(format!("{n} points; at least {MIN_FIT_POINTS} are required")));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::Fit("non-finite data".into()));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let spread = xs.iter().fold(0.0f64, |m, x| m.max((x - mx).abs()));
    if spread <= 1e-12 * mx.abs().max(1.0) {
        return Err(Error::Fit("degenerate regressor: all x are equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let e = y - (slope * x + intercept);
            e * e
        })
        .sum();
    let r_squared = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    Ok(LogFit {
        slope,
        intercept,
        r_squared,
        curvature: quadratic_coefficient(xs, ys, mx),
        points: n,
    })
}

/// Leading coefficient of the least-squares quadratic, from centered
/// normal equations.
fn quadratic_coefficient(xs: &[f64], ys: &[f64], mx: f64) -> f64 {
    let (mut s2, mut s3, mut s4, mut t1, mut t2, mut t0) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let d = x - mx;
        s2 += d * d;
        s3 += d * d * d;
        s4 += d * d * d * d;
        t0 += y;
        t1 += d * y;
        t2 += d * d * y;
    }
    let n = xs.len() as f64;
    // [n 0 s2; 0 s2 s3; s2 s3 s4] (c0 c1 c2) = (t0 t1 t2)
    let det = n * (s2 * s4 - s3 * s3) - s2 * s2 * s2;
    if det.abs() <= f64::EPSILON * (n * s2 * s4).abs() {
        return 0.0;
    }
    (n * (s2 * t2 - s3 * t1) - s2 * s2 * t0) / det
}
