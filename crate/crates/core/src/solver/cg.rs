//! Jacobi-preconditioned conjugate gradients for symmetric positive definite
//! operators given only as a matrix-vector product.

use rayon::prelude::*;

use crate::reduce::dot;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOutcome {
    pub iterations: usize,
    /// True relative residual `‖b − Ax‖ / ‖b‖` at exit.
    pub relative_residual: f64,
    pub converged: bool,
}

/// Solves `A x = b` starting from the contents of `x`.
pub fn pcg<F>(apply: F, inv_diag: &[f64], b: &[f64], x: &mut [f64], tol: f64, max_iter: usize) -> CgOutcome
where
    F: Fn(&[f64], &mut [f64]),
{
    let n = b.len();
    let b_norm = dot(b, b).sqrt();
    if b_norm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return CgOutcome {
            iterations: 0,
            relative_residual: 0.0,
            converged: true,
        };
    }

    let mut r = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut ap = vec![0.0; n];
    let mut iterations = 0;

    // the recurrence residual drifts from the true one; restart from the true
    // residual until both agree or the budget is spent
    loop {
        apply(x, &mut ap);
        r.par_iter_mut()
            .zip(b.par_iter().zip(ap.par_iter()))
            .for_each(|(r, (b, ax))| *r = b - ax);
        let mut res = dot(&r, &r).sqrt() / b_norm;
        if res <= tol {
            return CgOutcome {
                iterations,
                relative_residual: res,
                converged: true,
            };
        }
        if iterations >= max_iter {
            return CgOutcome {
                iterations,
                relative_residual: res,
                converged: false,
            };
        }

        precondition(inv_diag, &r, &mut z);
        p.copy_from_slice(&z);
        let mut rz = dot(&r, &z);
        while iterations < max_iter {
            apply(&p, &mut ap);
            let pap = dot(&p, &ap);
            if !(pap > 0.0) {
                // loss of positivity: fall back to the true-residual check
                break;
            }
            let step = rz / pap;
            x.par_iter_mut()
                .zip(p.par_iter())
                .for_each(|(x, p)| *x += step * p);
            r.par_iter_mut()
                .zip(ap.par_iter())
                .for_each(|(r, ap)| *r -= step * ap);
            iterations += 1;
            res = dot(&r, &r).sqrt() / b_norm;
            if res <= tol {
                break;
            }
            precondition(inv_diag, &r, &mut z);
            let rz_next = dot(&r, &z);
            let beta = rz_next / rz;
            rz = rz_next;
            p.par_iter_mut()
                .zip(z.par_iter())
                .for_each(|(p, z)| *p = z + beta * *p);
        }
        if iterations >= max_iter || res > tol {
            // one final true-residual evaluation decides
            apply(x, &mut ap);
            r.par_iter_mut()
                .zip(b.par_iter().zip(ap.par_iter()))
                .for_each(|(r, (b, ax))| *r = b - ax);
            let res = dot(&r, &r).sqrt() / b_norm;
            return CgOutcome {
                iterations,
                relative_residual: res,
                converged: res <= tol,
            };
        }
    }
}

fn precondition(inv_diag: &[f64], r: &[f64], z: &mut [f64]) {
    z.par_iter_mut()
        .zip(r.par_iter().zip(inv_diag.par_iter()))
        .for_each(|(z, (r, d))| *z = r * d);
}
