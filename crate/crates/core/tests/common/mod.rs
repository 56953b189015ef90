#![allow(dead_code)]

use std::sync::Arc;

use moserlab::fields::{make_grid, sample, sample_slice, validate, Coefficient, Field, MatrixCoefficient, ProblemSpec};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy)]
struct Blob {
    amp: f64,
    center: [f64; 2],
    width: f64,
    rate: f64,
}

fn blobs(rng: &mut ChaCha8Rng, count: usize, nonneg: bool) -> Vec<Blob> {
    (0..count)
        .map(|_| Blob {
            amp: if nonneg { rng.gen_range(0.0..5.0) } else { rng.gen_range(-5.0..5.0) },
            center: [rng.gen_range(0.1..0.9), rng.gen_range(0.1..0.9)],
            width: rng.gen_range(0.05..0.4),
            rate: rng.gen_range(-2.0..2.0),
        })
        .collect()
}

fn eval(blobs: &[Blob], x: &[f64], t: f64) -> f64 {
    blobs
        .iter()
        .map(|b| {
            let r2: f64 = x.iter().zip(b.center).map(|(a, c)| (a - c) * (a - c)).sum();
            b.amp * (-r2 / (b.width * b.width)).exp() * (b.rate * t).exp()
        })
        .sum()
}

/// Random admissible problem on the unit box with diagonal, variable `A`
/// and `ω ≥ 0`. With `nonneg`, `f ≥ 0` and `φ₀ ≥ 0`.
pub fn random_spec(rng: &mut ChaCha8Rng, dim: usize, nonneg: bool) -> ProblemSpec {
    let nx: Vec<usize> = (0..dim)
        .map(|_| if dim == 1 { rng.gen_range(8..33) } else { rng.gen_range(6..17) })
        .collect();
    let t_final = rng.gen_range(0.05..1.0);
    let nt = rng.gen_range(6..25);
    let bounds = vec![(0.0, 1.0); dim];
    let grid = Arc::new(make_grid(&bounds, &nx, t_final, nt).unwrap());

    let mut lambda = f64::INFINITY;
    let mut diag = Vec::with_capacity(dim);
    for _ in 0..dim {
        let base = rng.gen_range(0.3..3.0);
        let wiggle = rng.gen_range(0.0..0.6) * base;
        let freq = rng.gen_range(1.0..8.0);
        lambda = lambda.min(base - wiggle);
        diag.push(Coefficient::Sampled(
            sample(move |x, t| base + wiggle * (freq * x[0] + 3.0 * t).sin(), &grid).unwrap(),
        ));
    }
    let omega = if rng.gen_bool(0.5) {
        Coefficient::Uniform(rng.gen_range(0.0..3.0))
    } else {
        let w = rng.gen_range(0.0..3.0);
        Coefficient::Sampled(sample(move |x, t| w * (1.0 + (5.0 * x[0] - t).cos()), &grid).unwrap())
    };
    let (nf, np) = (rng.gen_range(1..4), rng.gen_range(0..3));
    let fb = blobs(rng, nf, nonneg);
    let pb = blobs(rng, np, nonneg);
    let f = sample(|x, t| eval(&fb, x, t), &grid).unwrap();
    let phi0 = sample_slice(|x, _| 0.2 * eval(&pb, x, 0.0), &grid, 0.0).unwrap();
    let spec = ProblemSpec::new(&grid, MatrixCoefficient::diagonal(diag), omega, f, phi0, 0.99 * lambda, 4.0).unwrap();
    let report = validate(&spec);
    assert!(report.is_admissible(), "{:?}", report.violations);
    spec
}

pub fn sup(field: &Field) -> f64 {
    field.values().iter().fold(0.0, |m, v| m.max(v.abs()))
}
