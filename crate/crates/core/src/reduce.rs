//! Fixed-order pairwise reductions.
//!
//! Every sum over grid samples in this crate goes through [`pairwise_sum_by`].
//! The recursion splits an index range at the same midpoints no matter how
//! many worker threads are available, so results are bit-identical across
//! thread counts. Parallelism only decides *who* evaluates a subtree.

/// Ranges at or below this length are summed with a plain loop.
const LEAF: usize = 64;

/// Ranges above this length hand their halves to `rayon::join`.
const PAR_THRESHOLD: usize = 1 << 14;

/// Pairwise sum of `term(i)` for `i` in `0..n`.
pub fn pairwise_sum_by<F>(n: usize, term: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    sum_range(0, n, &term)
}

/// Pairwise sum of a slice.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    pairwise_sum_by(values.len(), |i| values[i])
}

/// Pairwise dot product.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    pairwise_sum_by(a.len(), |i| a[i] * b[i])
}

fn sum_range<F>(lo: usize, hi: usize, term: &F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let len = hi - lo;
    if len <= LEAF {
        let mut acc = 0.0;
        for i in lo..hi {
            acc += term(i);
        }
        return acc;
    }
    let mid = lo + len / 2;
    if len > PAR_THRESHOLD {
        let (a, b) = rayon::join(|| sum_range(lo, mid, term), || sum_range(mid, hi, term));
        a + b
    } else {
        sum_range(lo, mid, term) + sum_range(mid, hi, term)
    }
}

/// Maximum of `term(i)` over `0..n`; `f64::NEG_INFINITY` for an empty range.
pub fn max_by<F>(n: usize, term: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    use rayon::prelude::*;
    // max is order-independent, so a plain parallel reduction is deterministic
    (0..n)
        .into_par_iter()
        .map(&term)
        .reduce(|| f64::NEG_INFINITY, f64::max)
}
