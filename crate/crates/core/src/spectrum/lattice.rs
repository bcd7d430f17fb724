//! Lattice convolution of the per-symbol self-information (dp method).
//!
//! Each symbol's self-information `v` is rounded down and up to the lattice
//! `step * Z`. Convolving the rounded-down law `n` times gives a sum that is
//! never above the true self-information, the rounded-up law one that is
//! never below, so their tails bracket the exact tail.

use crate::sources::IidSource;

use super::tie_slack;

const SNAP_TOL: f64 = 1e-9;

fn lattice_index(v: f64, step: f64) -> (i64, i64) {
    let x = v / step;
    let r = x.round();
    if (x - r).abs() <= SNAP_TOL {
        (r as i64, r as i64)
    } else {
        (x.floor() as i64, x.ceil() as i64)
    }
}

/// Law of the sum of `n` i.i.d. lattice values: `(offset, masses)` where
/// `masses[j]` is the probability of index `offset + j`.
fn convolve(kernel: &[(i64, f64)], n: usize) -> (i64, Vec<f64>) {
    let min = kernel.iter().map(|k| k.0).min().unwrap_or(0);
    let span = (kernel.iter().map(|k| k.0).max().unwrap_or(0) - min) as usize;
    let mut dist = vec![1.0];
    for _ in 0..n {
        let mut next = vec![0.0; dist.len() + span];
        for &(idx, p) in kernel {
            let shift = (idx - min) as usize;
            for (j, &m) in dist.iter().enumerate() {
                if m != 0.0 {
                    next[j + shift] += m * p;
                }
            }
        }
        dist = next;
    }
    (min * n as i64, dist)
}

fn tails(offset: i64, dist: &[f64], step: f64, thresholds: &[f64]) -> Vec<f64> {
    let mut suffix = vec![0.0; dist.len() + 1];
    for j in (0..dist.len()).rev() {
        suffix[j] = suffix[j + 1] + dist[j];
    }
    thresholds
        .iter()
        .map(|&t| {
            let cut = t - tie_slack(t);
            let (mut lo, mut hi) = (0, dist.len());
            while lo < hi {
                let mid = (lo + hi) / 2;
                if ((offset + mid as i64) as f64) * step < cut {
                    lo = mid + 1;
                } else {
                    hi = mid;
                }
            }
            let j = lo;
            suffix[j].clamp(0.0, 1.0)
        })
        .collect()
}

/// `(lower, upper)` bounds on `Pr{ -log_base P(X^n) >= t }` for each `t`.
pub(super) fn tail_bounds(
    src: &IidSource,
    n: usize,
    base: usize,
    step: f64,
    thresholds: &[f64],
) -> Vec<(f64, f64)> {
    let ln_b = (base as f64).ln();
    let mut down = Vec::new();
    let mut up = Vec::new();
    for &p in src.pmf().iter().filter(|&&p| p > 0.0) {
        let (lo, hi) = lattice_index(-p.ln() / ln_b, step);
        down.push((lo, p));
        up.push((hi, p));
    }
    let (off_lo, dist_lo) = convolve(&down, n);
    let (off_hi, dist_hi) = convolve(&up, n);
    let lower = tails(off_lo, &dist_lo, step, thresholds);
    let upper = tails(off_hi, &dist_hi, step, thresholds);
    lower.into_iter().zip(upper).collect()
}
