//! Fixed-point numbers in `[0, 1]` with a configurable count of fractional bits.

use num_bigint::BigUint;
use num_traits::{Float, Zero};

/// `floor(x * 2^bits)` for finite `x >= 0`, exact.
pub(crate) fn from_f64_floor(x: f64, bits: u32) -> BigUint {
    debug_assert!(x.is_finite() && x >= 0.0);
    if x == 0.0 {
        return BigUint::zero();
    }
    let (mantissa, exponent, _) = Float::integer_decode(x);
    let shift = exponent as i64 + bits as i64;
    let m = BigUint::from(mantissa);
    if shift >= 0 {
        m << shift as u64
    } else {
        m >> (-shift) as u64
    }
}

/// `2^bits`, the fixed-point representation of one.
pub(crate) fn one(bits: u32) -> BigUint {
    BigUint::from(1u8) << bits as u64
}

/// Cumulative split points `0 = Q_0 <= Q_1 <= ... <= Q_K = 2^bits` for the
/// child proportions `q`. The last child absorbs any rounding remainder.
pub(crate) fn cumulative_splits(q: &[f64], bits: u32) -> Vec<BigUint> {
    let top = one(bits);
    let mut out = Vec::with_capacity(q.len() + 1);
    out.push(BigUint::zero());
    let mut running = 0.0;
    for &p in &q[..q.len() - 1] {
        running += p;
        out.push(from_f64_floor(running.min(1.0), bits).min(top.clone()));
    }
    out.push(top);
    out
}
