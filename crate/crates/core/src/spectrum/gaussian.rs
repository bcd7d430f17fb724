//! Standard normal CDF and quantile.

use std::f64::consts::SQRT_2;

use crate::error::{Error, Result};

/// `Phi(u)`, via the complementary error function of the FreeBSD msun
/// library (rational approximations, error below one ulp).
pub fn gaussian_cdf(u: f64) -> f64 {
    0.5 * libm::erfc(-u / SQRT_2)
}

/// `Phi^-1(p)` by bisection on [`gaussian_cdf`]. The CDF is monotone, so the
/// search runs until the bracket endpoints are adjacent doubles.
pub fn gaussian_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidQuery(format!("quantile level {p} is outside (0, 1)")));
    }
    let (mut lo, mut hi) = (-40.0f64, 40.0f64);
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let c = gaussian_cdf(mid);
        if c == p {
            return Ok(mid);
        }
        if c < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // pick the endpoint whose CDF is closer
    if (gaussian_cdf(lo) - p).abs() <= (gaussian_cdf(hi) - p).abs() {
        Ok(lo)
    } else {
        Ok(hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Composite Simpson integration of the density from 0 to `u`.
    fn simpson_cdf(u: f64) -> f64 {
        let density = |y: f64| (-0.5 * y * y).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let steps = 20_000;
        let h = u / steps as f64;
        let mut acc = density(0.0) + density(u);
        for i in 1..steps {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * density(i as f64 * h);
        }
        0.5 + acc * h / 3.0
    }

    #[test]
    fn cdf_matches_quadrature() {
        for u in [-8.0, -4.5, -1.959964, -0.3, 0.0, 0.7, 1.0, 1.959964, 3.0, 6.0, 8.0] {
            assert!((gaussian_cdf(u) - simpson_cdf(u)).abs() < 1e-10, "u = {u}");
        }
        assert!((gaussian_cdf(1.959964) - 0.975).abs() < 1e-6);
    }

    #[test]
    fn cdf_limits_and_symmetry() {
        assert_eq!(gaussian_cdf(0.0), 0.5);
        assert_eq!(gaussian_cdf(f64::INFINITY), 1.0);
        assert_eq!(gaussian_cdf(f64::NEG_INFINITY), 0.0);
        for i in 0..=160 {
            let u = -8.0 + 0.1 * i as f64;
            assert!((gaussian_cdf(-u) - (1.0 - gaussian_cdf(u))).abs() < 1e-12);
        }
    }

    #[test]
    fn quantile_values() {
        assert_eq!(gaussian_quantile(0.5).unwrap(), 0.0);
        // independent oracle: plain bisection on the quadrature CDF
        let (mut lo, mut hi) = (0.0, 3.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if simpson_cdf(mid) < 0.9 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let q = gaussian_quantile(0.9).unwrap();
        assert!((q - lo).abs() < 1e-9);
        assert!((q - 1.281_551_565_5).abs() < 1e-9);
    }

    #[test]
    fn quantile_round_trip_and_symmetry() {
        for i in 1..100 {
            let p = i as f64 / 100.0;
            let q = gaussian_quantile(p).unwrap();
            assert!((gaussian_cdf(q) - p).abs() < 1e-9);
            assert!((gaussian_quantile(1.0 - p).unwrap() + q).abs() < 1e-9);
        }
        for p in [1e-12, 1e-6, 1.0 - 1e-6] {
            assert!((gaussian_cdf(gaussian_quantile(p).unwrap()) - p).abs() < 1e-9);
        }
    }

    #[test]
    fn quantile_rejects_bad_levels() {
        for p in [0.0, 1.0, -0.2, 1.5, f64::NAN] {
            assert!(gaussian_quantile(p).is_err());
        }
    }
}
