//! Gaussian tail functions and a bracketing root finder.

use statrs::function::erf::erfc_inv;
use std::f64::consts::{PI, SQRT_2};

/// Standard normal upper tail, Q(x) = P(Z > x).
pub fn q(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

/// Inverse of [`q`] on (0, 1).
pub fn q_inv(p: f64) -> f64 {
    // statrs' erfc_inv is good to ~1e-10; two Newton steps against the
    // full-precision tail polish it.
    let mut x = SQRT_2 * erfc_inv(2.0 * p);
    if !x.is_finite() {
        return x;
    }
    for _ in 0..2 {
        let dens = (-0.5 * x * x).exp() / (2.0 * PI).sqrt();
        if dens == 0.0 {
            break;
        }
        x += (q(x) - p) / dens;
    }
    x
}

/// Standard normal CDF.
pub fn phi(x: f64) -> f64 {
    q(-x)
}

/// Inverse standard normal CDF.
pub fn phi_inv(p: f64) -> f64 {
    -q_inv(p)
}

/// Bisection for a root of `f` on `[lo, hi]`. Requires a sign change;
/// returns `None` otherwise. Stops once the bracket is within `rel_tol`
/// of its midpoint magnitude or after 200 halvings.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, rel_tol: f64) -> Option<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() || flo.is_nan() || fhi.is_nan() {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() <= rel_tol * mid.abs().max(f64::MIN_POSITIVE) {
            return Some(mid);
        }
        let fmid = f(mid);
        if fmid == 0.0 {
            return Some(mid);
        }
        if fmid.signum() == flo.signum() {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_reference_values() {
        // Reference values from high-precision tables.
        assert!((q(0.0) - 0.5).abs() < 1e-15);
        assert!((q(1.0) - 0.158_655_253_931_457_05).abs() < 1e-15, "{:e}", q(1.0) - 0.158_655_253_931_457_05);
        let rel = (q(4.753_424_308_822_899) - 1e-6).abs() / 1e-6;
        assert!(rel < 1e-12, "rel {rel}");
        assert!((q(-1.281_551_565_544_600_5) - 0.9).abs() < 1e-14);
    }

    #[test]
    fn q_inv_roundtrip() {
        for &p in &[1e-12, 1e-9, 1e-6, 1e-3, 0.1, 0.5, 0.9, 0.999] {
            let x = q_inv(p);
            assert!((q(x) - p).abs() / p < 1e-12, "p={p} rel={:e}", (q(x) - p).abs() / p);
        }
    }

    #[test]
    fn bisect_finds_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - SQRT_2).abs() < 1e-12);
        assert!(bisect(|x| x * x + 1.0, 0.0, 2.0, 1e-12).is_none());
    }
}
