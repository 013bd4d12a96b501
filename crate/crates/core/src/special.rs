//! Scalar special functions shared across modules.

use statrs::function::erf::{erfc, erfc_inv};
use std::f64::consts::SQRT_2;

/// Standard normal cdf.
#[inline]
pub fn norm_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / SQRT_2)
}

#[inline]
pub fn norm_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Standard normal upper tail, `P(Z > z)`, accurate for large positive `z`.
#[inline]
pub fn norm_sf(z: f64) -> f64 {
    0.5 * erfc(z / SQRT_2)
}

/// Standard normal quantile. Returns `-inf` at 0 and `+inf` at 1.
#[inline]
pub fn norm_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        f64::NEG_INFINITY
    } else if p >= 1.0 {
        f64::INFINITY
    } else if p <= 0.5 {
        -SQRT_2 * erfc_inv(2.0 * p)
    } else {
        SQRT_2 * erfc_inv(2.0 * (1.0 - p))
    }
}

/// The `z` with `P(Z > z) = s`; keeps full precision for tiny `s`.
#[inline]
pub fn norm_isf(s: f64) -> f64 {
    -norm_quantile(s)
}

#[inline]
pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^x)` without overflow.
#[inline]
pub fn softplus(x: f64) -> f64 {
    if x > 35.0 {
        x
    } else if x < -35.0 {
        x.exp()
    } else {
        x.exp().ln_1p()
    }
}

/// `ln(logistic(x))`.
#[inline]
pub fn ln_logistic(x: f64) -> f64 {
    -softplus(-x)
}

pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

pub use statrs::function::gamma::ln_gamma;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_inverts_cdf_in_both_tails() {
        for &z in &[-8.0, -5.0, -1.3, 0.0, 0.7, 3.0, 6.5] {
            let p = norm_cdf(z);
            if z <= 0.0 {
                assert!((norm_quantile(p) - z).abs() < 1e-9, "z={z}");
            } else {
                assert!((norm_isf(norm_sf(z)) - z).abs() < 1e-9, "z={z}");
            }
        }
        assert!((norm_quantile(0.15) + 1.036_433_389_493_79).abs() < 1e-12);
    }

    #[test]
    fn logistic_is_stable() {
        assert_eq!(logistic(0.0), 0.5);
        assert!(logistic(-800.0) >= 0.0);
        assert!((ln_logistic(1.734) - logistic(1.734).ln()).abs() < 1e-15);
        assert!(ln_logistic(40.0) < 0.0);
    }
}
