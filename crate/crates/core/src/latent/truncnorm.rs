//! Exact draws from a normal restricted to `(lo, hi]`.

use crate::error::{Error, Result};
use crate::special::{norm_cdf, norm_isf, norm_quantile, norm_sf};
use rand::Rng;
use rand_distr::{Distribution, Exp, StandardNormal};

/// Standardized bound beyond which the exponential-proposal sampler is used.
const TAIL_START: f64 = 5.0;

pub fn truncated_normal_sample<R: Rng + ?Sized>(mu: f64, sigma: f64, lo: f64, hi: f64, rng: &mut R) -> Result<f64> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::domain(format!("sigma must be positive, got {sigma}")));
    }
    if !(lo < hi) || lo.is_nan() || hi.is_nan() {
        return Err(Error::input(format!("empty truncation interval ({lo}, {hi}]")));
    }
    let a = (lo - mu) / sigma;
    let b = (hi - mu) / sigma;
    let x = standard_truncated(a, b, rng);
    let v = mu + sigma * x;
    // Rescaling can round onto the open end.
    Ok(if v <= lo {
        lo.next_up()
    } else if v > hi {
        hi
    } else {
        v
    })
}

/// Standard normal restricted to `(a, b]`, `a < b`.
pub fn standard_truncated<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> f64 {
    if a == f64::NEG_INFINITY && b == f64::INFINITY {
        return rng.sample(StandardNormal);
    }
    if a >= TAIL_START {
        return upper_tail(a, b, rng);
    }
    if b <= -TAIL_START {
        let x = -upper_tail(-b, -a, rng);
        return if x <= a { a.next_up() } else { x };
    }
    let u: f64 = rng.random();
    let x = if a > 0.0 {
        let (sa, sb) = (norm_sf(a), norm_sf(b));
        norm_isf(sa - u * (sa - sb))
    } else {
        let (ca, cb) = (norm_cdf(a), norm_cdf(b));
        norm_quantile(ca + u * (cb - ca))
    };
    if x <= a {
        a.next_up()
    } else if x > b {
        b
    } else {
        x
    }
}

/// Rejection sampler for `(a, b]` with `a > 0` far in the tail.
fn upper_tail<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> f64 {
    if b.is_finite() && b - a < 1.0 / a {
        loop {
            let x = a + (b - a) * (1.0 - rng.random::<f64>());
            if x <= a || x > b {
                continue;
            }
            if rng.random::<f64>().ln() <= -0.5 * (x * x - a * a) {
                return x;
            }
        }
    }
    let rate = 0.5 * (a + (a * a + 4.0).sqrt());
    let exp = Exp::new(rate).expect("positive rate");
    loop {
        let x = a + exp.sample(rng);
        if x <= a || x > b {
            continue;
        }
        if rng.random::<f64>().ln() <= -0.5 * (x - rate).powi(2) {
            return x;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use crate::special::norm_pdf;

    fn mean_of(mu: f64, s: f64, lo: f64, hi: f64, n: usize, seed: u64) -> f64 {
        let mut rng = stream(seed, 0);
        (0..n).map(|_| truncated_normal_sample(mu, s, lo, hi, &mut rng).unwrap()).sum::<f64>() / n as f64
    }

    #[test]
    fn two_sided_mean_matches_closed_form() {
        let (a, b) = (-0.5, 0.5);
        let exact = 3.0 + 2.0 * (norm_pdf(a) - norm_pdf(b)) / (norm_cdf(b) - norm_cdf(a));
        assert!((mean_of(3.0, 2.0, 2.0, 4.0, 100_000, 1) - exact).abs() < 0.01);
    }

    #[test]
    fn far_tail_draws_stay_inside() {
        let mut rng = stream(2, 0);
        for _ in 0..10_000 {
            let v = truncated_normal_sample(0.0, 1.0, 10.0, f64::INFINITY, &mut rng).unwrap();
            assert!(v > 10.0 && v.is_finite());
            let w = truncated_normal_sample(0.0, 1.0, -31.0, -30.0, &mut rng).unwrap();
            assert!(w > -31.0 && w <= -30.0);
            let t = truncated_normal_sample(0.0, 1.0, 9.0, 9.0001, &mut rng).unwrap();
            assert!(t > 9.0 && t <= 9.0001);
        }
    }

    #[test]
    fn rejects_empty_interval() {
        let mut rng = stream(3, 0);
        assert!(truncated_normal_sample(0.0, 1.0, 1.0, 1.0, &mut rng).is_err());
        assert!(truncated_normal_sample(0.0, 0.0, 0.0, 1.0, &mut rng).is_err());
    }
}
