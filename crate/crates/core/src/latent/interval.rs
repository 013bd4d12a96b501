//! Latent Gaussian intervals induced by observed counts.

use crate::error::{Error, Result};
use crate::marginals::CountDistribution;
use crate::special::{norm_isf, norm_quantile};
use serde::{Deserialize, Serialize};

/// Half-open interval `(lo, hi]`; either end may be infinite.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatentInterval {
    pub lo: f64,
    pub hi: f64,
}

impl LatentInterval {
    #[inline]
    pub fn contains(&self, z: f64) -> bool {
        z > self.lo && z <= self.hi
    }
}

/// `Phi^-1(F(y))`, taken from the survival side above the median so that
/// upper-tail bounds keep precision. `-inf` for `y < 0`, `+inf` once the
/// survival mass underflows.
#[inline]
pub fn latent_upper<D: CountDistribution + ?Sized>(y: i64, dist: &D) -> f64 {
    if y < 0 {
        return f64::NEG_INFINITY;
    }
    let c = dist.cdf(y);
    if c <= 0.5 {
        norm_quantile(c)
    } else {
        let s = dist.sf(y);
        if s <= 0.0 {
            f64::INFINITY
        } else {
            norm_isf(s)
        }
    }
}

pub fn latent_interval<D: CountDistribution + ?Sized>(y: u64, dist: &D) -> Result<LatentInterval> {
    let lo = latent_upper(y as i64 - 1, dist);
    let hi = latent_upper(y as i64, dist);
    if !(lo < hi) {
        return Err(Error::Consistency(format!(
            "count {y} maps to an empty latent interval ({lo}, {hi}]; the marginal puts no numerical mass on it"
        )));
    }
    Ok(LatentInterval { lo, hi })
}

/// The count whose latent interval contains `z`: smallest `y` with
/// `z <= latent_upper(y)`. Exponential bracketing, then bisection.
pub fn count_from_latent<D: CountDistribution + ?Sized>(z: f64, dist: &D) -> u64 {
    if z <= latent_upper(0, dist) {
        return 0;
    }
    let (mut lo, mut hi) = (0u64, 1u64);
    while z > latent_upper(hi as i64, dist) {
        lo = hi;
        hi = hi.saturating_mul(2);
        if hi == u64::MAX {
            return hi;
        }
    }
    // invariant: z > upper(lo), z <= upper(hi)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if z <= latent_upper(mid as i64, dist) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Rank-based cdf `#{y_i <= y} / (n + 1)` of one observed column.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<u64>,
}

impl EmpiricalCdf {
    pub fn new(column: &[u64]) -> Self {
        let mut sorted = column.to_vec();
        sorted.sort_unstable();
        Self { sorted }
    }

    fn at_most(&self, y: i64) -> usize {
        if y < 0 {
            0
        } else {
            self.sorted.partition_point(|&v| v <= y as u64)
        }
    }
}

impl CountDistribution for EmpiricalCdf {
    fn cdf(&self, y: i64) -> f64 {
        self.at_most(y) as f64 / (self.sorted.len() + 1) as f64
    }

    fn sf(&self, y: i64) -> f64 {
        (self.sorted.len() + 1 - self.at_most(y)) as f64 / (self.sorted.len() + 1) as f64
    }

    fn ln_pmf(&self, y: u64) -> f64 {
        let k = self.at_most(y as i64) - self.at_most(y as i64 - 1);
        (k as f64 / (self.sorted.len() + 1) as f64).ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::marginals::DwParams;

    #[test]
    fn worked_intervals() {
        let d = DwParams::new(0.5, 1.0).unwrap();
        let iv = latent_interval(0, &d).unwrap();
        assert_eq!(iv.lo, f64::NEG_INFINITY);
        assert!(iv.hi.abs() < 1e-15);

        let d = DwParams::new(0.85, 2.5).unwrap();
        assert!((latent_interval(0, &d).unwrap().hi - -1.036_433_389_493_79).abs() < 1e-9);

        let d = DwParams::new(0.7, 1.5).unwrap();
        let iv = latent_interval(1, &d).unwrap();
        assert!((iv.lo - -0.524_400_512_708_041).abs() < 1e-9);
        assert!((iv.hi - 0.346_068_285_792_523).abs() < 1e-9, "{}", iv.hi);
    }

    #[test]
    fn empty_interval_is_a_consistency_error() {
        let d = DwParams::new(0.01, 5.0).unwrap();
        assert!(matches!(latent_interval(40, &d), Err(Error::Consistency(_))));
    }

    #[test]
    fn inverse_of_interval_map() {
        let d = DwParams::new(0.95, 0.3).unwrap();
        for &z in &[-3.0, -0.1, 0.0, 0.4, 1.7, 4.2, 7.9] {
            let y = count_from_latent(z, &d);
            assert!(latent_interval(y, &d).unwrap().contains(z));
        }
    }

    #[test]
    fn empirical_ranks() {
        let e = EmpiricalCdf::new(&[0, 0, 3, 1]);
        assert_eq!(e.cdf(0), 0.4);
        assert_eq!(e.cdf(2), 0.6);
        assert_eq!(e.sf(3), 0.2);
        let a = latent_interval(1, &e).unwrap();
        let b = latent_interval(3, &e).unwrap();
        assert!(a.hi <= b.lo);
    }
}
