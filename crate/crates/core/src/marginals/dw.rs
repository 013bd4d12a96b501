//! Discrete Weibull distribution and its zero-inflated mixture.
//!
//! `P(Y <= y) = 1 - q^((y+1)^beta)` for `y = 0, 1, ...`. The survival
//! function `q^((y+1)^beta)` is evaluated directly so upper-tail quantities
//! keep relative precision.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Tail mass left out when moments are obtained by truncated summation.
pub const MOMENT_TAIL: f64 = 1e-10;

/// A count distribution that can be mapped into the latent Gaussian space.
pub trait CountDistribution {
    /// `P(Y <= y)`; zero for negative `y`.
    fn cdf(&self, y: i64) -> f64;
    /// `P(Y > y)`; one for negative `y`.
    fn sf(&self, y: i64) -> f64;
    fn ln_pmf(&self, y: u64) -> f64;
    fn pmf(&self, y: u64) -> f64 {
        self.ln_pmf(y).exp()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DwParams {
    q: f64,
    beta: f64,
    ln_q: f64,
}

impl DwParams {
    pub fn new(q: f64, beta: f64) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::domain(format!("q must lie in (0,1), got {q}")));
        }
        Self::check_beta(beta)?;
        Ok(Self { q, beta, ln_q: q.ln() })
    }

    /// Build from `ln q`, which keeps precision when `q` is within rounding of 1.
    pub fn from_ln_q(ln_q: f64, beta: f64) -> Result<Self> {
        if !(ln_q < 0.0 && ln_q.is_finite()) {
            return Err(Error::domain(format!("ln q must be negative and finite, got {ln_q}")));
        }
        Self::check_beta(beta)?;
        Ok(Self { q: ln_q.exp(), beta, ln_q })
    }

    fn check_beta(beta: f64) -> Result<()> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::domain(format!("beta must be positive, got {beta}")));
        }
        Ok(())
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn ln_q(&self) -> f64 {
        self.ln_q
    }

    /// `(y+1)^beta - y^beta` without cancellation for large `y`.
    #[inline]
    fn power_step(&self, y: u64) -> f64 {
        if y == 0 {
            1.0
        } else {
            let yf = y as f64;
            yf.powf(self.beta) * (self.beta * (1.0 / yf).ln_1p()).exp_m1()
        }
    }

    /// Smallest `y` with `cdf(y) >= tau`.
    pub fn quantile(&self, tau: f64) -> Result<u64> {
        if !(tau > 0.0 && tau < 1.0) {
            return Err(Error::domain(format!("tau must lie in (0,1), got {tau}")));
        }
        if tau <= self.cdf(0) {
            return Ok(0);
        }
        let raw = ((-tau).ln_1p() / self.ln_q).powf(1.0 / self.beta) - 1.0;
        let mut y = raw.ceil().max(0.0) as u64;
        // The closed form can land one step off when `raw` sits on an integer.
        while self.cdf(y as i64) < tau {
            y += 1;
        }
        while y > 0 && self.cdf(y as i64 - 1) >= tau {
            y -= 1;
        }
        Ok(y)
    }

    /// Smallest `y` with survival below `tail`.
    pub fn upper_support(&self, tail: f64) -> u64 {
        let raw = (tail.ln() / self.ln_q).powf(1.0 / self.beta) - 1.0;
        let mut y = raw.ceil().max(0.0) as u64;
        while self.sf(y as i64) >= tail {
            y += 1;
        }
        y
    }

    /// Mean by summation of the survival function up to the `1 - 1e-10` quantile.
    pub fn mean(&self) -> f64 {
        let top = self.upper_support(MOMENT_TAIL);
        (0..=top).map(|y| self.sf(y as i64)).sum()
    }

    pub fn variance(&self) -> f64 {
        let top = self.upper_support(MOMENT_TAIL);
        let (mut m1, mut m2) = (0.0, 0.0);
        for y in 0..=top {
            let s = self.sf(y as i64);
            m1 += s;
            m2 += (2 * y + 1) as f64 * s;
        }
        m2 - m1 * m1
    }

    /// Variance over mean: below one is under-dispersed, above one over-dispersed.
    pub fn dispersion_ratio(&self) -> f64 {
        self.variance() / self.mean()
    }
}

impl CountDistribution for DwParams {
    #[inline]
    fn cdf(&self, y: i64) -> f64 {
        if y < 0 {
            0.0
        } else {
            -(((y + 1) as f64).powf(self.beta) * self.ln_q).exp_m1()
        }
    }

    #[inline]
    fn sf(&self, y: i64) -> f64 {
        if y < 0 {
            1.0
        } else {
            (((y + 1) as f64).powf(self.beta) * self.ln_q).exp()
        }
    }

    #[inline]
    fn ln_pmf(&self, y: u64) -> f64 {
        if y == 0 {
            return (-self.ln_q.exp_m1()).ln();
        }
        let head = (y as f64).powf(self.beta) * self.ln_q;
        head + (-(self.power_step(y) * self.ln_q).exp_m1()).ln()
    }

    #[inline]
    fn pmf(&self, y: u64) -> f64 {
        if y == 0 {
            return 1.0 - self.q;
        }
        let head = ((y as f64).powf(self.beta) * self.ln_q).exp();
        head * -(self.power_step(y) * self.ln_q).exp_m1()
    }
}

/// `P(Y <= y)` with the convention `cdf(-1) = 0`.
pub fn dw_cdf(y: i64, params: &DwParams) -> Result<f64> {
    if y < -1 {
        return Err(Error::domain(format!("cdf argument must be >= -1, got {y}")));
    }
    Ok(params.cdf(y))
}

pub fn dw_pmf(y: i64, params: &DwParams) -> Result<f64> {
    if y < 0 {
        return Err(Error::domain(format!("pmf argument must be >= 0, got {y}")));
    }
    Ok(params.pmf(y as u64))
}

pub fn dw_quantile(tau: f64, params: &DwParams) -> Result<u64> {
    params.quantile(tau)
}

/// Cdf of the continuous Weibull whose integer discretization is `DW(q, beta)`:
/// `1 - q^(y^beta)` for `y >= 0`.
pub fn continuous_weibull_cdf(y: f64, params: &DwParams) -> f64 {
    if y <= 0.0 {
        0.0
    } else {
        -(y.powf(params.beta) * params.ln_q).exp_m1()
    }
}

/// A base count distribution with extra point mass `pi` at zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZeroInflated<D> {
    pub base: D,
    pub pi: f64,
}

impl<D: CountDistribution> ZeroInflated<D> {
    pub fn new(base: D, pi: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&pi) {
            return Err(Error::domain(format!("zero-inflation mass must lie in [0,1], got {pi}")));
        }
        Ok(Self { base, pi })
    }
}

impl<D: CountDistribution> CountDistribution for ZeroInflated<D> {
    fn cdf(&self, y: i64) -> f64 {
        if y < 0 {
            0.0
        } else {
            self.pi + (1.0 - self.pi) * self.base.cdf(y)
        }
    }

    fn sf(&self, y: i64) -> f64 {
        if y < 0 {
            1.0
        } else {
            (1.0 - self.pi) * self.base.sf(y)
        }
    }

    fn ln_pmf(&self, y: u64) -> f64 {
        if y == 0 {
            self.pmf(0).ln()
        } else {
            (1.0 - self.pi).ln() + self.base.ln_pmf(y)
        }
    }

    fn pmf(&self, y: u64) -> f64 {
        if y == 0 {
            self.pi + (1.0 - self.pi) * self.base.pmf(0)
        } else {
            (1.0 - self.pi) * self.base.pmf(y)
        }
    }
}

pub fn zidw_pmf(y: i64, params: &DwParams, pi: f64) -> Result<f64> {
    if y < 0 {
        return Err(Error::domain(format!("pmf argument must be >= 0, got {y}")));
    }
    Ok(ZeroInflated::new(*params, pi)?.pmf(y as u64))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(q: f64, b: f64) -> DwParams {
        DwParams::new(q, b).unwrap()
    }

    #[test]
    fn zero_mass_is_one_minus_q() {
        let d = p(0.7, 1.5);
        assert_eq!(d.pmf(0), 1.0 - 0.7);
        assert!((d.cdf(0) - 0.3).abs() < 1e-15);
        assert_eq!(dw_cdf(-1, &d).unwrap(), 0.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(DwParams::new(1.0, 1.0).is_err());
        assert!(DwParams::new(0.0, 1.0).is_err());
        assert!(DwParams::new(0.5, 0.0).is_err());
        assert!(DwParams::new(0.5, f64::NAN).is_err());
        assert!(dw_pmf(-1, &p(0.5, 1.0)).is_err());
        assert!(dw_cdf(-2, &p(0.5, 1.0)).is_err());
        assert!(p(0.5, 1.0).quantile(1.0).is_err());
        assert!(p(0.5, 1.0).quantile(0.0).is_err());
    }

    #[test]
    fn quantile_below_zero_mass_is_zero() {
        assert_eq!(p(0.7, 1.5).quantile(0.25).unwrap(), 0);
    }

    #[test]
    fn ln_pmf_survives_deep_tail() {
        let d = p(0.3, 2.0);
        let lp = d.ln_pmf(60);
        assert!(lp.is_finite() && lp < -700.0);
        assert_eq!(d.pmf(60), 0.0);
    }

    #[test]
    fn zero_inflation_limits() {
        let d = p(0.7, 1.5);
        for y in 0..10 {
            assert_eq!(zidw_pmf(y, &d, 0.0).unwrap(), d.pmf(y as u64));
        }
        assert_eq!(zidw_pmf(0, &d, 1.0).unwrap(), 1.0);
        assert!((zidw_pmf(0, &d, 0.2).unwrap() - 0.44).abs() < 1e-15);
        assert!(ZeroInflated::new(d, 1.2).is_err());
    }
}
