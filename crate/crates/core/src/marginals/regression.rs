//! Covariate-linked discrete Weibull regression: logit link on `q`, log link
//! on `beta`, optional constant zero-inflation mass.

use super::dw::{CountDistribution, DwParams, ZeroInflated};
use crate::error::{Error, Result};
use crate::special::ln_logistic;
use serde::{Deserialize, Serialize};

/// Row-major `n x k` design matrix whose first column is the intercept.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignMatrix {
    n: usize,
    k: usize,
    data: Vec<f64>,
}

impl DesignMatrix {
    /// Prepend an intercept column to `n x d` row-major covariates.
    pub fn with_intercept(n: usize, d: usize, covariates: &[f64]) -> Result<Self> {
        if covariates.len() != n * d {
            return Err(Error::shape(format!(
                "covariates hold {} values, expected {n} x {d}",
                covariates.len()
            )));
        }
        let k = d + 1;
        let mut data = Vec::with_capacity(n * k);
        for i in 0..n {
            data.push(1.0);
            data.extend_from_slice(&covariates[i * d..(i + 1) * d]);
        }
        Ok(Self { n, k, data })
    }

    pub fn intercept_only(n: usize) -> Self {
        Self { n, k: 1, data: vec![1.0; n] }
    }

    /// Rows must already carry the leading 1.
    pub fn from_rows(n: usize, k: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * k || k == 0 {
            return Err(Error::shape(format!("design data has {} values, expected {n} x {k}", data.len())));
        }
        Ok(Self { n, k, data })
    }

    pub fn nrows(&self) -> usize {
        self.n
    }

    pub fn ncols(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.k..(i + 1) * self.k]
    }

    pub fn column_means(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.k];
        for i in 0..self.n {
            for (acc, v) in m.iter_mut().zip(self.row(i)) {
                *acc += v;
            }
        }
        m.iter_mut().for_each(|v| *v /= self.n.max(1) as f64);
        m
    }
}

/// Regression coefficients for one column. `gamma` may have length 1 for the
/// constant-`beta` variant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DwCoefficients {
    pub theta: Vec<f64>,
    pub gamma: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pi: Option<f64>,
}

impl DwCoefficients {
    pub fn new(theta: Vec<f64>, gamma: Vec<f64>, pi: Option<f64>) -> Result<Self> {
        let c = Self { theta, gamma, pi };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.theta.is_empty() {
            return Err(Error::shape("theta must hold at least the intercept"));
        }
        if self.gamma.len() != self.theta.len() && self.gamma.len() != 1 {
            return Err(Error::shape(format!(
                "gamma has length {}, expected {} or 1",
                self.gamma.len(),
                self.theta.len()
            )));
        }
        if let Some(pi) = self.pi {
            if !(0.0..=1.0).contains(&pi) {
                return Err(Error::domain(format!("pi must lie in [0,1], got {pi}")));
            }
        }
        Ok(())
    }

    /// Number of free coefficients, as counted by BIC.
    pub fn free_parameters(&self) -> usize {
        self.theta.len() + self.gamma.len() + usize::from(self.pi.is_some())
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `q = logistic(x'theta)`, `beta = exp(x'gamma)` for one design row.
pub fn link_params(x_row: &[f64], coef: &DwCoefficients) -> Result<DwParams> {
    if x_row.len() != coef.theta.len() {
        return Err(Error::shape(format!(
            "design row has {} entries, coefficients {}",
            x_row.len(),
            coef.theta.len()
        )));
    }
    let eta_q = dot(x_row, &coef.theta);
    let eta_b = if coef.gamma.len() == 1 { coef.gamma[0] } else { dot(x_row, &coef.gamma) };
    if !eta_q.is_finite() || !eta_b.is_finite() {
        return Err(Error::numeric(format!("non-finite linear predictor ({eta_q}, {eta_b})")));
    }
    DwParams::from_ln_q(ln_logistic(eta_q), eta_b.exp())
        .map_err(|e| Error::numeric(format!("linear predictor leaves the parameter domain: {e}")))
}

/// Distribution of one cell, zero-inflated when `coef.pi` is set.
pub fn row_distribution(x_row: &[f64], coef: &DwCoefficients) -> Result<RowDw> {
    let base = link_params(x_row, coef)?;
    Ok(match coef.pi {
        Some(pi) => RowDw::ZeroInflated(ZeroInflated::new(base, pi)?),
        None => RowDw::Plain(base),
    })
}

#[derive(Clone, Copy, Debug)]
pub enum RowDw {
    Plain(DwParams),
    ZeroInflated(ZeroInflated<DwParams>),
}

impl CountDistribution for RowDw {
    fn cdf(&self, y: i64) -> f64 {
        match self {
            RowDw::Plain(d) => d.cdf(y),
            RowDw::ZeroInflated(d) => d.cdf(y),
        }
    }
    fn sf(&self, y: i64) -> f64 {
        match self {
            RowDw::Plain(d) => d.sf(y),
            RowDw::ZeroInflated(d) => d.sf(y),
        }
    }
    fn ln_pmf(&self, y: u64) -> f64 {
        match self {
            RowDw::Plain(d) => d.ln_pmf(y),
            RowDw::ZeroInflated(d) => d.ln_pmf(y),
        }
    }
}

/// `sum_i ln f(y_i | x_i)`. Evaluated in log space; returns `-inf` only when a
/// term is genuinely impossible (or the linear predictor leaves the domain).
pub fn marginal_log_likelihood(y: &[u64], x: &DesignMatrix, coef: &DwCoefficients) -> Result<f64> {
    if y.len() != x.nrows() {
        return Err(Error::shape(format!("{} counts but {} design rows", y.len(), x.nrows())));
    }
    if x.ncols() != coef.theta.len() {
        return Err(Error::shape(format!(
            "design has {} columns, coefficients {}",
            x.ncols(),
            coef.theta.len()
        )));
    }
    coef.validate()?;
    let mut total = 0.0;
    for (i, &yi) in y.iter().enumerate() {
        match row_distribution(x.row(i), coef) {
            Ok(d) => total += d.ln_pmf(yi),
            Err(Error::Numeric(_)) => return Ok(f64::NEG_INFINITY),
            Err(e) => return Err(e),
        }
    }
    Ok(if total.is_nan() { f64::NEG_INFINITY } else { total })
}

/// `-2 loglik + k ln n`.
pub fn bic(y: &[u64], x: &DesignMatrix, coef_hat: &DwCoefficients) -> Result<f64> {
    let ll = marginal_log_likelihood(y, x, coef_hat)?;
    Ok(bic_from_log_likelihood(ll, coef_hat.free_parameters(), y.len()))
}

pub fn bic_from_log_likelihood(log_likelihood: f64, free_parameters: usize, n: usize) -> f64 {
    -2.0 * log_likelihood + free_parameters as f64 * (n as f64).ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn link_matches_simulation_presets() {
        let c = DwCoefficients::new(vec![1.734], vec![2.5f64.ln()], None).unwrap();
        let d = link_params(&[1.0], &c).unwrap();
        assert!((d.q() - 0.85).abs() < 1e-4);
        assert!((d.beta() - 2.5).abs() < 1e-12);

        let c = DwCoefficients::new(vec![0.0, 1.0], vec![0.7f64.ln(), 0.0], None).unwrap();
        let d = link_params(&[1.0, 1.0], &c).unwrap();
        assert!((d.q() - 0.731_058_578_630_005).abs() < 1e-12);
        assert!((d.beta() - 0.7).abs() < 1e-12);
    }

    #[test]
    fn link_rejects_mismatch_and_nonfinite() {
        let c = DwCoefficients::new(vec![0.0, 1.0], vec![0.0, 0.0], None).unwrap();
        assert!(matches!(link_params(&[1.0], &c), Err(Error::Shape(_))));
        assert!(matches!(link_params(&[1.0, f64::INFINITY], &c), Err(Error::Numeric(_))));
    }

    #[test]
    fn single_zero_likelihood() {
        let x = DesignMatrix::intercept_only(1);
        let c = DwCoefficients::new(vec![1.734], vec![0.0], None).unwrap();
        let q = crate::special::logistic(1.734);
        let ll = marginal_log_likelihood(&[0], &x, &c).unwrap();
        assert!((ll - (1.0 - q).ln()).abs() < 1e-12);

        let c0 = DwCoefficients::new(vec![0.0], vec![0.0], None).unwrap();
        assert!((marginal_log_likelihood(&[0], &x, &c0).unwrap() - 0.5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn bic_penalty_terms() {
        let x = DesignMatrix::intercept_only(1);
        let c = DwCoefficients::new(vec![0.0], vec![0.0], None).unwrap();
        let ll = marginal_log_likelihood(&[0], &x, &c).unwrap();
        assert_eq!(bic(&[0], &x, &c).unwrap(), -2.0 * ll);

        let n = 50;
        let x = DesignMatrix::intercept_only(n);
        let y = vec![1u64; n];
        let plain = DwCoefficients::new(vec![0.3], vec![0.1], None).unwrap();
        let zi = DwCoefficients::new(vec![0.3], vec![0.1], Some(0.0)).unwrap();
        let diff = bic(&y, &x, &zi).unwrap() - bic(&y, &x, &plain).unwrap();
        assert!((diff - (n as f64).ln()).abs() < 1e-9);
    }

    #[test]
    fn design_shape_checks() {
        assert!(DesignMatrix::with_intercept(2, 2, &[1.0, 2.0, 3.0]).is_err());
        let x = DesignMatrix::with_intercept(2, 1, &[0.5, 1.5]).unwrap();
        assert_eq!(x.row(1), &[1.0, 1.5]);
        assert_eq!(x.column_means(), vec![1.0, 1.0]);
    }
}
