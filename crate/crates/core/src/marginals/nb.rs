//! Negative binomial counts with mean `mu` and variance `mu + phi * mu^2`.
//! Used as a simulation generator and as a BIC comparator, never as a copula
//! marginal.

use super::dw::{CountDistribution, ZeroInflated};
use crate::error::{Error, Result};
use crate::special::ln_gamma;
use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NbParams {
    mu: f64,
    phi: f64,
}

impl NbParams {
    pub fn new(mu: f64, phi: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::domain(format!("NB mean must be positive, got {mu}")));
        }
        if !(phi > 0.0 && phi.is_finite()) {
            return Err(Error::domain(format!("NB dispersion must be positive, got {phi}")));
        }
        Ok(Self { mu, phi })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Size parameter `r = 1/phi`.
    pub fn size(&self) -> f64 {
        1.0 / self.phi
    }

    pub fn variance(&self) -> f64 {
        self.mu + self.phi * self.mu * self.mu
    }
}

impl CountDistribution for NbParams {
    fn cdf(&self, y: i64) -> f64 {
        if y < 0 {
            return 0.0;
        }
        let r = self.size();
        let p = r / (r + self.mu);
        if p > 0.5 {
            1.0 - beta_reg(y as f64 + 1.0, r, self.mu / (r + self.mu))
        } else {
            beta_reg(r, y as f64 + 1.0, p)
        }
    }

    fn sf(&self, y: i64) -> f64 {
        if y < 0 {
            return 1.0;
        }
        let r = self.size();
        let p = r / (r + self.mu);
        if p > 0.5 {
            beta_reg(y as f64 + 1.0, r, self.mu / (r + self.mu))
        } else {
            1.0 - beta_reg(r, y as f64 + 1.0, p)
        }
    }

    fn ln_pmf(&self, y: u64) -> f64 {
        let r = self.size();
        let yf = y as f64;
        let ln_denom = (r + self.mu).ln();
        ln_gamma(yf + r) - ln_gamma(r) - ln_gamma(yf + 1.0) + r * (r.ln() - ln_denom)
            + if y == 0 { 0.0 } else { yf * (self.mu.ln() - ln_denom) }
    }
}

/// NB regression: `log mu = x'theta`, constant `log phi`, optional zero inflation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NbCoefficients {
    pub theta: Vec<f64>,
    pub log_phi: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pi: Option<f64>,
}

impl NbCoefficients {
    pub fn free_parameters(&self) -> usize {
        self.theta.len() + 1 + usize::from(self.pi.is_some())
    }

    pub fn row_params(&self, x_row: &[f64]) -> Result<NbParams> {
        if x_row.len() != self.theta.len() {
            return Err(Error::shape(format!(
                "design row has {} entries, coefficients {}",
                x_row.len(),
                self.theta.len()
            )));
        }
        let eta: f64 = x_row.iter().zip(&self.theta).map(|(a, b)| a * b).sum();
        NbParams::new(eta.exp(), self.log_phi.exp())
            .map_err(|e| Error::numeric(format!("linear predictor leaves the NB domain: {e}")))
    }
}

pub fn nb_log_likelihood(y: &[u64], x: &super::regression::DesignMatrix, coef: &NbCoefficients) -> Result<f64> {
    if y.len() != x.nrows() {
        return Err(Error::shape(format!("{} counts but {} design rows", y.len(), x.nrows())));
    }
    let mut total = 0.0;
    for (i, &yi) in y.iter().enumerate() {
        let base = match coef.row_params(x.row(i)) {
            Ok(b) => b,
            Err(Error::Numeric(_)) => return Ok(f64::NEG_INFINITY),
            Err(e) => return Err(e),
        };
        total += match coef.pi {
            Some(pi) => ZeroInflated::new(base, pi)?.ln_pmf(yi),
            None => base.ln_pmf(yi),
        };
    }
    Ok(if total.is_nan() { f64::NEG_INFINITY } else { total })
}
