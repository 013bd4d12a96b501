//! Bayesian fits of single count columns by adaptive MH.

use super::dw::{CountDistribution, DwParams};
use super::hpd::hpd_interval;
use super::mh::{run_componentwise, MhConfig};
use super::nb::{nb_log_likelihood, NbCoefficients};
use super::regression::{marginal_log_likelihood, DesignMatrix, DwCoefficients};
use crate::error::{Error, Result};
use crate::special::{logistic, logit, softplus};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Which DW variant to fit.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct DwFitOptions {
    /// Shape does not depend on covariates (single `gamma` intercept).
    pub constant_beta: bool,
    pub zero_inflated: bool,
}

/// Flat natural-scale view of a coefficient set, used for posterior summaries.
pub trait CoefficientVector: Clone {
    fn flatten(&self) -> Vec<f64>;
    /// Rebuild with the layout of `self` from flat values.
    fn rebuild(&self, flat: &[f64]) -> Self;
}

impl CoefficientVector for DwCoefficients {
    fn flatten(&self) -> Vec<f64> {
        let mut v = self.theta.clone();
        v.extend_from_slice(&self.gamma);
        v.extend(self.pi);
        v
    }

    fn rebuild(&self, flat: &[f64]) -> Self {
        let (kt, kg) = (self.theta.len(), self.gamma.len());
        Self {
            theta: flat[..kt].to_vec(),
            gamma: flat[kt..kt + kg].to_vec(),
            pi: self.pi.map(|_| flat[kt + kg]),
        }
    }
}

impl CoefficientVector for NbCoefficients {
    fn flatten(&self) -> Vec<f64> {
        let mut v = self.theta.clone();
        v.push(self.log_phi);
        v.extend(self.pi);
        v
    }

    fn rebuild(&self, flat: &[f64]) -> Self {
        let k = self.theta.len();
        Self { theta: flat[..k].to_vec(), log_phi: flat[k], pi: self.pi.map(|_| flat[k + 1]) }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MarginalPosterior<C = DwCoefficients> {
    pub samples: Vec<C>,
    pub acceptance_rate: f64,
    pub log_likelihood_trace: Vec<f64>,
}

impl<C: CoefficientVector> MarginalPosterior<C> {
    pub fn posterior_mean(&self) -> C {
        let first = &self.samples[0];
        let mut acc = vec![0.0; first.flatten().len()];
        for s in &self.samples {
            for (a, v) in acc.iter_mut().zip(s.flatten()) {
                *a += v;
            }
        }
        let n = self.samples.len() as f64;
        acc.iter_mut().for_each(|a| *a /= n);
        first.rebuild(&acc)
    }

    /// HPD interval for every flattened coefficient.
    pub fn hpd(&self, level: f64) -> Result<Vec<(f64, f64)>> {
        let dim = self.samples[0].flatten().len();
        let flat: Vec<Vec<f64>> = self.samples.iter().map(|s| s.flatten()).collect();
        (0..dim)
            .map(|j| hpd_interval(&flat.iter().map(|v| v[j]).collect::<Vec<_>>(), level))
            .collect()
    }
}

fn gaussian_log_prior(v: &[f64], sd: f64) -> f64 {
    -0.5 * v.iter().map(|a| a * a).sum::<f64>() / (sd * sd)
}

/// Beta(1,1) on `pi` expressed on the logit scale: the Jacobian `pi (1 - pi)`.
fn logit_uniform_log_prior(u: f64) -> f64 {
    -softplus(-u) - softplus(u)
}

fn check_inputs(y: &[u64], x: &DesignMatrix) -> Result<()> {
    if y.is_empty() {
        return Err(Error::input("cannot fit an empty column"));
    }
    if y.len() != x.nrows() {
        return Err(Error::shape(format!("{} counts but {} design rows", y.len(), x.nrows())));
    }
    Ok(())
}

fn zero_fraction(y: &[u64]) -> f64 {
    y.iter().filter(|&&v| v == 0).count() as f64 / y.len() as f64
}

/// Starting values: geometric-shape moment match for `q`, unit shape, and
/// `pi` from the excess of observed zeros over `1 - q`.
fn dw_initial(y: &[u64], x: &DesignMatrix, opts: DwFitOptions) -> Vec<f64> {
    let k = x.ncols();
    let mean = y.iter().sum::<u64>() as f64 / y.len() as f64;
    let mut theta = vec![0.0; k];
    theta[0] = mean.max(1e-3).ln().clamp(-5.0, 5.0);
    let kg = if opts.constant_beta { 1 } else { k };
    let mut v = theta;
    v.extend(std::iter::repeat_n(0.0, kg));
    if opts.zero_inflated {
        let q0 = logistic(v[0]);
        let pi = (zero_fraction(y) - (1.0 - q0)).clamp(0.01, 0.99);
        v.push(logit(pi));
    }
    v
}

fn unpack_dw(v: &[f64], k: usize, opts: DwFitOptions) -> DwCoefficients {
    let kg = if opts.constant_beta { 1 } else { k };
    DwCoefficients {
        theta: v[..k].to_vec(),
        gamma: v[k..k + kg].to_vec(),
        pi: opts.zero_inflated.then(|| logistic(v[k + kg])),
    }
}

/// Posterior draws of the DW regression coefficients for one column under
/// independent Gaussian priors (and a flat prior on `pi` when zero-inflated).
pub fn fit_marginal_mh<R: Rng + ?Sized>(
    y: &[u64],
    x: &DesignMatrix,
    cfg: &MhConfig,
    opts: DwFitOptions,
    rng: &mut R,
) -> Result<MarginalPosterior> {
    check_inputs(y, x)?;
    let k = x.ncols();
    let kg = if opts.constant_beta { 1 } else { k };
    let sd = cfg.prior_sd;
    let log_prior = |v: &[f64]| {
        let mut lp = gaussian_log_prior(&v[..k + kg], sd);
        if opts.zero_inflated {
            lp += logit_uniform_log_prior(v[k + kg]);
        }
        lp
    };
    let log_lik = |v: &[f64]| marginal_log_likelihood(y, x, &unpack_dw(v, k, opts)).unwrap_or(f64::NEG_INFINITY);
    let init = dw_initial(y, x, opts);
    let out = run_componentwise(&init, |v| log_prior(v) + log_lik(v), cfg, rng)?;
    let samples: Vec<DwCoefficients> = out.samples.iter().map(|v| unpack_dw(v, k, opts)).collect();
    let log_likelihood_trace =
        out.samples.iter().zip(&out.log_target_trace).map(|(v, lt)| lt - log_prior(v)).collect();
    Ok(MarginalPosterior { samples, acceptance_rate: out.acceptance_rate, log_likelihood_trace })
}

/// NB regression fit with log link on the mean and a constant dispersion.
pub fn fit_nb_mh<R: Rng + ?Sized>(
    y: &[u64],
    x: &DesignMatrix,
    cfg: &MhConfig,
    zero_inflated: bool,
    rng: &mut R,
) -> Result<MarginalPosterior<NbCoefficients>> {
    check_inputs(y, x)?;
    let k = x.ncols();
    let sd = cfg.prior_sd;
    let unpack = |v: &[f64]| NbCoefficients {
        theta: v[..k].to_vec(),
        log_phi: v[k],
        pi: zero_inflated.then(|| logistic(v[k + 1])),
    };
    let log_prior = |v: &[f64]| {
        let mut lp = gaussian_log_prior(&v[..=k], sd);
        if zero_inflated {
            lp += logit_uniform_log_prior(v[k + 1]);
        }
        lp
    };
    let mean = y.iter().sum::<u64>() as f64 / y.len() as f64;
    let mut init = vec![0.0; k + 1];
    init[0] = mean.max(1e-3).ln().clamp(-5.0, 8.0);
    if zero_inflated {
        let p0_model = (1.0 + mean).recip();
        init.push(logit((zero_fraction(y) - p0_model).clamp(0.01, 0.99)));
    }
    let out = run_componentwise(
        &init,
        |v| log_prior(v) + nb_log_likelihood(y, x, &unpack(v)).unwrap_or(f64::NEG_INFINITY),
        cfg,
        rng,
    )?;
    Ok(MarginalPosterior {
        samples: out.samples.iter().map(|v| unpack(v)).collect(),
        acceptance_rate: out.acceptance_rate,
        log_likelihood_trace: out.samples.iter().zip(&out.log_target_trace).map(|(v, lt)| lt - log_prior(v)).collect(),
    })
}

/// Per-row DW parameters at the given coefficients.
pub fn row_params(x: &DesignMatrix, coef: &DwCoefficients) -> Result<Vec<DwParams>> {
    (0..x.nrows()).map(|i| super::regression::link_params(x.row(i), coef)).collect()
}

/// Fraction of zeros the fitted model predicts, averaged over rows.
pub fn expected_zero_fraction(x: &DesignMatrix, coef: &DwCoefficients) -> Result<f64> {
    let mut acc = 0.0;
    for i in 0..x.nrows() {
        acc += super::regression::row_distribution(x.row(i), coef)?.pmf(0);
    }
    Ok(acc / x.nrows() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn all_zero_column_pushes_q_down() {
        let y = vec![0u64; 50];
        let x = DesignMatrix::intercept_only(50);
        let cfg = MhConfig { iterations: 3000, ..Default::default() };
        let post = fit_marginal_mh(&y, &x, &cfg, DwFitOptions::default(), &mut stream(3, 0)).unwrap();
        let m = post.posterior_mean();
        assert!(m.theta[0] < -1.5, "{:?}", m);
        assert!(post.log_likelihood_trace.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn flatten_round_trip() {
        let c = DwCoefficients { theta: vec![1.0, 2.0], gamma: vec![3.0], pi: Some(0.4) };
        assert_eq!(c.rebuild(&c.flatten()), c);
        let n = NbCoefficients { theta: vec![0.1], log_phi: -0.7, pi: None };
        assert_eq!(n.rebuild(&n.flatten()), n);
    }
}
