//! Componentwise random-walk Metropolis-Hastings with Robbins-Monro scale
//! adaptation. Adaptation only runs during burn-in, so the retained draws come
//! from a fixed-kernel chain.

use crate::error::{Error, Result};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MhConfig {
    pub iterations: usize,
    /// Fraction of iterations discarded; the default keeps the last quarter.
    pub burn_in_fraction: f64,
    pub initial_scale: f64,
    pub adapt: bool,
    pub target_acceptance: f64,
    /// Standard deviation of the zero-mean Gaussian coefficient priors.
    pub prior_sd: f64,
}

impl Default for MhConfig {
    fn default() -> Self {
        Self {
            iterations: 20_000,
            burn_in_fraction: 0.75,
            initial_scale: 0.1,
            adapt: true,
            target_acceptance: 0.44,
            prior_sd: 1.0,
        }
    }
}

impl MhConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::Config("MH iterations must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.burn_in_fraction) {
            return Err(Error::Config(format!(
                "burn-in fraction must lie in [0,1), got {}",
                self.burn_in_fraction
            )));
        }
        if !(self.initial_scale > 0.0) || !(self.prior_sd > 0.0) {
            return Err(Error::Config("proposal scale and prior sd must be positive".into()));
        }
        if !(self.target_acceptance > 0.0 && self.target_acceptance < 1.0) {
            return Err(Error::Config("target acceptance must lie in (0,1)".into()));
        }
        Ok(())
    }

    pub fn burn_in(&self) -> usize {
        let b = (self.iterations as f64 * self.burn_in_fraction).floor() as usize;
        b.min(self.iterations - 1)
    }
}

#[derive(Clone, Debug)]
pub struct MhOutput {
    /// Retained states, one per post-burn-in iteration.
    pub samples: Vec<Vec<f64>>,
    pub log_target_trace: Vec<f64>,
    /// Accepted fraction of the retained coordinate proposals.
    pub acceptance_rate: f64,
    pub final_scales: Vec<f64>,
}

const LOG_SCALE_BOUNDS: (f64, f64) = (-12.0, 4.0);

/// Run the sampler on an unnormalized log target. The closure may return
/// `-inf` to reject a point outright.
pub fn run_componentwise<F, R>(init: &[f64], mut log_target: F, cfg: &MhConfig, rng: &mut R) -> Result<MhOutput>
where
    F: FnMut(&[f64]) -> f64,
    R: Rng + ?Sized,
{
    cfg.validate()?;
    let dim = init.len();
    if dim == 0 {
        return Err(Error::shape("MH state must have at least one coordinate"));
    }
    let mut x = init.to_vec();
    let mut current = log_target(&x);
    if !current.is_finite() {
        return Err(Error::Initialization(format!(
            "log posterior is {current} at the initial point {init:?}"
        )));
    }

    let burn = cfg.burn_in();
    let mut log_scale = vec![cfg.initial_scale.ln(); dim];
    let mut samples = Vec::with_capacity(cfg.iterations - burn);
    let mut trace = Vec::with_capacity(cfg.iterations - burn);
    let (mut accepted, mut proposed) = (0u64, 0u64);

    for it in 0..cfg.iterations {
        let adapting = cfg.adapt && it < burn;
        let gain = ((it + 1) as f64).powf(-0.6);
        for j in 0..dim {
            let old = x[j];
            let step: f64 = rng.sample(StandardNormal);
            x[j] = old + log_scale[j].exp() * step;
            let cand = log_target(&x);
            let log_alpha = cand - current;
            let accept = cand.is_finite() && (log_alpha >= 0.0 || rng.random::<f64>().ln() < log_alpha);
            if accept {
                current = cand;
            } else {
                x[j] = old;
            }
            if adapting {
                let a = if cand.is_finite() { log_alpha.min(0.0).exp() } else { 0.0 };
                log_scale[j] = (log_scale[j] + gain * (a - cfg.target_acceptance))
                    .clamp(LOG_SCALE_BOUNDS.0, LOG_SCALE_BOUNDS.1);
            }
            if it >= burn {
                proposed += 1;
                accepted += u64::from(accept);
            }
        }
        if it >= burn {
            samples.push(x.clone());
            trace.push(current);
        }
    }
    Ok(MhOutput {
        samples,
        log_target_trace: trace,
        acceptance_rate: accepted as f64 / proposed.max(1) as f64,
        final_scales: log_scale.iter().map(|s| s.exp()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn gaussian_target_moments() {
        let cfg = MhConfig { iterations: 60_000, burn_in_fraction: 0.2, ..Default::default() };
        let mut rng = stream(11, 0);
        let out = run_componentwise(&[0.0, 0.0], |v| -0.5 * ((v[0] - 1.0).powi(2) + v[1].powi(2) / 4.0), &cfg, &mut rng)
            .unwrap();
        let n = out.samples.len() as f64;
        let m0 = out.samples.iter().map(|s| s[0]).sum::<f64>() / n;
        let v1 = out.samples.iter().map(|s| s[1] * s[1]).sum::<f64>() / n;
        assert!((m0 - 1.0).abs() < 0.05, "{m0}");
        assert!((v1 - 4.0).abs() < 0.4, "{v1}");
        assert!((out.acceptance_rate - 0.44).abs() < 0.08, "{}", out.acceptance_rate);
    }

    #[test]
    fn infinite_start_is_an_initialization_error() {
        let mut rng = stream(1, 0);
        let r = run_componentwise(&[0.0], |_| f64::NEG_INFINITY, &MhConfig::default(), &mut rng);
        assert!(matches!(r, Err(Error::Initialization(_))));
    }

    #[test]
    fn burn_in_bounds() {
        let cfg = MhConfig { iterations: 8, burn_in_fraction: 0.75, ..Default::default() };
        assert_eq!(cfg.burn_in(), 6);
        assert!(MhConfig { burn_in_fraction: 1.0, ..Default::default() }.validate().is_err());
    }
}
