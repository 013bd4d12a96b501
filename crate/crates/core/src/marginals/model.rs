//! Frozen per-column marginals handed to the structure learner.

use super::dw::CountDistribution;
use super::fit::{fit_marginal_mh, fit_nb_mh, DwFitOptions};
use super::mh::MhConfig;
use super::nb::nb_log_likelihood;
use super::regression::{bic, bic_from_log_likelihood, row_distribution, DesignMatrix, DwCoefficients};
use crate::data::CountDataset;
use crate::error::Result;
use crate::rng::{split_seed, stream};
use rayon::prelude::*;
use crate::latent::interval::{latent_interval, EmpiricalCdf, LatentInterval};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ColumnMarginal {
    /// DW or zero-inflated DW regression at fixed coefficients.
    Dw { coefficients: DwCoefficients },
    /// Rank-based intervals that ignore covariates.
    Empirical,
}

impl ColumnMarginal {
    /// Latent interval for every row of one column.
    pub fn intervals(&self, y: &[u64], x: &DesignMatrix) -> Result<Vec<LatentInterval>> {
        match self {
            ColumnMarginal::Dw { coefficients } => y
                .iter()
                .enumerate()
                .map(|(i, &yi)| latent_interval(yi, &row_distribution(x.row(i), coefficients)?))
                .collect(),
            ColumnMarginal::Empirical => {
                let e = EmpiricalCdf::new(y);
                y.iter().map(|&yi| latent_interval(yi, &e as &dyn CountDistribution)).collect()
            }
        }
    }
}

/// Which marginal family each column gets.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarginalChoice {
    #[default]
    Dw,
    Zidw,
    /// Fit both DW and ZIDW and keep the lower BIC.
    AutoBic,
    Empirical,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitSettings {
    pub choice: MarginalChoice,
    pub constant_beta: bool,
    /// Also fit an NB regression and report its BIC.
    pub compare_nb: bool,
    pub mh: MhConfig,
    pub hpd_level: f64,
}

impl Default for FitSettings {
    fn default() -> Self {
        Self { choice: MarginalChoice::Dw, constant_beta: false, compare_nb: true, mh: MhConfig::default(), hpd_level: 0.9 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub mean: DwCoefficients,
    /// HPD bounds in flattened coefficient order (theta, gamma, pi).
    pub hpd: Vec<(f64, f64)>,
    pub acceptance_rate: f64,
    pub bic: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnFit {
    pub marginal: ColumnMarginal,
    pub dw: Option<FitSummary>,
    pub zidw: Option<FitSummary>,
    pub nb_bic: Option<f64>,
}

impl ColumnFit {
    pub fn selected_label(&self) -> &'static str {
        match &self.marginal {
            ColumnMarginal::Empirical => "empirical",
            ColumnMarginal::Dw { coefficients } if coefficients.pi.is_some() => "zidw",
            ColumnMarginal::Dw { .. } => "dw",
        }
    }
}

fn summarize<R: rand::Rng + ?Sized>(
    y: &[u64],
    x: &DesignMatrix,
    settings: &FitSettings,
    zero_inflated: bool,
    rng: &mut R,
) -> Result<FitSummary> {
    let opts = DwFitOptions { constant_beta: settings.constant_beta, zero_inflated };
    let post = fit_marginal_mh(y, x, &settings.mh, opts, rng)?;
    let mean = post.posterior_mean();
    Ok(FitSummary {
        bic: bic(y, x, &mean)?,
        hpd: post.hpd(settings.hpd_level)?,
        acceptance_rate: post.acceptance_rate,
        mean,
    })
}

/// Fit one column according to `settings`.
pub fn fit_column(y: &[u64], x: &DesignMatrix, settings: &FitSettings, seed: u64) -> Result<ColumnFit> {
    let mut rng = stream(seed, 0);
    let mut fit = ColumnFit { marginal: ColumnMarginal::Empirical, dw: None, zidw: None, nb_bic: None };
    match settings.choice {
        MarginalChoice::Empirical => {}
        MarginalChoice::Dw => fit.dw = Some(summarize(y, x, settings, false, &mut rng)?),
        MarginalChoice::Zidw => fit.zidw = Some(summarize(y, x, settings, true, &mut rng)?),
        MarginalChoice::AutoBic => {
            fit.dw = Some(summarize(y, x, settings, false, &mut rng)?);
            fit.zidw = Some(summarize(y, x, settings, true, &mut rng)?);
        }
    }
    let chosen = match (&fit.dw, &fit.zidw) {
        (Some(a), Some(b)) => Some(if b.bic < a.bic { b } else { a }),
        (Some(a), None) => Some(a),
        (None, Some(b)) => Some(b),
        (None, None) => None,
    };
    if let Some(c) = chosen {
        fit.marginal = ColumnMarginal::Dw { coefficients: c.mean.clone() };
    }
    if settings.compare_nb {
        let post = fit_nb_mh(y, x, &settings.mh, false, &mut rng)?;
        let mean = post.posterior_mean();
        fit.nb_bic = Some(bic_from_log_likelihood(nb_log_likelihood(y, x, &mean)?, mean.free_parameters(), y.len()));
    }
    Ok(fit)
}

/// Fit every column in parallel; column `j` uses seed `split_seed(seed, j)`.
pub fn fit_columns(ds: &CountDataset, x: &DesignMatrix, settings: &FitSettings, seed: u64) -> Result<Vec<ColumnFit>> {
    (0..ds.ncols())
        .into_par_iter()
        .map(|j| fit_column(ds.column(j), x, settings, split_seed(seed, j as u64)))
        .collect()
}
