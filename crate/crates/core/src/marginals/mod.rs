//! Count marginals: discrete Weibull (plain and zero-inflated), covariate
//! regression, MH fitting and model comparison.

pub mod dw;
pub mod fit;
pub mod hpd;
pub mod mh;
pub mod model;
pub mod nb;
pub mod regression;

pub use dw::{continuous_weibull_cdf, dw_cdf, dw_pmf, dw_quantile, zidw_pmf, CountDistribution, DwParams, ZeroInflated};
pub use fit::{fit_marginal_mh, fit_nb_mh, DwFitOptions, MarginalPosterior};
pub use hpd::hpd_interval;
pub use mh::MhConfig;
pub use nb::{NbCoefficients, NbParams};
pub use regression::{bic, link_params, marginal_log_likelihood, DesignMatrix, DwCoefficients};
pub use model::{fit_column, fit_columns, ColumnFit, ColumnMarginal, FitSettings, FitSummary, MarginalChoice};
