//! Gaussian copula graphical models for multivariate counts with discrete
//! Weibull marginals and birth-death MCMC structure learning.

pub mod bdmcmc;
pub mod data;
pub mod error;
pub mod graph;
pub mod io;
pub mod latent;
pub mod marginals;
pub mod rng;
pub mod sim;
pub mod special;

pub use data::CountDataset;
pub use error::{Error, Result};
