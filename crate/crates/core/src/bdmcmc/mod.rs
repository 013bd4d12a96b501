//! Continuous-time birth-death MCMC over graphs and precision matrices.

pub mod accumulator;
pub mod chain;
pub mod rates;

pub use accumulator::{edge_probabilities, PosteriorAccumulator};
pub use chain::{run_chain, Chain, ChainConfig, ChainOutput, ChainState, DataTerm};
pub use rates::{compute_rates, select_jump, waiting_time, RateContext, RateTable};
