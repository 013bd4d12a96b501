//! Graphs, the Erdős–Rényi prior, G-Wishart sampling and the one-edge moves
//! used by the birth-death sampler.

pub mod moves;
pub mod normconst;
pub mod structure;
pub mod wishart;

pub use moves::{edge_terms, log_posterior_ratio_for_edge, EdgeTerms};
pub use normconst::{NormConstMode, NormalizingConstants};
pub use structure::{erdos_renyi_log_prior, pair_count, pair_index, pairs, Graph};
pub use wishart::{gwishart_sample, partial_correlations, standardize_to_inv_correlation, wishart_sample, GWishartParams};
