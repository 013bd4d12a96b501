//! G-Wishart normalizing constants `I_G(b, D)` and their one-edge ratios.

use super::structure::{pair_count, Graph};
use super::wishart::{spd_inverse, GWishartParams};
use crate::error::{Error, Result};
use crate::special::ln_gamma;
use nalgebra::Cholesky;
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::{LN_2, PI};

/// Largest node count for which every graph's constant is tabulated.
pub const TABLE_MAX_NODES: usize = 4;

/// How the prior normalizing-constant ratio in the edge rates is obtained.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NormConstMode {
    /// Closed-form one-edge ratio depending only on `b`.
    Approximate,
    /// Monte Carlo estimate of every graph's constant (small `p` only).
    Exact { samples: usize },
}

impl Default for NormConstMode {
    fn default() -> Self {
        NormConstMode::Approximate
    }
}

/// `ln I_{G+e} - ln I_G` for a single added edge, ignoring shared
/// neighbours: `ln(2 sqrt(pi)) + lnGamma((b+1)/2) - lnGamma(b/2)`.
pub fn approximate_log_ratio(b: f64) -> f64 {
    LN_2 + 0.5 * PI.ln() + ln_gamma(0.5 * (b + 1.0)) - ln_gamma(0.5 * b)
}

/// Monte Carlo estimate of `ln I_G(b, D)` by the triangular-completion
/// representation: a closed-form product over nodes times the expectation
/// of `exp(-sum psi_ij^2 / 2)` over the non-free entries.
pub fn log_normalizing_constant_mc<R: Rng + ?Sized>(
    g: &Graph,
    params: &GWishartParams,
    samples: usize,
    rng: &mut R,
) -> Result<f64> {
    let p = g.nodes();
    if p != params.dim() {
        return Err(Error::shape("graph and scale dimensions differ"));
    }
    if samples == 0 {
        return Err(Error::input("need at least one Monte Carlo sample"));
    }
    let b = params.b;
    let dinv = spd_inverse(&params.d, "G-Wishart scale matrix")?;
    let t = Cholesky::new(dinv).ok_or_else(|| Error::NotPositiveDefinite("inverse scale".into()))?.l().transpose();

    let later: Vec<usize> = (0..p).map(|i| (i + 1..p).filter(|&j| g.has_edge(i, j)).count()).collect();
    let mut log_const = 0.5 * g.edge_count() as f64 * (2.0 * PI).ln();
    for i in 0..p {
        let a = 0.5 * (b + later[i] as f64);
        log_const += a * LN_2 + ln_gamma(a) + (b + g.degree(i) as f64) * t[(i, i)].ln();
    }
    if g.edge_count() == pair_count(p) {
        return Ok(log_const);
    }

    let chis: Vec<ChiSquared<f64>> = later
        .iter()
        .map(|&v| ChiSquared::new(b + v as f64).map_err(|e| Error::numeric(e.to_string())))
        .collect::<Result<_>>()?;
    let mut psi = vec![0.0; p * p];
    let mut phi = vec![0.0; p * p];
    let mut logs = Vec::with_capacity(samples);
    for _ in 0..samples {
        let mut acc = 0.0;
        for i in 0..p {
            psi[i * p + i] = chis[i].sample(rng).sqrt();
            phi[i * p + i] = psi[i * p + i] * t[(i, i)];
            for j in i + 1..p {
                let partial: f64 = (i..j).map(|l| psi[i * p + l] * t[(l, j)]).sum();
                if g.has_edge(i, j) {
                    let v: f64 = rng.sample(StandardNormal);
                    psi[i * p + j] = v;
                    phi[i * p + j] = v * t[(j, j)] + partial;
                } else {
                    let f = -(0..i).map(|r| phi[r * p + i] * phi[r * p + j]).sum::<f64>() / phi[i * p + i];
                    phi[i * p + j] = f;
                    let v = (f - partial) / t[(j, j)];
                    psi[i * p + j] = v;
                    acc += v * v;
                }
            }
        }
        logs.push(-0.5 * acc);
    }
    let m = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mean = logs.iter().map(|l| (l - m).exp()).sum::<f64>() / samples as f64;
    Ok(log_const + m + mean.ln())
}

/// Source of `ln I_{G+e}(b, D) - ln I_{G-e}(b, D)` for the prior part of
/// the edge rates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum NormalizingConstants {
    Approximate { b: f64 },
    Table { p: usize, log_constants: Vec<f64> },
}

impl NormalizingConstants {
    pub fn build<R: Rng + ?Sized>(mode: NormConstMode, params: &GWishartParams, rng: &mut R) -> Result<Self> {
        match mode {
            NormConstMode::Approximate => Ok(Self::Approximate { b: params.b }),
            NormConstMode::Exact { samples } => {
                let p = params.dim();
                if p > TABLE_MAX_NODES {
                    return Err(Error::Config(format!(
                        "exact normalizing constants are limited to {TABLE_MAX_NODES} nodes, got {p}"
                    )));
                }
                let log_constants = (0..1u64 << pair_count(p))
                    .map(|mask| log_normalizing_constant_mc(&Graph::from_mask(p, mask), params, samples, rng))
                    .collect::<Result<_>>()?;
                Ok(Self::Table { p, log_constants })
            }
        }
    }

    /// `ln I` of the graph with edge `(i, j)` present minus absent.
    pub fn log_ratio(&self, g: &Graph, i: usize, j: usize) -> f64 {
        match self {
            Self::Approximate { b } => approximate_log_ratio(*b),
            Self::Table { log_constants, .. } => {
                let mut with = g.clone();
                with.set_edge(i, j, true);
                let mut without = g.clone();
                without.set_edge(i, j, false);
                log_constants[with.mask() as usize] - log_constants[without.mask() as usize]
            }
        }
    }
}
