//! The chain driver. Each iteration is one refresh epoch:
//!
//! 1. Gibbs sweep(s) over the latent columns,
//! 2. continuous-time birth-death jumps on `(G, K)` until a refresh event,
//! 3. a fresh `K ~ W_G(b + n, D + U)` given the current graph.
//!
//! Refresh events arrive at rate `refresh_rate`, so every holding period
//! carries weight `1 / (total rate + refresh_rate)`.

use super::accumulator::{PosteriorAccumulator, StoredSample};
use super::rates::{compute_rates, select_jump_index, RateContext};
use crate::error::{Error, Result};
use crate::graph::moves::{set_entry, update_inverse};
use crate::graph::wishart::spd_inverse;
use crate::graph::{gwishart_sample, pairs, GWishartParams, Graph, NormConstMode, NormalizingConstants};
use crate::latent::{gibbs_sweep, IntervalTable, LatentMatrix};
use crate::rng::{stream, EngineRng};
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChainConfig {
    pub iterations: usize,
    pub burn_in_fraction: f64,
    pub sweeps_per_iteration: usize,
    /// Rate of the Poisson clock that ends a birth-death segment.
    pub refresh_rate: f64,
    pub link_prob: f64,
    pub b: f64,
    /// `D = d_scale * I`.
    pub d_scale: f64,
    pub norm_const: NormConstMode,
    /// Jumps between partial-correlation records.
    pub thin: usize,
    pub store_samples: bool,
    pub initial_edges: Vec<(usize, usize)>,
    pub parallel_min_pairs: usize,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            iterations: 10_000,
            burn_in_fraction: 0.5,
            sweeps_per_iteration: 1,
            refresh_rate: 10.0,
            link_prob: 0.5,
            b: 3.0,
            d_scale: 1.0,
            norm_const: NormConstMode::Approximate,
            thin: 100,
            store_samples: false,
            initial_edges: Vec::new(),
            parallel_min_pairs: 1_000,
        }
    }
}

impl ChainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.iterations == 0 {
            return bad("chain iterations must be positive".into());
        }
        if !(0.0..1.0).contains(&self.burn_in_fraction) {
            return bad(format!("burn-in fraction must lie in [0,1), got {}", self.burn_in_fraction));
        }
        if self.iterations <= self.burn_in() {
            return bad("no iterations remain after burn-in".into());
        }
        if !(self.refresh_rate > 0.0 && self.refresh_rate.is_finite()) {
            return bad(format!("refresh rate must be positive, got {}", self.refresh_rate));
        }
        if !(self.link_prob > 0.0 && self.link_prob < 1.0) {
            return bad(format!("link probability must lie in (0,1), got {}", self.link_prob));
        }
        if !(self.b > 2.0) || !(self.d_scale > 0.0) {
            return bad("G-Wishart prior needs b > 2 and a positive scale".into());
        }
        if self.thin == 0 {
            return bad("thinning interval must be positive".into());
        }
        Ok(())
    }

    pub fn burn_in(&self) -> usize {
        (self.iterations as f64 * self.burn_in_fraction).floor() as usize
    }

    pub fn prior(&self, p: usize) -> GWishartParams {
        GWishartParams { b: self.b, d: DMatrix::identity(p, p) * self.d_scale }
    }
}

/// What drives the data term of the chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum DataTerm {
    /// Latent data resampled inside these intervals every iteration.
    Latent(IntervalTable),
    /// Latent data held fixed (Gaussian observations).
    Fixed(LatentMatrix),
    /// No data; the chain targets the prior over `(G, K)`.
    PriorOnly { p: usize },
}

impl DataTerm {
    pub fn nodes(&self) -> usize {
        match self {
            DataTerm::Latent(t) => t.ncols(),
            DataTerm::Fixed(z) => z.ncols(),
            DataTerm::PriorOnly { p } => *p,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainState {
    pub graph: Graph,
    pub k: DMatrix<f64>,
    pub z: Option<LatentMatrix>,
    pub iteration: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Chain {
    version: u32,
    pub config: ChainConfig,
    data: DataTerm,
    pub state: ChainState,
    sigma: DMatrix<f64>,
    pub accumulator: PosteriorAccumulator,
    consts: NormalizingConstants,
    rng: EngineRng,
    /// Edge count after each iteration's jump segment.
    pub graph_size_trace: Vec<u32>,
    pub jumps: u64,
    since_record: usize,
}

#[derive(Clone, Debug)]
pub struct ChainOutput {
    pub accumulator: PosteriorAccumulator,
    pub final_state: ChainState,
    pub graph_size_trace: Vec<u32>,
    pub jumps: u64,
}

impl Chain {
    pub fn new(config: ChainConfig, data: DataTerm, seed: u64, chain_index: u64) -> Result<Self> {
        config.validate()?;
        let p = data.nodes();
        if p < 2 {
            return Err(Error::input("structure learning needs at least two columns"));
        }
        let mut rng = stream(seed, chain_index);
        let graph = Graph::from_edges(p, &config.initial_edges)?;
        let prior = config.prior(p);
        let consts = NormalizingConstants::build(config.norm_const, &prior, &mut rng)?;
        let z = match &data {
            DataTerm::Latent(t) => Some(LatentMatrix::initialize(t, &mut rng)?),
            DataTerm::Fixed(z) => Some(z.clone()),
            DataTerm::PriorOnly { .. } => None,
        };
        let post = match &z {
            Some(z) => prior.posterior(z.nrows(), &z.gram()),
            None => prior.clone(),
        };
        let k = gwishart_sample(&graph, &post, &mut rng)?;
        let sigma = spd_inverse(&k, "initial precision")?;
        Ok(Self {
            version: CHECKPOINT_VERSION,
            data,
            state: ChainState { graph, k, z, iteration: 0 },
            sigma,
            accumulator: PosteriorAccumulator::new(p),
            consts,
            rng,
            graph_size_trace: Vec::with_capacity(config.iterations),
            jumps: 0,
            since_record: 0,
            config,
        })
    }

    pub fn is_finished(&self) -> bool {
        self.state.iteration >= self.config.iterations
    }

    /// One refresh epoch.
    pub fn step(&mut self) -> Result<()> {
        let p = self.state.graph.nodes();
        let prior = self.config.prior(p);

        if let (DataTerm::Latent(table), Some(z)) = (&self.data, self.state.z.as_mut()) {
            for _ in 0..self.config.sweeps_per_iteration {
                gibbs_sweep(z, &self.state.k, table, &mut self.rng)?;
            }
        }
        let post = match &self.state.z {
            Some(z) => prior.posterior(z.nrows(), &z.gram()),
            None => prior,
        };

        let recording = self.state.iteration >= self.config.burn_in();
        let kappa = self.config.refresh_rate;
        loop {
            let ctx = RateContext {
                d_star: &post.d,
                consts: &self.consts,
                link_prob: self.config.link_prob,
                parallel_min_pairs: self.config.parallel_min_pairs,
            };
            let table = compute_rates(&self.state.graph, &self.state.k, &self.sigma, &ctx);
            let total = table.total();
            let weight = 1.0 / (total + kappa);
            if recording {
                self.accumulator.record(&self.state.graph, weight);
                if self.since_record == 0 {
                    self.accumulator.record_partial_correlations(&self.state.k, weight);
                    if self.config.store_samples {
                        self.accumulator.samples.push(StoredSample {
                            edges: self.state.graph.edges(),
                            k: self.state.k.clone(),
                            weight,
                        });
                    }
                    self.since_record = self.config.thin;
                }
            }
            if self.rng.random::<f64>() * (total + kappa) >= total {
                break;
            }
            let idx = select_jump_index(&table, &mut self.rng)?;
            let terms = table.terms[idx].expect("positive rate implies evaluated terms");
            let (i, j) = pairs(p)[idx];
            let value = if self.state.graph.has_edge(i, j) {
                0.0
            } else {
                let u: f64 = self.rng.sample(StandardNormal);
                terms.mean + u / terms.tau.sqrt()
            };
            let up = set_entry(&mut self.state.k, &terms, value);
            update_inverse(&mut self.sigma, &up);
            self.state.graph.toggle(i, j);
            self.jumps += 1;
            self.since_record = self.since_record.saturating_sub(1);
        }
        self.graph_size_trace.push(self.state.graph.edge_count() as u32);

        self.state.k = gwishart_sample(&self.state.graph, &post, &mut self.rng)?;
        self.sigma = spd_inverse(&self.state.k, "refreshed precision")?;
        self.state.iteration += 1;
        Ok(())
    }

    /// Run to completion. On failure the chain is written to `checkpoint`
    /// (when given) so it can be resumed.
    pub fn run(&mut self, checkpoint: Option<&Path>) -> Result<()> {
        while !self.is_finished() {
            if let Err(e) = self.step() {
                if let Some(path) = checkpoint {
                    self.save_checkpoint(path)?;
                }
                return Err(e);
            }
        }
        Ok(())
    }

    pub fn output(&self) -> ChainOutput {
        ChainOutput {
            accumulator: self.accumulator.clone(),
            final_state: self.state.clone(),
            graph_size_trace: self.graph_size_trace.clone(),
            jumps: self.jumps,
        }
    }

    pub fn save_checkpoint(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_vec(self)?)?;
        Ok(())
    }

    pub fn load_checkpoint(path: &Path) -> Result<Self> {
        let chain: Chain = serde_json::from_slice(&std::fs::read(path)?)?;
        if chain.version != CHECKPOINT_VERSION {
            return Err(Error::Config(format!(
                "checkpoint version {} is not supported (expected {CHECKPOINT_VERSION})",
                chain.version
            )));
        }
        Ok(chain)
    }
}

/// Build, run and summarize one chain.
pub fn run_chain(config: &ChainConfig, data: DataTerm, seed: u64, chain_index: u64) -> Result<ChainOutput> {
    let mut chain = Chain::new(config.clone(), data, seed, chain_index)?;
    chain.run(None)?;
    Ok(chain.output())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bdmcmc::edge_probabilities;

    #[test]
    fn vacuous_run_is_rejected() {
        let cfg = ChainConfig { iterations: 0, ..Default::default() };
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        let cfg = ChainConfig { iterations: 3, burn_in_fraction: 0.9, ..Default::default() };
        assert_eq!(cfg.burn_in(), 2);
    }

    #[test]
    fn checkpoint_resume_matches_straight_run() {
        let cfg = ChainConfig { iterations: 400, link_prob: 0.3, ..Default::default() };
        let straight = run_chain(&cfg, DataTerm::PriorOnly { p: 4 }, 5, 0).unwrap();

        let mut chain = Chain::new(cfg, DataTerm::PriorOnly { p: 4 }, 5, 0).unwrap();
        for _ in 0..150 {
            chain.step().unwrap();
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        chain.save_checkpoint(&path).unwrap();
        let mut resumed = Chain::load_checkpoint(&path).unwrap();
        resumed.run(None).unwrap();
        let a = edge_probabilities(&straight.accumulator).unwrap();
        let b = edge_probabilities(&resumed.output().accumulator).unwrap();
        assert_eq!(a, b);
    }
}
