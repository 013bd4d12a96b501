//! Synthetic count data: random graph, G-Wishart precision, Gaussian draw
//! and inverse-cdf discretization through covariate-dependent marginals.

use crate::data::CountDataset;
use crate::error::{Error, Result};
use crate::graph::wishart::spd_inverse;
use crate::graph::{gwishart_sample, pairs, standardize_to_inv_correlation, GWishartParams, Graph};
use crate::latent::{count_from_latent, LatentMatrix};
use crate::marginals::regression::row_distribution;
use crate::marginals::{CountDistribution, DwCoefficients, NbParams};
use nalgebra::{Cholesky, DMatrix};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum MarginalPreset {
    /// `logit q = theta0 + theta1 x`, constant `log beta = gamma0`.
    Dw { theta0: f64, theta1: f64, gamma0: f64 },
    /// `log mu = theta0 + theta1 x`, variance `mu + phi mu^2`.
    Nb { theta0: f64, theta1: f64, phi: f64 },
}

impl MarginalPreset {
    /// The three simulation settings: under-dispersed DW, over-dispersed DW
    /// and NB.
    pub fn setting(id: u8, theta1: f64) -> Result<Self> {
        match id {
            1 => Ok(Self::Dw { theta0: 1.734, theta1, gamma0: 2.5f64.ln() }),
            2 => Ok(Self::Dw { theta0: 0.0, theta1, gamma0: 0.7f64.ln() }),
            3 => Ok(Self::Nb { theta0: 2f64.ln(), theta1, phi: 0.5 }),
            _ => Err(Error::Config(format!("unknown simulation setting {id}"))),
        }
    }

    pub fn theta1(&self) -> f64 {
        match *self {
            Self::Dw { theta1, .. } | Self::Nb { theta1, .. } => theta1,
        }
    }

    /// Cell distribution for covariate value `x`.
    pub fn distribution(&self, x: f64) -> Result<Box<dyn CountDistribution + Send + Sync>> {
        match *self {
            Self::Dw { theta0, theta1, gamma0 } => {
                let coef = DwCoefficients::new(vec![theta0, theta1], vec![gamma0, 0.0], None)?;
                Ok(Box::new(row_distribution(&[1.0, x], &coef)?))
            }
            Self::Nb { theta0, theta1, phi } => Ok(Box::new(NbParams::new((theta0 + theta1 * x).exp(), phi)?)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationSpec {
    pub p: usize,
    pub n: usize,
    pub sparsity: f64,
    pub marginal: MarginalPreset,
    /// Probability that the binary covariate equals one.
    pub covariate_prob: f64,
    pub seed: u64,
}

impl SimulationSpec {
    pub fn validate(&self) -> Result<()> {
        if self.p < 2 || self.n < 2 {
            return Err(Error::Config("simulation needs p >= 2 and n >= 2".into()));
        }
        if !(0.0..=1.0).contains(&self.sparsity) || !(0.0..=1.0).contains(&self.covariate_prob) {
            return Err(Error::Config("sparsity and covariate probability must lie in [0,1]".into()));
        }
        self.marginal.distribution(0.0)?;
        self.marginal.distribution(1.0)?;
        Ok(())
    }
}

/// Each pair included independently with probability `sparsity`.
pub fn sample_random_graph<R: Rng + ?Sized>(p: usize, sparsity: f64, rng: &mut R) -> Result<Graph> {
    if !(0.0..=1.0).contains(&sparsity) {
        return Err(Error::domain(format!("sparsity must lie in [0,1], got {sparsity}")));
    }
    let mut g = Graph::empty(p);
    for (i, j) in pairs(p) {
        if rng.random::<f64>() < sparsity {
            g.set_edge(i, j, true);
        }
    }
    Ok(g)
}

#[derive(Clone, Debug)]
pub struct GeneratedData {
    pub dataset: CountDataset,
    pub graph: Graph,
    /// Standardized precision of the latent Gaussian.
    pub k: DMatrix<f64>,
    pub z: LatentMatrix,
}

/// Rows `z_i ~ N(0, K^-1)`, a Bernoulli covariate, and counts `y_ij` equal to
/// the count whose latent interval contains `z_ij`.
pub fn generate_with_precision<R: Rng + ?Sized>(
    graph: Graph,
    k: DMatrix<f64>,
    spec: &SimulationSpec,
    rng: &mut R,
) -> Result<GeneratedData> {
    spec.validate()?;
    let (n, p) = (spec.n, spec.p);
    let sigma = spd_inverse(&k, "simulation precision")?;
    let l = Cholesky::new(sigma).ok_or_else(|| Error::NotPositiveDefinite("simulation covariance".into()))?.l();
    let mut z = vec![0.0; n * p];
    let mut eps = vec![0.0; p];
    for i in 0..n {
        eps.iter_mut().for_each(|e| *e = rng.sample(StandardNormal));
        for a in 0..p {
            z[a * n + i] = (0..=a).map(|b| l[(a, b)] * eps[b]).sum();
        }
    }
    let x: Vec<f64> = (0..n).map(|_| f64::from(u8::from(rng.random::<f64>() < spec.covariate_prob))).collect();
    let dists = [spec.marginal.distribution(0.0)?, spec.marginal.distribution(1.0)?];
    let counts: Vec<u64> = (0..n * p)
        .map(|c| {
            let i = c % n;
            count_from_latent(z[c], dists[x[i] as usize].as_ref())
        })
        .collect();
    let mut dataset = CountDataset::from_columns(n, p, counts)?;
    dataset.push_covariate("x", &x)?;
    Ok(GeneratedData { dataset, graph, k, z: LatentMatrix::from_columns(n, p, z)? })
}

/// `K ~ W_G(3, I)` on `graph`, standardized, then `generate_with_precision`.
pub fn generate_counts<R: Rng + ?Sized>(graph: Graph, spec: &SimulationSpec, rng: &mut R) -> Result<GeneratedData> {
    let k = gwishart_sample(&graph, &GWishartParams::default_prior(spec.p), rng)?;
    let k = standardize_to_inv_correlation(&k)?;
    generate_with_precision(graph, k, spec, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn graph_extremes() {
        let mut rng = stream(0, 0);
        assert_eq!(sample_random_graph(6, 0.0, &mut rng).unwrap().edge_count(), 0);
        assert_eq!(sample_random_graph(6, 1.0, &mut rng).unwrap().edge_count(), 15);
    }

    #[test]
    fn presets_match_settings() {
        match MarginalPreset::setting(1, 0.0).unwrap() {
            MarginalPreset::Dw { theta0, gamma0, .. } => {
                assert_eq!(theta0, 1.734);
                assert!((gamma0.exp() - 2.5).abs() < 1e-12);
            }
            _ => panic!(),
        }
        assert!(MarginalPreset::setting(4, 0.0).is_err());
    }
}
