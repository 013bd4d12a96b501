//! Holding-time weighted averages over visited graphs.

use crate::error::{Error, Result};
use crate::graph::{pairs, Graph};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// One stored `(G, K)` with its weight.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StoredSample {
    pub edges: Vec<(usize, usize)>,
    pub k: DMatrix<f64>,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PosteriorAccumulator {
    pub p: usize,
    /// Per-pair weight of visits that contained the edge, `pairs(p)` order.
    pub edge_weight: Vec<f64>,
    pub total_weight: f64,
    /// Weighted partial-correlation sums at thinned visits.
    pub pcor_sum: Vec<f64>,
    pub pcor_weight: f64,
    pub samples: Vec<StoredSample>,
}

impl PosteriorAccumulator {
    pub fn new(p: usize) -> Self {
        let m = crate::graph::pair_count(p);
        Self {
            p,
            edge_weight: vec![0.0; m],
            total_weight: 0.0,
            pcor_sum: vec![0.0; m],
            pcor_weight: 0.0,
            samples: Vec::new(),
        }
    }

    pub fn record(&mut self, g: &Graph, weight: f64) {
        for (idx, (i, j)) in pairs(self.p).into_iter().enumerate() {
            if g.has_edge(i, j) {
                self.edge_weight[idx] += weight;
            }
        }
        self.total_weight += weight;
    }

    pub fn record_partial_correlations(&mut self, k: &DMatrix<f64>, weight: f64) {
        for (idx, (i, j)) in pairs(self.p).into_iter().enumerate() {
            self.pcor_sum[idx] += weight * -k[(i, j)] / (k[(i, i)] * k[(j, j)]).sqrt();
        }
        self.pcor_weight += weight;
    }

    /// Sum of several chains' accumulators.
    pub fn merge(parts: &[PosteriorAccumulator]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| Error::input("nothing to merge"))?;
        let mut acc = Self::new(first.p);
        for a in parts {
            if a.p != acc.p {
                return Err(Error::shape("accumulators over different node counts"));
            }
            for (x, y) in acc.edge_weight.iter_mut().zip(&a.edge_weight) {
                *x += y;
            }
            for (x, y) in acc.pcor_sum.iter_mut().zip(&a.pcor_sum) {
                *x += y;
            }
            acc.total_weight += a.total_weight;
            acc.pcor_weight += a.pcor_weight;
            acc.samples.extend(a.samples.iter().cloned());
        }
        Ok(acc)
    }

    fn symmetric(&self, values: impl Fn(usize) -> f64, diag: f64) -> DMatrix<f64> {
        let mut m = DMatrix::from_element(self.p, self.p, 0.0);
        for (idx, (i, j)) in pairs(self.p).into_iter().enumerate() {
            let v = values(idx);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
        for i in 0..self.p {
            m[(i, i)] = diag;
        }
        m
    }

    /// Waiting-time weighted average of partial correlations.
    pub fn partial_correlations(&self) -> Result<DMatrix<f64>> {
        if !(self.pcor_weight > 0.0) {
            return Err(Error::input("no partial-correlation samples were recorded"));
        }
        Ok(self.symmetric(|idx| self.pcor_sum[idx] / self.pcor_weight, 1.0))
    }
}

/// `P(e) = sum_t 1(e in G_t) W_t / sum_t W_t` as a symmetric matrix with zero
/// diagonal.
pub fn edge_probabilities(acc: &PosteriorAccumulator) -> Result<DMatrix<f64>> {
    if !(acc.total_weight > 0.0) {
        return Err(Error::input("accumulator holds no post-burn-in weight"));
    }
    Ok(acc.symmetric(|idx| (acc.edge_weight[idx] / acc.total_weight).clamp(0.0, 1.0), 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weighted_average() {
        let mut acc = PosteriorAccumulator::new(3);
        let g1 = Graph::from_edges(3, &[(0, 2)]).unwrap();
        acc.record(&g1, 1.0);
        acc.record(&Graph::empty(3), 3.0);
        let m = edge_probabilities(&acc).unwrap();
        assert_eq!(m[(0, 2)], 0.25);
        assert_eq!(m[(2, 0)], 0.25);
        assert_eq!(m[(0, 1)], 0.0);
        assert!(edge_probabilities(&PosteriorAccumulator::new(3)).is_err());
    }
}
