//! Birth-death rates, waiting times and jump selection.

use crate::error::{Error, Result};
use crate::graph::moves::{edge_terms, EdgeTerms};
use crate::graph::{pairs, Graph, NormalizingConstants};
use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;

/// Rate of toggling every pair, in `pairs(p)` order.
#[derive(Clone, Debug, PartialEq)]
pub struct RateTable {
    pub p: usize,
    pub rates: Vec<f64>,
    pub(crate) terms: Vec<Option<EdgeTerms>>,
}

impl RateTable {
    pub fn from_rates(p: usize, rates: Vec<f64>) -> Result<Self> {
        if rates.len() != crate::graph::pair_count(p) {
            return Err(Error::shape("rate table does not cover every pair"));
        }
        if rates.iter().any(|r| !(*r >= 0.0 && r.is_finite())) {
            return Err(Error::input("rates must be finite and nonnegative"));
        }
        let terms = vec![None; rates.len()];
        Ok(Self { p, rates, terms })
    }

    pub fn total(&self) -> f64 {
        self.rates.iter().sum()
    }
}

/// Inputs that stay fixed while the graph moves within one refresh epoch.
pub struct RateContext<'a> {
    pub d_star: &'a DMatrix<f64>,
    pub consts: &'a NormalizingConstants,
    pub link_prob: f64,
    /// Use the thread pool once the pair count reaches this.
    pub parallel_min_pairs: usize,
}

/// Rate `min(1, ratio)` for each pair; birth ratio for absent pairs, its
/// inverse for present ones. A pair whose terms fail numerically gets rate 0.
pub fn compute_rates(g: &Graph, k: &DMatrix<f64>, sigma: &DMatrix<f64>, ctx: &RateContext<'_>) -> RateTable {
    let p = g.nodes();
    let all = pairs(p);
    let eval = |&(i, j): &(usize, usize)| match edge_terms(g, k, sigma, ctx.d_star, i, j, ctx.consts, ctx.link_prob) {
        Ok(t) => {
            let lr = if g.has_edge(i, j) { -t.log_birth } else { t.log_birth };
            (lr.min(0.0).exp(), Some(t))
        }
        Err(e) => {
            log::warn!("rate for pair ({i}, {j}) set to zero: {e}");
            (0.0, None)
        }
    };
    let out: Vec<(f64, Option<EdgeTerms>)> = if all.len() >= ctx.parallel_min_pairs {
        all.par_iter().map(eval).collect()
    } else {
        all.iter().map(eval).collect()
    };
    let (rates, terms) = out.into_iter().unzip();
    RateTable { p, rates, terms }
}

/// Mean holding time `1 / sum of rates`.
pub fn waiting_time(table: &RateTable) -> Result<f64> {
    let total = table.total();
    if !(total > 0.0) {
        return Err(Error::ChainStuck);
    }
    Ok(1.0 / total)
}

/// Index into `pairs(p)` drawn with probability proportional to its rate.
pub fn select_jump_index<R: Rng + ?Sized>(table: &RateTable, rng: &mut R) -> Result<usize> {
    let total = table.total();
    if !(total > 0.0) {
        return Err(Error::ChainStuck);
    }
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (idx, &r) in table.rates.iter().enumerate() {
        if r > 0.0 {
            acc += r;
            last = idx;
            if target < acc {
                return Ok(idx);
            }
        }
    }
    Ok(last)
}

pub fn select_jump<R: Rng + ?Sized>(table: &RateTable, rng: &mut R) -> Result<(usize, usize)> {
    let idx = select_jump_index(table, rng)?;
    Ok(pairs(table.p)[idx])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn waiting_time_arithmetic() {
        let t = RateTable::from_rates(3, vec![1.0; 3]).unwrap();
        assert!((waiting_time(&t).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let t = RateTable::from_rates(2, vec![0.5]).unwrap();
        assert_eq!(waiting_time(&t).unwrap(), 2.0);
        let t = RateTable::from_rates(3, vec![0.0; 3]).unwrap();
        assert!(matches!(waiting_time(&t), Err(Error::ChainStuck)));
    }

    #[test]
    fn selection_frequencies() {
        let t = RateTable::from_rates(3, vec![3.0, 0.0, 1.0]).unwrap();
        let mut rng = stream(4, 0);
        let n = 100_000;
        let mut c = [0usize; 3];
        for _ in 0..n {
            c[select_jump_index(&t, &mut rng).unwrap()] += 1;
        }
        assert_eq!(c[1], 0);
        assert!((c[0] as f64 / n as f64 - 0.75).abs() < 0.01);
    }
}
