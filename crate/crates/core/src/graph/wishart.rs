//! Wishart and G-Wishart draws. `W_G(b, D)` has density proportional to
//! `|K|^((b-2)/2) exp(-tr(DK)/2)` on precision matrices with zeros at the
//! non-edges of `G`.

use super::structure::Graph;
use crate::error::{Error, Result};
use nalgebra::{Cholesky, DMatrix, DVector};
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

/// Entries below this are treated as structural zeros.
pub const ZERO_TOL: f64 = 1e-8;
const COMPLETION_TOL: f64 = 1e-8;
const COMPLETION_MAX_SWEEPS: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GWishartParams {
    pub b: f64,
    pub d: DMatrix<f64>,
}

impl GWishartParams {
    pub fn new(b: f64, d: DMatrix<f64>) -> Result<Self> {
        if !(b > 2.0 && b.is_finite()) {
            return Err(Error::domain(format!("G-Wishart degrees of freedom must exceed 2, got {b}")));
        }
        if !d.is_square() || (&d - d.transpose()).amax() > 1e-10 * d.amax().max(1.0) {
            return Err(Error::domain("G-Wishart scale must be square and symmetric"));
        }
        if Cholesky::new(d.clone()).is_none() {
            return Err(Error::NotPositiveDefinite("G-Wishart scale matrix".into()));
        }
        Ok(Self { b, d })
    }

    /// `W_G(3, I_p)`.
    pub fn default_prior(p: usize) -> Self {
        Self { b: 3.0, d: DMatrix::identity(p, p) }
    }

    pub fn dim(&self) -> usize {
        self.d.nrows()
    }

    /// Conjugate update with `n` rows and sample moment `u = z'z`.
    pub fn posterior(&self, n: usize, u: &DMatrix<f64>) -> Self {
        Self { b: self.b + n as f64, d: &self.d + u }
    }
}

pub fn spd_inverse(m: &DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    let inv = Cholesky::new(m.clone())
        .ok_or_else(|| Error::NotPositiveDefinite(what.to_string()))?
        .inverse();
    Ok(symmetrize(inv))
}

fn symmetrize(mut m: DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    for i in 0..n {
        for j in i + 1..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// Unconstrained draw: Wishart with `b + p - 1` degrees of freedom and scale
/// `D^-1`, by the Bartlett decomposition.
pub fn wishart_sample<R: Rng + ?Sized>(params: &GWishartParams, rng: &mut R) -> Result<DMatrix<f64>> {
    let p = params.dim();
    let scale = spd_inverse(&params.d, "G-Wishart scale matrix")?;
    let l = Cholesky::new(scale).ok_or_else(|| Error::NotPositiveDefinite("inverse scale".into()))?.l();
    let df = params.b + p as f64 - 1.0;
    let mut a = DMatrix::<f64>::zeros(p, p);
    for i in 0..p {
        let chi = ChiSquared::new(df - i as f64).map_err(|e| Error::numeric(e.to_string()))?;
        a[(i, i)] = chi.sample(rng).sqrt();
        for j in 0..i {
            a[(i, j)] = rng.sample(StandardNormal);
        }
    }
    let la = l * a;
    Ok(symmetrize(&la * la.transpose()))
}

/// Covariance completion: returns `K` with `K^-1` equal to `sigma` on the
/// diagonal and on edges, and `K` zero off the edges.
pub fn complete_precision(g: &Graph, sigma: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let p = g.nodes();
    let mut w = sigma.clone();
    let nbrs: Vec<Vec<usize>> = (0..p).map(|j| g.neighbors(j).collect()).collect();
    let mut last = f64::INFINITY;
    for _ in 0..COMPLETION_MAX_SWEEPS {
        let mut change: f64 = 0.0;
        for j in 0..p {
            let nb = &nbrs[j];
            let mut col = DVector::<f64>::zeros(p);
            if !nb.is_empty() {
                let w_nn = DMatrix::from_fn(nb.len(), nb.len(), |a, b| w[(nb[a], nb[b])]);
                let rhs = DVector::from_fn(nb.len(), |a, _| sigma[(nb[a], j)]);
                let beta = Cholesky::new(w_nn)
                    .ok_or_else(|| Error::NotPositiveDefinite("neighbourhood block during completion".into()))?
                    .solve(&rhs);
                for l in 0..p {
                    if l != j {
                        col[l] = nb.iter().zip(beta.iter()).map(|(&m, b)| w[(l, m)] * b).sum();
                    }
                }
            }
            for l in 0..p {
                if l != j {
                    change = change.max((w[(l, j)] - col[l]).abs());
                    w[(l, j)] = col[l];
                    w[(j, l)] = col[l];
                }
            }
        }
        last = change;
        if change < COMPLETION_TOL {
            let mut k = spd_inverse(&w, "completed covariance")?;
            for i in 0..p {
                for j in 0..p {
                    if i != j && !g.has_edge(i, j) {
                        k[(i, j)] = 0.0;
                    }
                }
            }
            return Ok(k);
        }
    }
    Err(Error::SamplerConvergence { iterations: COMPLETION_MAX_SWEEPS, last_change: last })
}

/// Exact draw from `W_G(b, D)`.
pub fn gwishart_sample<R: Rng + ?Sized>(g: &Graph, params: &GWishartParams, rng: &mut R) -> Result<DMatrix<f64>> {
    if g.nodes() != params.dim() {
        return Err(Error::shape(format!("graph has {} nodes, scale is {}", g.nodes(), params.dim())));
    }
    let k0 = wishart_sample(params, rng)?;
    if g.edge_count() == crate::graph::pair_count(g.nodes()) {
        return Ok(k0);
    }
    let sigma = spd_inverse(&k0, "unconstrained Wishart draw")?;
    complete_precision(g, &sigma)
}

/// Rescale so the implied covariance is a correlation matrix; the zero
/// pattern is untouched.
pub fn standardize_to_inv_correlation(k: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let sigma = spd_inverse(k, "precision matrix")?;
    let s: Vec<f64> = (0..k.nrows()).map(|i| sigma[(i, i)].sqrt()).collect();
    Ok(DMatrix::from_fn(k.nrows(), k.ncols(), |i, j| k[(i, j)] * s[i] * s[j]))
}

/// `-K_ij / sqrt(K_ii K_jj)` off the diagonal, one on it.
pub fn partial_correlations(k: &DMatrix<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(k.nrows(), k.ncols(), |i, j| {
        if i == j {
            1.0
        } else {
            -k[(i, j)] / (k[(i, i)] * k[(j, j)]).sqrt()
        }
    })
}

pub fn is_positive_definite(k: &DMatrix<f64>) -> bool {
    Cholesky::new(k.clone()).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn standardize_two_by_two() {
        let k = DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 2.0]);
        let s = spd_inverse(&standardize_to_inv_correlation(&k).unwrap(), "").unwrap();
        assert!((s[(0, 0)] - 1.0).abs() < 1e-12 && (s[(1, 1)] - 1.0).abs() < 1e-12);
        assert!((s[(0, 1)] - 0.5).abs() < 1e-12);
        let k4 = DMatrix::identity(3, 3) * 4.0;
        let i = spd_inverse(&standardize_to_inv_correlation(&k4).unwrap(), "").unwrap();
        assert!((i - DMatrix::identity(3, 3)).amax() < 1e-12);
    }

    #[test]
    fn empty_graph_is_diagonal() {
        let g = Graph::empty(4);
        let k = gwishart_sample(&g, &GWishartParams::default_prior(4), &mut stream(1, 0)).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    assert_eq!(k[(i, j)], 0.0);
                }
            }
        }
    }

    #[test]
    fn completion_matches_on_edges() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
        let mut rng = stream(2, 0);
        let k0 = wishart_sample(&GWishartParams::default_prior(4), &mut rng).unwrap();
        let sigma = spd_inverse(&k0, "").unwrap();
        let k = complete_precision(&g, &sigma).unwrap();
        let w = spd_inverse(&k, "").unwrap();
        for i in 0..4 {
            assert!((w[(i, i)] - sigma[(i, i)]).abs() < 1e-7);
        }
        for (i, j) in g.edges() {
            assert!((w[(i, j)] - sigma[(i, j)]).abs() < 1e-7);
        }
        assert!(k[(0, 2)] == 0.0 && k[(1, 3)] == 0.0);
        assert!(is_positive_definite(&k));
    }

    #[test]
    fn rejects_bad_params() {
        assert!(GWishartParams::new(2.0, DMatrix::identity(2, 2)).is_err());
        assert!(GWishartParams::new(3.0, DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0])).is_err());
    }
}
