//! One-edge moves on `(G, K)`. For a pair `i < j` the larger node `j` is
//! peeled off: with `K = [[A, k], [k', k_jj]]` the block `A`, the Schur
//! complement `k_jj - k' A^-1 k` and the other entries of `k` are held
//! fixed, and only `k_ij` (with `k_jj` following it) changes.

use super::normconst::NormalizingConstants;
use super::structure::Graph;
use crate::error::{Error, Result};
use nalgebra::DMatrix;
use std::f64::consts::PI;

/// Quantities shared by the birth of `(i, j)` and its reverse death.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeTerms {
    pub i: usize,
    pub j: usize,
    /// Log of the birth ratio; the death ratio is its negation.
    pub log_birth: f64,
    /// Conditional precision of the new entry `k_ij`.
    pub tau: f64,
    /// Conditional mean of the new entry.
    pub mean: f64,
    /// `(A^-1)_ii`.
    pub a_inv_ii: f64,
    /// `sum over other neighbours l of j of (A^-1)_il k_lj`.
    pub s: f64,
}

/// Evaluate the move terms for pair `(a, b)` in either order.
///
/// `sigma` must be `K^-1`; `d_star` is the scale entering the data term
/// (`D + U`, or `D` when the data term is off).
pub fn edge_terms(
    g: &Graph,
    k: &DMatrix<f64>,
    sigma: &DMatrix<f64>,
    d_star: &DMatrix<f64>,
    a: usize,
    b: usize,
    consts: &NormalizingConstants,
    link_prob: f64,
) -> Result<EdgeTerms> {
    let (i, j) = if a < b { (a, b) } else { (b, a) };
    let sjj = sigma[(j, j)];
    let ainv = |x: usize, y: usize| sigma[(x, y)] - sigma[(x, j)] * sigma[(y, j)] / sjj;
    let a_inv_ii = ainv(i, i);
    let mut s = 0.0;
    for l in g.neighbors(j) {
        if l != i {
            s += ainv(i, l) * k[(l, j)];
        }
    }
    let tau = d_star[(j, j)] * a_inv_ii;
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::numeric(format!("conditional precision {tau} for pair ({i}, {j})")));
    }
    let mean = -(d_star[(j, j)] * s + d_star[(i, j)]) / tau;
    let log_birth = (link_prob / (1.0 - link_prob)).ln() - consts.log_ratio(g, i, j)
        + 0.5 * (2.0 * PI / tau).ln()
        + 0.5 * tau * mean * mean;
    if !log_birth.is_finite() {
        return Err(Error::numeric(format!("non-finite log ratio for pair ({i}, {j})")));
    }
    Ok(EdgeTerms { i, j, log_birth, tau, mean, a_inv_ii, s })
}

/// `log[P(G*, K* | z) / P(G, K | z)]` for toggling `(a, b)`: the birth ratio
/// when the pair is absent, its negation when present.
pub fn log_posterior_ratio_for_edge(
    g: &Graph,
    k: &DMatrix<f64>,
    sigma: &DMatrix<f64>,
    d_star: &DMatrix<f64>,
    a: usize,
    b: usize,
    consts: &NormalizingConstants,
    link_prob: f64,
) -> Result<f64> {
    let t = edge_terms(g, k, sigma, d_star, a, b, consts, link_prob)?;
    Ok(if g.has_edge(a, b) { -t.log_birth } else { t.log_birth })
}

/// Change applied to `K`: `delta` at `(i, j)` and `(j, i)`, `eps` at `(j, j)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrecisionUpdate {
    pub i: usize,
    pub j: usize,
    pub delta: f64,
    pub eps: f64,
}

/// Set `k_ij = value` keeping the Schur complement of `j`; covers birth
/// (`value` drawn from `N(mean, 1/tau)`) and death (`value = 0`).
pub fn set_entry(k: &mut DMatrix<f64>, t: &EdgeTerms, value: f64) -> PrecisionUpdate {
    let (i, j) = (t.i, t.j);
    let old = k[(i, j)];
    let quad = |x: f64| x * x * t.a_inv_ii + 2.0 * x * t.s;
    let eps = quad(value) - quad(old);
    k[(i, j)] = value;
    k[(j, i)] = value;
    k[(j, j)] += eps;
    PrecisionUpdate { i, j, delta: value - old, eps }
}

/// Rank-two Woodbury refresh of `sigma = K^-1` after `set_entry`.
pub fn update_inverse(sigma: &mut DMatrix<f64>, u: &PrecisionUpdate) {
    let (i, j) = (u.i, u.j);
    let (sii, sij, sjj) = (sigma[(i, i)], sigma[(i, j)], sigma[(j, j)]);
    // M = (I + C S)^-1 C with C = [[0, d], [d, e]], S = sigma restricted to {i, j}.
    let (d, e) = (u.delta, u.eps);
    let (c00, c01, c10, c11) = (1.0 + d * sij, d * sjj, d * sii + e * sij, 1.0 + d * sij + e * sjj);
    let det = c00 * c11 - c01 * c10;
    let (m00, m01, m11) = ((-c01 * d) / det, (c11 * d - c01 * e) / det, (c00 * e - c10 * d) / det);
    let p = sigma.nrows();
    let ci: Vec<f64> = (0..p).map(|r| sigma[(r, i)]).collect();
    let cj: Vec<f64> = (0..p).map(|r| sigma[(r, j)]).collect();
    for r in 0..p {
        let (ar, br) = (ci[r], cj[r]);
        let (x0, x1) = (ar * m00 + br * m01, ar * m01 + br * m11);
        for c in r..p {
            let v = sigma[(r, c)] - (x0 * ci[c] + x1 * cj[c]);
            sigma[(r, c)] = v;
            sigma[(c, r)] = v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::normconst::NormConstMode;
    use crate::graph::wishart::{gwishart_sample, is_positive_definite, spd_inverse, GWishartParams};
    use crate::rng::stream;

    #[test]
    fn birth_then_death_restores_and_antisymmetric() {
        let p = 5;
        let mut rng = stream(9, 0);
        let g = Graph::from_edges(p, &[(0, 4), (1, 4), (2, 3)]).unwrap();
        let par = GWishartParams::default_prior(p);
        let consts = NormalizingConstants::build(NormConstMode::Approximate, &par, &mut rng).unwrap();
        let k0 = gwishart_sample(&g, &par, &mut rng).unwrap();
        let d = DMatrix::identity(p, p) * 3.0 + DMatrix::from_element(p, p, 0.2);
        let sigma0 = spd_inverse(&k0, "").unwrap();

        let t = edge_terms(&g, &k0, &sigma0, &d, 3, 4, &consts, 0.3).unwrap();
        let mut k1 = k0.clone();
        let mut sigma1 = sigma0.clone();
        let up = set_entry(&mut k1, &t, t.mean + 0.7 / t.tau.sqrt());
        update_inverse(&mut sigma1, &up);
        assert!((&sigma1 - spd_inverse(&k1, "").unwrap()).amax() < 1e-9);
        assert!(is_positive_definite(&k1));
        assert!((k1.determinant() - k0.determinant()).abs() < 1e-9 * k0.determinant());

        let mut g1 = g.clone();
        g1.toggle(3, 4);
        let back = log_posterior_ratio_for_edge(&g1, &k1, &sigma1, &d, 4, 3, &consts, 0.3).unwrap();
        let fwd = log_posterior_ratio_for_edge(&g, &k0, &sigma0, &d, 3, 4, &consts, 0.3).unwrap();
        assert!((fwd + back).abs() < 1e-10);

        let t1 = edge_terms(&g1, &k1, &sigma1, &d, 3, 4, &consts, 0.3).unwrap();
        let mut k2 = k1.clone();
        set_entry(&mut k2, &t1, 0.0);
        assert!((&k2 - &k0).amax() < 1e-10);
    }
}
