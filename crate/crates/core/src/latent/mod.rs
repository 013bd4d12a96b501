//! Gaussian latent layer: interval constraints from the counts and the
//! truncated-normal Gibbs update of each latent column.

pub mod interval;
pub mod truncnorm;

pub use interval::{count_from_latent, latent_interval, latent_upper, EmpiricalCdf, LatentInterval};
pub use truncnorm::truncated_normal_sample;

use crate::data::CountDataset;
use crate::error::{Error, Result};
use crate::marginals::{ColumnMarginal, DesignMatrix};
use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Per-cell latent bounds, column-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalTable {
    n: usize,
    p: usize,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl IntervalTable {
    pub fn build(ds: &CountDataset, x: &DesignMatrix, marginals: &[ColumnMarginal]) -> Result<Self> {
        let (n, p) = (ds.nrows(), ds.ncols());
        if marginals.len() != p {
            return Err(Error::shape(format!("{} marginals for {p} columns", marginals.len())));
        }
        let mut lo = Vec::with_capacity(n * p);
        let mut hi = Vec::with_capacity(n * p);
        for (j, m) in marginals.iter().enumerate() {
            let ivs = m.intervals(ds.column(j), x).map_err(|e| match e {
                Error::Consistency(msg) => Error::Consistency(format!("column {j}: {msg}")),
                other => other,
            })?;
            lo.extend(ivs.iter().map(|iv| iv.lo));
            hi.extend(ivs.iter().map(|iv| iv.hi));
        }
        Ok(Self { n, p, lo, hi })
    }

    /// Every cell unconstrained; the latent data then act as plain Gaussians.
    pub fn unbounded(n: usize, p: usize) -> Self {
        Self { n, p, lo: vec![f64::NEG_INFINITY; n * p], hi: vec![f64::INFINITY; n * p] }
    }

    pub fn from_intervals(n: usize, p: usize, cells: &[LatentInterval]) -> Result<Self> {
        if cells.len() != n * p {
            return Err(Error::shape("interval count does not match the table shape"));
        }
        Ok(Self { n, p, lo: cells.iter().map(|c| c.lo).collect(), hi: cells.iter().map(|c| c.hi).collect() })
    }

    pub fn nrows(&self) -> usize {
        self.n
    }

    pub fn ncols(&self) -> usize {
        self.p
    }

    pub fn column(&self, j: usize) -> (&[f64], &[f64]) {
        let r = j * self.n..(j + 1) * self.n;
        (&self.lo[r.clone()], &self.hi[r])
    }

    pub fn get(&self, i: usize, j: usize) -> LatentInterval {
        LatentInterval { lo: self.lo[j * self.n + i], hi: self.hi[j * self.n + i] }
    }
}

/// `n x p` latent Gaussian matrix, column-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatentMatrix {
    n: usize,
    p: usize,
    z: Vec<f64>,
}

impl LatentMatrix {
    pub fn from_columns(n: usize, p: usize, z: Vec<f64>) -> Result<Self> {
        if z.len() != n * p {
            return Err(Error::shape(format!("{} latent values for {n} x {p}", z.len())));
        }
        Ok(Self { n, p, z })
    }

    /// Independent standard-normal draws inside each cell's interval.
    pub fn initialize<R: Rng + ?Sized>(table: &IntervalTable, rng: &mut R) -> Result<Self> {
        let z = table
            .lo
            .iter()
            .zip(&table.hi)
            .map(|(&lo, &hi)| truncated_normal_sample(0.0, 1.0, lo, hi, rng))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { n: table.n, p: table.p, z })
    }

    pub fn nrows(&self) -> usize {
        self.n
    }

    pub fn ncols(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn column(&self, j: usize) -> &[f64] {
        &self.z[j * self.n..(j + 1) * self.n]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.z[j * self.n + i]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.z
    }

    /// `U = z'z`.
    pub fn gram(&self) -> DMatrix<f64> {
        let mut u = DMatrix::zeros(self.p, self.p);
        for a in 0..self.p {
            let ca = self.column(a);
            for b in a..self.p {
                let v: f64 = ca.iter().zip(self.column(b)).map(|(x, y)| x * y).sum();
                u[(a, b)] = v;
                u[(b, a)] = v;
            }
        }
        u
    }

    /// First cell outside its interval, if any.
    pub fn check_containment(&self, table: &IntervalTable) -> Result<()> {
        for j in 0..self.p {
            for i in 0..self.n {
                let v = self.get(i, j);
                if !table.get(i, j).contains(v) {
                    return Err(Error::Consistency(format!("latent cell ({i}, {j}) = {v} left its interval")));
                }
            }
        }
        Ok(())
    }
}

/// Redraw column `j` from its full conditional
/// `N(-sum_{k != j} K_jk z_k / K_jj, 1 / K_jj)` truncated to the cell intervals.
pub fn sample_latent_column<R: Rng + ?Sized>(
    z: &mut LatentMatrix,
    k: &DMatrix<f64>,
    j: usize,
    table: &IntervalTable,
    rng: &mut R,
) -> Result<()> {
    let n = z.n;
    let kjj = k[(j, j)];
    if !(kjj > 0.0) {
        return Err(Error::NotPositiveDefinite(format!("diagonal entry {j} of the precision is {kjj}")));
    }
    let mut mean = vec![0.0; n];
    for c in 0..z.p {
        let w = k[(j, c)];
        if c == j || w == 0.0 {
            continue;
        }
        let f = -w / kjj;
        for (m, v) in mean.iter_mut().zip(z.column(c)) {
            *m += f * v;
        }
    }
    let sd = kjj.sqrt().recip();
    let (lo, hi) = table.column(j);
    let col = &mut z.z[j * n..(j + 1) * n];
    for i in 0..n {
        col[i] = truncated_normal_sample(mean[i], sd, lo[i], hi[i], rng)?;
    }
    Ok(())
}

/// One pass over the columns in index order.
pub fn gibbs_sweep<R: Rng + ?Sized>(
    z: &mut LatentMatrix,
    k: &DMatrix<f64>,
    table: &IntervalTable,
    rng: &mut R,
) -> Result<()> {
    for j in 0..z.p {
        sample_latent_column(z, k, j, table, rng)?;
    }
    debug_assert!(z.check_containment(table).is_ok());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn conditional_mean_with_one_neighbour() {
        let n = 100_000;
        let mut z = LatentMatrix::from_columns(n, 2, [vec![0.0; n], vec![1.0; n]].concat()).unwrap();
        let k = DMatrix::from_row_slice(2, 2, &[1.0, -0.5, -0.5, 1.0]);
        let t = IntervalTable::unbounded(n, 2);
        sample_latent_column(&mut z, &k, 0, &t, &mut stream(5, 0)).unwrap();
        let c = z.column(0);
        let m = c.iter().sum::<f64>() / n as f64;
        let v = c.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n as f64;
        assert!((m - 0.5).abs() < 0.02 && (v - 1.0).abs() < 0.02, "{m} {v}");
        assert!(z.column(1).iter().all(|&x| x == 1.0));
    }

    #[test]
    fn half_normal_column() {
        let n = 100_000;
        let mut z = LatentMatrix::from_columns(n, 1, vec![1.0; n]).unwrap();
        let cells = vec![LatentInterval { lo: 0.0, hi: f64::INFINITY }; n];
        let t = IntervalTable::from_intervals(n, 1, &cells).unwrap();
        sample_latent_column(&mut z, &DMatrix::identity(1, 1), 0, &t, &mut stream(6, 0)).unwrap();
        let m = z.column(0).iter().sum::<f64>() / n as f64;
        assert!(z.column(0).iter().all(|&x| x > 0.0));
        assert!((m - (2.0 / std::f64::consts::PI).sqrt()).abs() < 0.01);
    }

    #[test]
    fn nonpositive_diagonal_is_rejected() {
        let mut z = LatentMatrix::from_columns(1, 1, vec![0.0]).unwrap();
        let r = sample_latent_column(&mut z, &DMatrix::zeros(1, 1), 0, &IntervalTable::unbounded(1, 1), &mut stream(0, 0));
        assert!(matches!(r, Err(Error::NotPositiveDefinite(_))));
    }
}
