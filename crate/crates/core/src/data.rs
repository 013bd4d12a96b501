//! In-memory count tables with optional sample covariates.

use crate::error::{Error, Result};
use crate::marginals::DesignMatrix;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

/// `n x p` nonnegative counts (stored column by column) plus an `n x d`
/// covariate block (stored row by row).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountDataset {
    n: usize,
    p: usize,
    counts: Vec<u64>,
    d: usize,
    covariates: Vec<f64>,
    column_names: Vec<String>,
    row_ids: Vec<String>,
    covariate_names: Vec<String>,
}

fn ensure_unique(names: &[String], what: &str) -> Result<()> {
    let mut seen = HashSet::new();
    for name in names {
        if !seen.insert(name.as_str()) {
            return Err(Error::input(format!("duplicate {what} '{name}'")));
        }
    }
    Ok(())
}

impl CountDataset {
    /// Counts given column-major; names default to `c{j}` / `r{i}`.
    pub fn from_columns(n: usize, p: usize, counts: Vec<u64>) -> Result<Self> {
        if counts.len() != n * p {
            return Err(Error::shape(format!("{} counts for a {n} x {p} table", counts.len())));
        }
        Ok(Self {
            n,
            p,
            counts,
            d: 0,
            covariates: Vec::new(),
            column_names: (0..p).map(|j| format!("c{j}")).collect(),
            row_ids: (0..n).map(|i| format!("r{i}")).collect(),
            covariate_names: Vec::new(),
        })
    }

    pub fn from_rows(rows: &[Vec<u64>]) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::shape("ragged count rows"));
        }
        let mut counts = vec![0; n * p];
        for (i, r) in rows.iter().enumerate() {
            for (j, &v) in r.iter().enumerate() {
                counts[j * n + i] = v;
            }
        }
        Self::from_columns(n, p, counts)
    }

    pub fn with_names(mut self, column_names: Vec<String>, row_ids: Vec<String>) -> Result<Self> {
        if column_names.len() != self.p || row_ids.len() != self.n {
            return Err(Error::shape("name vectors do not match the table shape"));
        }
        ensure_unique(&column_names, "column name")?;
        ensure_unique(&row_ids, "row id")?;
        self.column_names = column_names;
        self.row_ids = row_ids;
        Ok(self)
    }

    /// Append one covariate column.
    pub fn push_covariate(&mut self, name: &str, values: &[f64]) -> Result<()> {
        if values.len() != self.n {
            return Err(Error::shape(format!("covariate '{name}' has {} values for {} rows", values.len(), self.n)));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::input(format!("covariate '{name}' has non-finite values")));
        }
        let mut names = self.covariate_names.clone();
        names.push(name.to_string());
        ensure_unique(&names, "covariate name")?;
        let d = self.d + 1;
        let mut cov = Vec::with_capacity(self.n * d);
        for (i, &v) in values.iter().enumerate() {
            cov.extend_from_slice(&self.covariates[i * self.d..(i + 1) * self.d]);
            cov.push(v);
        }
        self.covariates = cov;
        self.d = d;
        self.covariate_names = names;
        Ok(())
    }

    pub fn nrows(&self) -> usize {
        self.n
    }

    pub fn ncols(&self) -> usize {
        self.p
    }

    pub fn ncovariates(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn column(&self, j: usize) -> &[u64] {
        &self.counts[j * self.n..(j + 1) * self.n]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.counts[j * self.n + i]
    }

    pub fn covariate(&self, i: usize, c: usize) -> f64 {
        self.covariates[i * self.d + c]
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn row_ids(&self) -> &[String] {
        &self.row_ids
    }

    pub fn covariate_names(&self) -> &[String] {
        &self.covariate_names
    }

    /// Design with intercept; covariates dropped when `use_covariates` is false.
    pub fn design(&self, use_covariates: bool) -> DesignMatrix {
        if use_covariates && self.d > 0 {
            DesignMatrix::with_intercept(self.n, self.d, &self.covariates).expect("shape checked on insert")
        } else {
            DesignMatrix::intercept_only(self.n)
        }
    }

    pub fn select_columns(&self, keep: &[usize]) -> Self {
        let mut counts = Vec::with_capacity(keep.len() * self.n);
        for &j in keep {
            counts.extend_from_slice(self.column(j));
        }
        Self {
            n: self.n,
            p: keep.len(),
            counts,
            d: self.d,
            covariates: self.covariates.clone(),
            column_names: keep.iter().map(|&j| self.column_names[j].clone()).collect(),
            row_ids: self.row_ids.clone(),
            covariate_names: self.covariate_names.clone(),
        }
    }
}
