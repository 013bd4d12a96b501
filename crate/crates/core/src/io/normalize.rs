//! Column filtering and library-size normalization.

use crate::data::CountDataset;
use crate::error::{Error, Result};
use std::collections::HashSet;

/// Keep columns whose nonzero fraction is at least `min_prevalence` and that
/// show more than `min_distinct` distinct values, within every group when
/// `groups` (one label per row) is given.
pub fn filter_otus(
    ds: &CountDataset,
    min_prevalence: f64,
    min_distinct: usize,
    groups: Option<&[usize]>,
) -> Result<CountDataset> {
    if !(0.0..=1.0).contains(&min_prevalence) {
        return Err(Error::domain(format!("prevalence threshold must lie in [0,1], got {min_prevalence}")));
    }
    let n = ds.nrows();
    let labels: Vec<usize> = match groups {
        Some(g) if g.len() != n => return Err(Error::shape(format!("{} group labels for {n} rows", g.len()))),
        Some(g) => g.to_vec(),
        None => vec![0; n],
    };
    let mut distinct_groups: Vec<usize> = labels.clone();
    distinct_groups.sort_unstable();
    distinct_groups.dedup();

    let passes = |col: &[u64], grp: usize| {
        let vals: Vec<u64> = col.iter().zip(&labels).filter(|(_, &l)| l == grp).map(|(&v, _)| v).collect();
        if vals.is_empty() {
            return false;
        }
        let prevalence = vals.iter().filter(|&&v| v > 0).count() as f64 / vals.len() as f64;
        let distinct = vals.iter().collect::<HashSet<_>>().len();
        let distinct_ok = min_distinct == 0 || distinct > min_distinct;
        prevalence >= min_prevalence && distinct_ok
    };
    let keep: Vec<usize> =
        (0..ds.ncols()).filter(|&j| distinct_groups.iter().all(|&g| passes(ds.column(j), g))).collect();
    if keep.is_empty() {
        return Err(Error::EmptySelection);
    }
    Ok(ds.select_columns(&keep))
}

/// Per-sample size factors. For each pair of samples the ratios `y_ij / y_kj`
/// over columns nonzero in both are combined by geometric mean; a sample's
/// factor is the geometric mean of those pairwise values over all samples
/// (itself included, contributing 1), rescaled so the factors have geometric
/// mean one.
pub fn library_size_factors(ds: &CountDataset) -> Result<Vec<f64>> {
    let (n, p) = (ds.nrows(), ds.ncols());
    if n < 2 {
        return Err(Error::input("size factors need at least two samples"));
    }
    let logs: Vec<Vec<Option<f64>>> = (0..n)
        .map(|i| (0..p).map(|j| (ds.get(i, j) > 0).then(|| (ds.get(i, j) as f64).ln())).collect())
        .collect();
    let mut log_factor = vec![0.0; n];
    for i in 0..n {
        let (mut acc, mut pairs) = (0.0, 0usize);
        for k in 0..n {
            if k == i {
                pairs += 1;
                continue;
            }
            let (mut s, mut c) = (0.0, 0usize);
            for j in 0..p {
                if let (Some(a), Some(b)) = (logs[i][j], logs[k][j]) {
                    s += a - b;
                    c += 1;
                }
            }
            if c > 0 {
                acc += s / c as f64;
                pairs += 1;
            }
        }
        if pairs == 1 {
            return Err(Error::Normalization(format!(
                "sample '{}' shares no nonzero column with any other sample",
                ds.row_ids()[i]
            )));
        }
        log_factor[i] = acc / pairs as f64;
    }
    let centre = log_factor.iter().sum::<f64>() / n as f64;
    Ok(log_factor.iter().map(|l| (l - centre).exp()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn doubled_sample() {
        let ds = CountDataset::from_rows(&[vec![1, 2, 3], vec![2, 4, 6]]).unwrap();
        let f = library_size_factors(&ds).unwrap();
        assert!((f[0] - 0.5f64.sqrt()).abs() < 1e-12);
        assert!((f[1] - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn isolated_sample_fails() {
        let ds = CountDataset::from_rows(&[vec![1, 0], vec![0, 4], vec![0, 2]]).unwrap();
        assert!(matches!(library_size_factors(&ds), Err(Error::Normalization(m)) if m.contains("r0")));
    }

    #[test]
    fn filter_rules() {
        let ds = CountDataset::from_rows(&[vec![0, 1, 1], vec![0, 2, 0], vec![0, 3, 0], vec![0, 0, 0]]).unwrap();
        assert_eq!(filter_otus(&ds, 0.0, 0, None).unwrap(), ds);
        let f = filter_otus(&ds, 0.25, 2, None).unwrap();
        assert_eq!(f.column_names(), &["c1".to_string()]);
        assert!(matches!(filter_otus(&ds, 1.0, 0, None), Err(Error::EmptySelection)));
        let groups = [0, 0, 1, 1];
        let f = filter_otus(&ds, 0.5, 0, Some(&groups)).unwrap();
        assert_eq!(f.column_names(), &["c1".to_string()]);
    }
}
