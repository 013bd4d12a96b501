//! ROC curves and AUC for edge-probability scores against a true graph.

use crate::error::{Error, Result};
use crate::graph::{pairs, Graph};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveryReport {
    pub auc: f64,
    /// `(false positive rate, true positive rate)` from the strictest cutoff down.
    pub roc: Vec<(f64, f64)>,
    pub true_edges: Vec<(usize, usize)>,
    pub method: String,
}

/// AUC by the Mann-Whitney statistic with tied scores counted as one half.
pub fn mann_whitney_auc(pos: &[f64], neg: &[f64]) -> Result<f64> {
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::DegenerateClasses(format!("{} positives and {} negatives", pos.len(), neg.len())));
    }
    let mut all: Vec<(f64, bool)> = pos.iter().map(|&s| (s, true)).chain(neg.iter().map(|&s| (s, false))).collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut rank_sum = 0.0;
    let mut start = 0;
    while start < all.len() {
        let mut end = start;
        while end + 1 < all.len() && all[end + 1].0 == all[start].0 {
            end += 1;
        }
        let mid_rank = 0.5 * ((start + 1) + (end + 1)) as f64;
        rank_sum += mid_rank * all[start..=end].iter().filter(|e| e.1).count() as f64;
        start = end + 1;
    }
    let (np, nn) = (pos.len() as f64, neg.len() as f64);
    Ok((rank_sum - np * (np + 1.0) / 2.0) / (np * nn))
}

/// ROC over all cutoffs of the upper-triangle scores.
pub fn roc_auc(probs: &DMatrix<f64>, truth: &Graph, method: &str) -> Result<RecoveryReport> {
    let p = truth.nodes();
    if probs.nrows() != p || probs.ncols() != p {
        return Err(Error::shape(format!("{}x{} scores for {p} nodes", probs.nrows(), probs.ncols())));
    }
    let (mut pos, mut neg) = (Vec::new(), Vec::new());
    for (i, j) in pairs(p) {
        if truth.has_edge(i, j) {
            pos.push(probs[(i, j)]);
        } else {
            neg.push(probs[(i, j)]);
        }
    }
    let auc = mann_whitney_auc(&pos, &neg)?;
    let mut cutoffs: Vec<f64> = pos.iter().chain(&neg).copied().collect();
    cutoffs.sort_by(|a, b| b.total_cmp(a));
    cutoffs.dedup();
    let mut roc = vec![(0.0, 0.0)];
    for c in cutoffs {
        let tp = pos.iter().filter(|&&s| s >= c).count() as f64 / pos.len() as f64;
        let fp = neg.iter().filter(|&&s| s >= c).count() as f64 / neg.len() as f64;
        roc.push((fp, tp));
    }
    Ok(RecoveryReport { auc, roc, true_edges: truth.edges(), method: method.to_string() })
}

/// Trapezoidal area under ROC points.
pub fn trapezoid_area(roc: &[(f64, f64)]) -> f64 {
    roc.windows(2).map(|w| (w[1].0 - w[0].0) * 0.5 * (w[1].1 + w[0].1)).sum()
}
