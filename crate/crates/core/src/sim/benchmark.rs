//! Replicated graph-recovery study.

use super::evaluate::roc_auc;
use super::generate::{generate_counts, sample_random_graph, MarginalPreset, SimulationSpec};
use crate::bdmcmc::{edge_probabilities, run_chain, ChainConfig, DataTerm};
use crate::error::{Error, Result};
use crate::latent::IntervalTable;
use crate::marginals::{fit_columns, ColumnMarginal, FitSettings, MarginalChoice, MhConfig};
use crate::rng::{split_seed, stream};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::str::FromStr;
use std::time::Instant;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// DW marginals with the covariate in both links.
    WithCovariates,
    /// Intercept-only DW marginals.
    WithoutCovariates,
    /// Rank-based intervals, no parametric marginals.
    Empirical,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::WithCovariates => "with_covariates",
            Method::WithoutCovariates => "without_covariates",
            Method::Empirical => "empirical",
        }
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "with_covariates" | "with" => Ok(Method::WithCovariates),
            "without_covariates" | "without" => Ok(Method::WithoutCovariates),
            "empirical" => Ok(Method::Empirical),
            other => Err(Error::Config(format!("unknown method '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSpec {
    pub p: usize,
    pub n: usize,
    pub sparsity: f64,
    pub replicates: usize,
    pub setting: u8,
    pub theta1: Vec<f64>,
    pub methods: Vec<Method>,
    pub chain: ChainConfig,
    pub mh: MhConfig,
    pub seed: u64,
}

impl Default for BenchmarkSpec {
    fn default() -> Self {
        Self {
            p: 20,
            n: 100,
            sparsity: 0.2,
            replicates: 10,
            setting: 2,
            theta1: vec![2.0],
            methods: vec![Method::WithCovariates, Method::WithoutCovariates],
            chain: ChainConfig::default(),
            mh: MhConfig { iterations: 10_000, ..MhConfig::default() },
            seed: 1,
        }
    }
}

fn parse_value<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim().parse().map_err(|_| Error::Config(format!("bad value '{v}' for '{key}'")))
}

impl BenchmarkSpec {
    /// Plain `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut s = Self::default();
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value, got '{line}'", ln + 1)))?;
            let key = key.trim();
            match key {
                "p" => s.p = parse_value(key, v)?,
                "n" => s.n = parse_value(key, v)?,
                "sparsity" => s.sparsity = parse_value(key, v)?,
                "replicates" => s.replicates = parse_value(key, v)?,
                "setting" => s.setting = parse_value(key, v)?,
                "theta1" => s.theta1 = v.split(',').map(|t| parse_value(key, t)).collect::<Result<_>>()?,
                "methods" => s.methods = v.split(',').map(Method::from_str).collect::<Result<_>>()?,
                "iterations" => s.chain.iterations = parse_value(key, v)?,
                "burn_in" => s.chain.burn_in_fraction = parse_value(key, v)?,
                "refresh_rate" => s.chain.refresh_rate = parse_value(key, v)?,
                "link_prob" => s.chain.link_prob = parse_value(key, v)?,
                "mh_iterations" => s.mh.iterations = parse_value(key, v)?,
                "seed" => s.seed = parse_value(key, v)?,
                other => return Err(Error::Config(format!("unknown benchmark key '{other}'"))),
            }
        }
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 || self.theta1.is_empty() || self.methods.is_empty() {
            return Err(Error::Config("benchmark needs replicates, theta1 values and methods".into()));
        }
        self.chain.validate()?;
        self.mh.validate()?;
        for &t in &self.theta1 {
            self.simulation(t, 0)?.validate()?;
        }
        Ok(())
    }

    pub fn simulation(&self, theta1: f64, seed: u64) -> Result<SimulationSpec> {
        Ok(SimulationSpec {
            p: self.p,
            n: self.n,
            sparsity: self.sparsity,
            marginal: MarginalPreset::setting(self.setting, theta1)?,
            covariate_prob: 0.5,
            seed,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub replicate: usize,
    pub setting: u8,
    pub theta1: f64,
    pub method: Method,
    pub auc: f64,
    pub runtime_seconds: f64,
}

impl ReportRow {
    pub const HEADER: &'static str = "replicate\tsetting\ttheta1\tmethod\tauc\truntime_seconds";

    pub fn to_tsv(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}\t{:.6}\t{:.3}",
            self.replicate,
            self.setting,
            self.theta1,
            self.method.label(),
            self.auc,
            self.runtime_seconds
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub setting: u8,
    pub theta1: f64,
    pub method: Method,
    pub count: usize,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BenchmarkOutcome {
    pub rows: Vec<ReportRow>,
    pub failures: usize,
    pub summaries: Vec<MethodSummary>,
}

/// Linearly interpolated sample quantile.
pub fn quantile(values: &[f64], prob: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    if v.is_empty() {
        return f64::NAN;
    }
    let h = prob * (v.len() - 1) as f64;
    let (lo, hi) = (h.floor() as usize, h.ceil() as usize);
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

/// Structure-learning run for one dataset and method; returns the AUC.
pub fn score_method(
    data: &super::generate::GeneratedData,
    method: Method,
    chain: &ChainConfig,
    mh: &MhConfig,
    seed: u64,
) -> Result<f64> {
    let ds = &data.dataset;
    let x = ds.design(method == Method::WithCovariates);
    let marginals: Vec<ColumnMarginal> = if method == Method::Empirical {
        vec![ColumnMarginal::Empirical; ds.ncols()]
    } else {
        let settings = FitSettings { choice: MarginalChoice::Dw, compare_nb: false, mh: mh.clone(), ..FitSettings::default() };
        fit_columns(ds, &x, &settings, split_seed(seed, 1))?.into_iter().map(|f| f.marginal).collect()
    };
    let table = IntervalTable::build(ds, &x, &marginals)?;
    let out = run_chain(chain, DataTerm::Latent(table), split_seed(seed, 2), 0)?;
    let probs = edge_probabilities(&out.accumulator)?;
    Ok(roc_auc(&probs, &data.graph, method.label())?.auc)
}

/// Generate, fit, learn and score every replicate; failures are logged and
/// counted, not fatal.
pub fn run_benchmark(spec: &BenchmarkSpec) -> Result<BenchmarkOutcome> {
    spec.validate()?;
    let jobs: Vec<(usize, usize)> =
        (0..spec.theta1.len()).flat_map(|t| (0..spec.replicates).map(move |r| (t, r))).collect();
    let results: Vec<Vec<Result<ReportRow>>> = jobs
        .par_iter()
        .map(|&(t, r)| {
            let theta1 = spec.theta1[t];
            let seed = split_seed(split_seed(spec.seed, t as u64), r as u64);
            let generated = (|| {
                let sim = spec.simulation(theta1, seed)?;
                let mut rng = stream(seed, 0);
                let g = sample_random_graph(spec.p, spec.sparsity, &mut rng)?;
                generate_counts(g, &sim, &mut rng)
            })();
            let data = match generated {
                Ok(d) => d,
                Err(e) => return vec![Err(e)],
            };
            spec.methods
                .iter()
                .map(|&m| {
                    let start = Instant::now();
                    let auc = score_method(&data, m, &spec.chain, &spec.mh, seed)?;
                    Ok(ReportRow {
                        replicate: r,
                        setting: spec.setting,
                        theta1,
                        method: m,
                        auc,
                        runtime_seconds: start.elapsed().as_secs_f64(),
                    })
                })
                .collect()
        })
        .collect();

    let mut rows = Vec::new();
    let mut failures = 0;
    for res in results.into_iter().flatten() {
        match res {
            Ok(row) => rows.push(row),
            Err(e) => {
                log::warn!("benchmark replicate failed: {e}");
                failures += 1;
            }
        }
    }
    let mut summaries = Vec::new();
    for &theta1 in &spec.theta1 {
        for &method in &spec.methods {
            let aucs: Vec<f64> =
                rows.iter().filter(|r| r.theta1 == theta1 && r.method == method).map(|r| r.auc).collect();
            summaries.push(MethodSummary {
                setting: spec.setting,
                theta1,
                method,
                count: aucs.len(),
                q25: quantile(&aucs, 0.25),
                median: quantile(&aucs, 0.5),
                q75: quantile(&aucs, 0.75),
            });
        }
    }
    Ok(BenchmarkOutcome { rows, failures, summaries })
}
