//! End-to-end run: filter, normalize, fit marginals, learn structure, write artifacts.

use super::config::RunConfig;
use super::normalize::{filter_otus, library_size_factors};
use super::table::format_matrix;
use crate::bdmcmc::{edge_probabilities, run_chain, Chain, ChainOutput, DataTerm, PosteriorAccumulator};
use crate::data::CountDataset;
use crate::error::{Error, Result};
use crate::latent::IntervalTable;
use crate::marginals::fit::CoefficientVector;
use crate::marginals::{fit_columns, ColumnFit, FitSummary};
use crate::rng::split_seed;
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub const LIBRARY_SIZE_COVARIATE: &str = "log_size_factor";

pub const EDGE_PROBABILITIES: &str = "edge_probabilities.tsv";
pub const EDGE_LIST: &str = "edges.txt";
pub const PARTIAL_CORRELATIONS: &str = "partial_correlations.tsv";
pub const MARGINAL_SUMMARY: &str = "marginals.tsv";
pub const BIC_TABLE: &str = "bic.tsv";
pub const GRAPH_SIZE_TRACE: &str = "graph_size.tsv";
pub const DIAGNOSTICS: &str = "diagnostics.json";
pub const MANIFEST: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Seeds {
    pub master: u64,
    pub marginals: u64,
    /// Chain `c` runs on stream `c` of this seed.
    pub chains: u64,
}

impl Seeds {
    pub fn derive(master: u64) -> Self {
        Self { master, marginals: split_seed(master, 0), chains: split_seed(master, 1) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub config: RunConfig,
    pub seeds: Seeds,
    pub input_rows: usize,
    pub input_columns: usize,
    pub kept_columns: Vec<String>,
    pub covariates: Vec<String>,
    pub artifacts: Vec<String>,
    pub completed: bool,
    pub failed_stage: Option<String>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChainDiagnostics {
    pub index: usize,
    pub jumps: u64,
    pub mean_graph_size: f64,
    pub graph_size_trace: Vec<u32>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Diagnostics {
    pub chains: Vec<ChainDiagnostics>,
    /// Pearson correlation of upper-triangle edge probabilities between chains.
    pub cross_chain_correlation: Vec<Vec<f64>>,
}

/// Everything the pipeline computed, also written to disk.
#[derive(Clone, Debug)]
pub struct PipelineResult {
    pub dataset: CountDataset,
    pub fits: Vec<ColumnFit>,
    pub structure: StructureResult,
    pub manifest: Manifest,
}

struct Stage<'a> {
    manifest: Manifest,
    dir: &'a Path,
}

impl Stage<'_> {
    fn run<T>(&mut self, name: &str, f: impl FnOnce(&mut Manifest) -> Result<T>) -> Result<T> {
        log::info!("pipeline stage: {name}");
        let out = f(&mut self.manifest);
        if let Err(e) = &out {
            self.fail(name, e);
        }
        out
    }

    fn fail(&mut self, name: &str, e: &Error) {
        self.manifest.failed_stage = Some(name.to_string());
        self.manifest.error = Some(e.to_string());
        if let Err(w) = write_json(&self.dir.join(MANIFEST), &self.manifest) {
            log::error!("could not write partial manifest: {w}");
        }
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        if let Err(e) = std::fs::write(self.dir.join(name), contents) {
            let e = Error::from(e);
            self.fail("write", &e);
            return Err(e);
        }
        self.manifest.artifacts.push(name.to_string());
        Ok(())
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

pub fn read_groups(path: &Path) -> Result<Vec<String>> {
    Ok(std::fs::read_to_string(path)?.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect())
}

fn group_indices(labels: &[String]) -> Vec<usize> {
    let mut seen: Vec<&str> = Vec::new();
    labels
        .iter()
        .map(|l| match seen.iter().position(|s| *s == l) {
            Some(k) => k,
            None => {
                seen.push(l);
                seen.len() - 1
            }
        })
        .collect()
}

pub fn upper_triangle(m: &DMatrix<f64>) -> Vec<f64> {
    let p = m.nrows();
    (0..p).flat_map(|i| (i + 1..p).map(move |j| (i, j))).map(|(i, j)| m[(i, j)]).collect()
}

pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        f64::NAN
    } else {
        sab / (saa * sbb).sqrt()
    }
}

/// Edges with probability strictly above `cutoff`, as `i j` lines.
pub fn thresholded_edges(probs: &DMatrix<f64>, cutoff: f64) -> String {
    let p = probs.nrows();
    let mut s = String::new();
    for i in 0..p {
        for j in i + 1..p {
            if probs[(i, j)] > cutoff {
                let _ = writeln!(s, "{i} {j}");
            }
        }
    }
    s
}

fn parameter_names(fit: &FitSummary) -> Vec<String> {
    let c = &fit.mean;
    let mut names: Vec<String> = (0..c.theta.len()).map(|k| format!("theta{k}")).collect();
    names.extend((0..c.gamma.len()).map(|k| format!("gamma{k}")));
    if c.pi.is_some() {
        names.push("pi".into());
    }
    names
}

pub fn format_marginal_summary(names: &[String], fits: &[ColumnFit]) -> String {
    let mut s = String::from("column\tmodel\tparameter\tmean\thpd_lower\thpd_upper\tacceptance\n");
    for (name, fit) in names.iter().zip(fits) {
        for (label, summary) in [("dw", &fit.dw), ("zidw", &fit.zidw)] {
            let Some(sm) = summary else { continue };
            let flat = sm.mean.flatten();
            for ((par, mean), (lo, hi)) in parameter_names(sm).iter().zip(&flat).zip(&sm.hpd) {
                let _ = writeln!(s, "{name}\t{label}\t{par}\t{mean:.6}\t{lo:.6}\t{hi:.6}\t{:.4}", sm.acceptance_rate);
            }
        }
    }
    s
}

pub fn format_bic_table(names: &[String], fits: &[ColumnFit]) -> String {
    let cell = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |b| format!("{b:.6}"));
    let mut s = String::from("column\tselected\tbic_dw\tbic_zidw\tbic_nb\n");
    for (name, fit) in names.iter().zip(fits) {
        let _ = writeln!(
            s,
            "{name}\t{}\t{}\t{}\t{}",
            fit.selected_label(),
            cell(fit.dw.as_ref().map(|f| f.bic)),
            cell(fit.zidw.as_ref().map(|f| f.bic)),
            cell(fit.nb_bic)
        );
    }
    s
}

fn format_graph_size(outputs: &[ChainOutput]) -> String {
    let mut s = String::from("iteration");
    for c in 0..outputs.len() {
        let _ = write!(s, "\tchain{c}");
    }
    s.push('\n');
    let len = outputs.iter().map(|o| o.graph_size_trace.len()).max().unwrap_or(0);
    for t in 0..len {
        let _ = write!(s, "{}", t + 1);
        for o in outputs {
            match o.graph_size_trace.get(t) {
                Some(v) => {
                    let _ = write!(s, "\t{v}");
                }
                None => s.push_str("\tNA"),
            }
        }
        s.push('\n');
    }
    s
}

fn run_one_chain(cfg: &RunConfig, data: DataTerm, seed: u64, c: usize) -> Result<ChainOutput> {
    if !cfg.output.checkpoint {
        return run_chain(&cfg.chain, data, seed, c as u64);
    }
    let path: PathBuf = cfg.output.dir.join(format!("chain{c}.checkpoint.json"));
    let mut chain = match Chain::load_checkpoint(&path) {
        Ok(ch) if ch.config == cfg.chain => {
            log::info!("resuming chain {c} from {}", path.display());
            ch
        }
        _ => Chain::new(cfg.chain.clone(), data, seed, c as u64)?,
    };
    chain.run(Some(&path))?;
    Ok(chain.output())
}

/// Filter columns, then add the log library-size covariate when requested.
pub fn prepare_dataset(cfg: &RunConfig, ds: &CountDataset, groups: Option<&[String]>) -> Result<CountDataset> {
    let idx = match groups {
        Some(g) if g.len() != ds.nrows() => {
            return Err(Error::input(format!("{} group labels for {} rows", g.len(), ds.nrows())))
        }
        Some(g) => Some(group_indices(g)),
        None => None,
    };
    let mut data = filter_otus(ds, cfg.input.min_prevalence, cfg.input.min_distinct, idx.as_deref())?;
    if cfg.input.library_size_covariate {
        let logs: Vec<f64> = library_size_factors(&data)?.iter().map(|v| v.ln()).collect();
        data.push_covariate(LIBRARY_SIZE_COVARIATE, &logs)?;
    }
    Ok(data)
}

/// Merged output of all chains.
#[derive(Clone, Debug)]
pub struct StructureResult {
    pub chains: Vec<ChainOutput>,
    pub edge_probabilities: DMatrix<f64>,
    pub partial_correlations: DMatrix<f64>,
    pub diagnostics: Diagnostics,
}

impl StructureResult {
    /// File name and contents of every structure artifact.
    pub fn artifacts(&self, names: &[String], cutoff: f64) -> Result<Vec<(&'static str, String)>> {
        Ok(vec![
            (EDGE_PROBABILITIES, format_matrix(names, &self.edge_probabilities)),
            (EDGE_LIST, thresholded_edges(&self.edge_probabilities, cutoff)),
            (PARTIAL_CORRELATIONS, format_matrix(names, &self.partial_correlations)),
            (GRAPH_SIZE_TRACE, format_graph_size(&self.chains)),
            (DIAGNOSTICS, serde_json::to_string_pretty(&self.diagnostics)? + "\n"),
        ])
    }
}

/// Run `cfg.chains` chains in parallel on `table` and merge them.
pub fn learn_structure(cfg: &RunConfig, table: &IntervalTable, seed: u64) -> Result<StructureResult> {
    let outputs: Vec<ChainOutput> = (0..cfg.chains)
        .into_par_iter()
        .map(|c| run_one_chain(cfg, DataTerm::Latent(table.clone()), seed, c))
        .collect::<Result<_>>()?;
    let accs: Vec<PosteriorAccumulator> = outputs.iter().map(|o| o.accumulator.clone()).collect();
    let merged = PosteriorAccumulator::merge(&accs)?;
    let per_chain: Vec<Vec<f64>> =
        accs.iter().map(|a| edge_probabilities(a).map(|m| upper_triangle(&m))).collect::<Result<_>>()?;
    let cross = per_chain.iter().map(|a| per_chain.iter().map(|b| pearson(a, b)).collect()).collect();
    let chains = outputs
        .iter()
        .enumerate()
        .map(|(index, o)| {
            let tr = &o.graph_size_trace;
            let mean = tr.iter().map(|&v| v as f64).sum::<f64>() / tr.len().max(1) as f64;
            ChainDiagnostics { index, jumps: o.jumps, mean_graph_size: mean, graph_size_trace: tr.clone() }
        })
        .collect();
    Ok(StructureResult {
        edge_probabilities: edge_probabilities(&merged)?,
        partial_correlations: merged.partial_correlations()?,
        diagnostics: Diagnostics { chains, cross_chain_correlation: cross },
        chains: outputs,
    })
}

/// Run every stage and write artifacts into `cfg.output.dir`. `groups` gives
/// one label per row for group-wise filtering.
pub fn run_pipeline(cfg: &RunConfig, ds: &CountDataset, groups: Option<&[String]>) -> Result<PipelineResult> {
    let dir = cfg.output.dir.as_path();
    std::fs::create_dir_all(dir)?;
    let seeds = Seeds::derive(cfg.seed);
    let mut stage = Stage {
        dir,
        manifest: Manifest {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: cfg.clone(),
            seeds: seeds.clone(),
            input_rows: ds.nrows(),
            input_columns: ds.ncols(),
            kept_columns: Vec::new(),
            covariates: Vec::new(),
            artifacts: Vec::new(),
            completed: false,
            failed_stage: None,
            error: None,
        },
    };

    stage.run("validate", |_| cfg.validate())?;
    let data = stage.run("prepare", |m| {
        let out = prepare_dataset(cfg, ds, groups)?;
        m.kept_columns = out.column_names().to_vec();
        m.covariates = out.covariate_names().to_vec();
        Ok(out)
    })?;

    let x = data.design(true);
    let fits = stage.run("marginals", |_| fit_columns(&data, &x, &cfg.marginals, seeds.marginals))?;
    let names = data.column_names().to_vec();
    stage.write(MARGINAL_SUMMARY, &format_marginal_summary(&names, &fits))?;
    stage.write(BIC_TABLE, &format_bic_table(&names, &fits))?;

    let table = stage.run("intervals", |_| {
        let marginals: Vec<_> = fits.iter().map(|f| f.marginal.clone()).collect();
        IntervalTable::build(&data, &x, &marginals)
    })?;
    let structure = stage.run("chains", |_| learn_structure(cfg, &table, seeds.chains))?;
    for (file, contents) in structure.artifacts(&names, cfg.output.cutoff)? {
        stage.write(file, &contents)?;
    }

    stage.manifest.completed = true;
    write_json(&dir.join(MANIFEST), &stage.manifest)?;
    Ok(PipelineResult {
        dataset: data,
        fits,
        structure,
        manifest: stage.manifest,
    })
}
