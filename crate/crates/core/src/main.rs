use clap::{Args, Parser, Subcommand, ValueEnum};
use dwgm::error::{Error, Result};
use dwgm::graph::Graph;
use dwgm::io::pipeline::{self, read_groups, Seeds, StructureResult};
use dwgm::io::{attach_covariates, parse_matrix, read_count_table, write_count_table, RunConfig};
use dwgm::latent::IntervalTable;
use dwgm::marginals::{fit_columns, ColumnFit, ColumnMarginal, MarginalChoice};
use dwgm::rng::stream;
use dwgm::sim::{generate_counts, roc_auc, run_benchmark, sample_random_graph, BenchmarkSpec, MarginalPreset, ReportRow, SimulationSpec};
use dwgm::CountDataset;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use toml::{Table, Value};

const THREADS_ENV: &str = "DWGM_THREADS";
const MARGINALS_JSON: &str = "marginals.json";

#[derive(Parser)]
#[command(name = "dwgm", version, about = "Graphical models for count data with discrete Weibull marginals")]
struct Cli {
    /// TOML run configuration; its values win over command-line flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Fit per-column marginal regressions and write summaries.
    FitMarginals(Flags),
    /// Learn the graph from counts and previously fitted marginals.
    LearnStructure {
        #[command(flatten)]
        flags: Flags,
        /// marginals.json written by fit-marginals (not needed for empirical marginals).
        #[arg(long)]
        marginals: Option<PathBuf>,
    },
    /// Simulate counts from a random graph.
    Simulate(Flags),
    /// Score edge probabilities against a true graph, or run a benchmark study.
    Evaluate(Flags),
    /// Filter, normalize, fit marginals, learn structure and write every artifact.
    Pipeline(Flags),
}

#[derive(Clone, Copy, ValueEnum)]
enum ChoiceArg {
    Dw,
    Zidw,
    AutoBic,
    Empirical,
}

impl ChoiceArg {
    fn choice(self) -> MarginalChoice {
        match self {
            ChoiceArg::Dw => MarginalChoice::Dw,
            ChoiceArg::Zidw => MarginalChoice::Zidw,
            ChoiceArg::AutoBic => MarginalChoice::AutoBic,
            ChoiceArg::Empirical => MarginalChoice::Empirical,
        }
    }
}

/// Every flag maps to one key of the run configuration.
#[derive(Args, Default)]
struct Flags {
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    counts: Option<PathBuf>,
    #[arg(long)]
    covariates: Option<PathBuf>,
    /// One group label per row, for group-wise filtering.
    #[arg(long)]
    groups: Option<PathBuf>,
    #[arg(long)]
    min_prevalence: Option<f64>,
    #[arg(long)]
    min_distinct: Option<usize>,
    /// Add the log library-size factor as a covariate.
    #[arg(long)]
    library_size: Option<bool>,
    #[arg(long, value_enum)]
    marginal: Option<ChoiceArg>,
    #[arg(long)]
    constant_beta: Option<bool>,
    #[arg(long)]
    compare_nb: Option<bool>,
    #[arg(long)]
    mh_iterations: Option<usize>,
    #[arg(long)]
    mh_burn_in: Option<f64>,
    #[arg(long)]
    hpd_level: Option<f64>,
    #[arg(long)]
    chains: Option<usize>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    burn_in: Option<f64>,
    #[arg(long)]
    thin: Option<usize>,
    #[arg(long)]
    sweeps: Option<usize>,
    #[arg(long)]
    refresh_rate: Option<f64>,
    #[arg(long)]
    link_prob: Option<f64>,
    /// G-Wishart degrees of freedom.
    #[arg(long)]
    b: Option<f64>,
    /// G-Wishart scale `D = d_scale * I`.
    #[arg(long)]
    d_scale: Option<f64>,
    /// Starting graph as `i j` lines.
    #[arg(long)]
    initial_graph: Option<PathBuf>,
    #[arg(long)]
    cutoff: Option<f64>,
    #[arg(long)]
    checkpoint: Option<bool>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    sparsity: Option<f64>,
    #[arg(long)]
    setting: Option<u8>,
    #[arg(long)]
    theta1: Option<f64>,
    #[arg(long)]
    covariate_prob: Option<f64>,
    /// Edge-probability matrix to score.
    #[arg(long)]
    probabilities: Option<PathBuf>,
    /// True graph as `i j` lines.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Benchmark description (`key = value` lines).
    #[arg(long)]
    benchmark: Option<PathBuf>,
}

fn toml_value<T: Serialize>(v: &T) -> Value {
    Value::try_from(v).expect("flag values serialize")
}

fn same_value(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Integer(x), Value::Float(y)) | (Value::Float(y), Value::Integer(x)) => *x as f64 == *y,
        _ => a == b,
    }
}

fn edges_value(path: &Path, p_hint: usize) -> Result<Value> {
    let g = Graph::parse_edge_list(p_hint, &std::fs::read_to_string(path)?)?;
    Ok(toml_value(&g.edges()))
}

impl Flags {
    /// `(config key path, flag name, value)` for every flag that was given.
    fn entries(&self) -> Result<Vec<(&'static [&'static str], &'static str, Value)>> {
        let mut e: Vec<(&'static [&'static str], &'static str, Value)> = Vec::new();
        macro_rules! put {
            ($field:ident, $path:expr, $flag:expr) => {
                if let Some(v) = &self.$field {
                    e.push(($path, $flag, toml_value(v)));
                }
            };
        }
        put!(seed, &["seed"], "--seed");
        put!(out, &["output", "dir"], "--out");
        put!(counts, &["input", "counts"], "--counts");
        put!(covariates, &["input", "covariates"], "--covariates");
        put!(groups, &["input", "groups"], "--groups");
        put!(min_prevalence, &["input", "min_prevalence"], "--min-prevalence");
        put!(min_distinct, &["input", "min_distinct"], "--min-distinct");
        put!(library_size, &["input", "library_size_covariate"], "--library-size");
        if let Some(c) = self.marginal {
            e.push((&["marginals", "choice"], "--marginal", toml_value(&c.choice())));
        }
        put!(constant_beta, &["marginals", "constant_beta"], "--constant-beta");
        put!(compare_nb, &["marginals", "compare_nb"], "--compare-nb");
        put!(mh_iterations, &["marginals", "mh", "iterations"], "--mh-iterations");
        put!(mh_burn_in, &["marginals", "mh", "burn_in_fraction"], "--mh-burn-in");
        put!(hpd_level, &["marginals", "hpd_level"], "--hpd-level");
        put!(chains, &["chains"], "--chains");
        put!(iterations, &["chain", "iterations"], "--iterations");
        put!(burn_in, &["chain", "burn_in_fraction"], "--burn-in");
        put!(thin, &["chain", "thin"], "--thin");
        put!(sweeps, &["chain", "sweeps_per_iteration"], "--sweeps");
        put!(refresh_rate, &["chain", "refresh_rate"], "--refresh-rate");
        put!(link_prob, &["chain", "link_prob"], "--link-prob");
        put!(b, &["chain", "b"], "--b");
        put!(d_scale, &["chain", "d_scale"], "--d-scale");
        if let Some(path) = &self.initial_graph {
            e.push((&["chain", "initial_edges"], "--initial-graph", edges_value(path, usize::MAX)?));
        }
        put!(cutoff, &["output", "cutoff"], "--cutoff");
        put!(checkpoint, &["output", "checkpoint"], "--checkpoint");
        put!(p, &["simulate", "p"], "--p");
        put!(n, &["simulate", "n"], "--n");
        put!(sparsity, &["simulate", "sparsity"], "--sparsity");
        put!(setting, &["simulate", "setting"], "--setting");
        put!(theta1, &["simulate", "theta1"], "--theta1");
        put!(covariate_prob, &["simulate", "covariate_prob"], "--covariate-prob");
        put!(probabilities, &["evaluate", "probabilities"], "--probabilities");
        put!(truth, &["evaluate", "truth"], "--truth");
        put!(benchmark, &["evaluate", "benchmark"], "--benchmark");
        Ok(e)
    }
}

/// Lay command-line flags under the config file; keys present in the file win.
fn resolve_config(file: Option<&Path>, flags: &Flags) -> Result<RunConfig> {
    let mut table: Table = match file {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?
        }
        None => Table::new(),
    };
    for (path, flag, value) in flags.entries()? {
        let (last, parents) = path.split_last().expect("non-empty key path");
        let mut node = &mut table;
        for key in parents {
            node = match node.entry(key.to_string()).or_insert_with(|| Value::Table(Table::new())) {
                Value::Table(t) => t,
                _ => return Err(Error::Config(format!("'{key}' must be a table"))),
            };
        }
        match node.get(*last) {
            Some(existing) if !same_value(existing, &value) => {
                eprintln!("warning: {flag} ignored; config file sets {} = {existing}", path.join("."));
            }
            Some(_) => {}
            None => {
                node.insert(last.to_string(), value);
            }
        }
    }
    RunConfig::from_toml(&toml::to_string(&table).map_err(|e| Error::Config(e.to_string()))?)
}

fn load_input(cfg: &RunConfig) -> Result<(CountDataset, Option<Vec<String>>)> {
    let path = cfg.input.counts.as_ref().ok_or_else(|| Error::Config("no count table given (--counts)".into()))?;
    let mut ds = read_count_table(path, None)?;
    if let Some(cov) = &cfg.input.covariates {
        attach_covariates(&mut ds, &std::fs::read_to_string(cov)?, None)?;
    }
    let groups = cfg.input.groups.as_deref().map(read_groups).transpose()?;
    Ok((ds, groups))
}

#[derive(Serialize, Deserialize)]
struct SavedMarginals {
    columns: Vec<String>,
    covariates: Vec<String>,
    fits: Vec<ColumnFit>,
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    std::fs::write(dir.join(name), contents)?;
    log::info!("wrote {}", dir.join(name).display());
    Ok(())
}

fn fit_marginals(cfg: &RunConfig) -> Result<()> {
    let (raw, groups) = load_input(cfg)?;
    let ds = pipeline::prepare_dataset(cfg, &raw, groups.as_deref())?;
    let fits = fit_columns(&ds, &ds.design(true), &cfg.marginals, Seeds::derive(cfg.seed).marginals)?;
    let dir = &cfg.output.dir;
    std::fs::create_dir_all(dir)?;
    let names = ds.column_names().to_vec();
    write_file(dir, pipeline::MARGINAL_SUMMARY, &pipeline::format_marginal_summary(&names, &fits))?;
    write_file(dir, pipeline::BIC_TABLE, &pipeline::format_bic_table(&names, &fits))?;
    let saved = SavedMarginals { columns: names, covariates: ds.covariate_names().to_vec(), fits };
    write_file(dir, MARGINALS_JSON, &(serde_json::to_string_pretty(&saved)? + "\n"))
}

fn write_structure(cfg: &RunConfig, names: &[String], result: &StructureResult) -> Result<()> {
    std::fs::create_dir_all(&cfg.output.dir)?;
    for (name, contents) in result.artifacts(names, cfg.output.cutoff)? {
        write_file(&cfg.output.dir, name, &contents)?;
    }
    Ok(())
}

fn learn(cfg: &RunConfig, marginals: Option<&Path>) -> Result<()> {
    let (raw, groups) = load_input(cfg)?;
    let ds = pipeline::prepare_dataset(cfg, &raw, groups.as_deref())?;
    let cols: Vec<ColumnMarginal> = match marginals {
        Some(path) => {
            let saved: SavedMarginals = serde_json::from_str(&std::fs::read_to_string(path)?)?;
            if saved.columns != ds.column_names() || saved.covariates != ds.covariate_names() {
                return Err(Error::Input("marginals file was fitted on different columns or covariates".into()));
            }
            saved.fits.into_iter().map(|f| f.marginal).collect()
        }
        None if cfg.marginals.choice == MarginalChoice::Empirical => vec![ColumnMarginal::Empirical; ds.ncols()],
        None => return Err(Error::Config("learn-structure needs --marginals unless the marginal is empirical".into())),
    };
    let table = IntervalTable::build(&ds, &ds.design(true), &cols)?;
    let result = pipeline::learn_structure(cfg, &table, Seeds::derive(cfg.seed).chains)?;
    write_structure(cfg, ds.column_names(), &result)
}

fn simulate(cfg: &RunConfig) -> Result<()> {
    let s = &cfg.simulate;
    let spec = SimulationSpec {
        p: s.p,
        n: s.n,
        sparsity: s.sparsity,
        marginal: MarginalPreset::setting(s.setting, s.theta1)?,
        covariate_prob: s.covariate_prob,
        seed: cfg.seed,
    };
    spec.validate()?;
    let mut rng = stream(cfg.seed, 0);
    let graph = sample_random_graph(s.p, s.sparsity, &mut rng)?;
    let data = generate_counts(graph, &spec, &mut rng)?;
    let dir = &cfg.output.dir;
    std::fs::create_dir_all(dir)?;
    write_count_table(&dir.join("counts.tsv"), &data.dataset)?;
    let mut cov = String::from("id\tx\n");
    for (i, id) in data.dataset.row_ids().iter().enumerate() {
        let _ = writeln!(cov, "{id}\t{}", data.dataset.covariate(i, 0));
    }
    write_file(dir, "covariates.tsv", &cov)?;
    write_file(dir, "graph.txt", &data.graph.to_edge_list())?;
    write_file(dir, "precision.tsv", &dwgm::io::format_matrix(data.dataset.column_names(), &data.k))
}

fn evaluate(cfg: &RunConfig) -> Result<()> {
    let ev = &cfg.evaluate;
    if let Some(path) = &ev.benchmark {
        let spec = BenchmarkSpec::parse(&std::fs::read_to_string(path)?)?;
        let outcome = run_benchmark(&spec)?;
        let mut report = format!("{}\n", ReportRow::HEADER);
        for row in &outcome.rows {
            report += &row.to_tsv();
            report.push('\n');
        }
        std::fs::create_dir_all(&cfg.output.dir)?;
        write_file(&cfg.output.dir, "benchmark.tsv", &report)?;
        write_file(&cfg.output.dir, "benchmark_summary.json", &(serde_json::to_string_pretty(&outcome.summaries)? + "\n"))?;
        for s in &outcome.summaries {
            println!(
                "setting {} theta1 {} {}: median AUC {:.3} (IQR {:.3}-{:.3}, n={})",
                s.setting, s.theta1, s.method.label(), s.median, s.q25, s.q75, s.count
            );
        }
        if outcome.failures > 0 {
            eprintln!("warning: {} replicate runs failed", outcome.failures);
        }
        return Ok(());
    }
    let (Some(probs), Some(truth)) = (&ev.probabilities, &ev.truth) else {
        return Err(Error::Config("evaluate needs --probabilities and --truth, or --benchmark".into()));
    };
    let (_, m) = parse_matrix(&std::fs::read_to_string(probs)?)?;
    let g = Graph::parse_edge_list(m.nrows(), &std::fs::read_to_string(truth)?)?;
    let report = roc_auc(&m, &g, "input")?;
    println!("AUC {:.6}", report.auc);
    let mut roc = String::from("fpr\ttpr\n");
    for (f, t) in &report.roc {
        let _ = writeln!(roc, "{f:.6}\t{t:.6}");
    }
    std::fs::create_dir_all(&cfg.output.dir)?;
    write_file(&cfg.output.dir, "roc.tsv", &roc)
}

fn run(cli: Cli) -> Result<()> {
    let config = cli.config.as_deref();
    match cli.verb {
        Verb::FitMarginals(f) => fit_marginals(&resolve_config(config, &f)?),
        Verb::LearnStructure { flags, marginals } => learn(&resolve_config(config, &flags)?, marginals.as_deref()),
        Verb::Simulate(f) => simulate(&resolve_config(config, &f)?),
        Verb::Evaluate(f) => evaluate(&resolve_config(config, &f)?),
        Verb::Pipeline(f) => {
            let cfg = resolve_config(config, &f)?;
            let (ds, groups) = load_input(&cfg)?;
            let out = pipeline::run_pipeline(&cfg, &ds, groups.as_deref())?;
            println!(
                "kept {} of {} columns; wrote {} artifacts to {}",
                out.dataset.ncols(),
                ds.ncols(),
                out.manifest.artifacts.len(),
                cfg.output.dir.display()
            );
            Ok(())
        }
    }
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.trim().parse().map_err(|_| Error::Config(format!("{THREADS_ENV} must be a positive integer, got '{v}'")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    Ok(())
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(e) = init_threads().and_then(|_| run(cli)) {
        eprintln!("error: {e}");
        if let Error::Parse { offenders, .. } = &e {
            for o in offenders {
                eprintln!("  {o}");
            }
        }
        std::process::exit(e.exit_code());
    }
}
