//! C interface to the dwgm engine.
//!
//! Every fallible call returns a `DwgmStatus`; on failure the message is
//! available from `dwgm_last_error_message` on the same thread. Handles are
//! opaque and must be released with their matching `_free` function.

use dwgm::bdmcmc::ChainConfig;
use dwgm::error::Error;
use dwgm::graph::Graph;
use dwgm::io::{learn_structure, RunConfig};
use dwgm::latent::IntervalTable;
use dwgm::marginals::{self, fit_columns, DwParams, FitSettings, MarginalChoice, MhConfig};
use dwgm::rng::split_seed;
use dwgm::sim::roc_auc;
use dwgm::CountDataset;
use nalgebra::DMatrix;
use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DwgmStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Shape = 3,
    Parse = 4,
    Numeric = 5,
    Config = 6,
    Input = 7,
    Io = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DwgmMarginal {
    Dw = 0,
    Zidw = 1,
    AutoBic = 2,
    Empirical = 3,
}

/// Settings for `dwgm_learn_structure`; fill with `dwgm_options_default` first.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct DwgmOptions {
    pub seed: u64,
    pub chains: usize,
    pub iterations: usize,
    pub burn_in_fraction: f64,
    pub refresh_rate: f64,
    pub link_prob: f64,
    pub b: f64,
    pub d_scale: f64,
    pub mh_iterations: usize,
    pub marginal: DwgmMarginal,
    /// Nonzero: covariates enter the marginal regressions.
    pub use_covariates: u8,
}

/// Counts plus optional covariates.
pub struct DwgmDataset(CountDataset);

/// Merged structure-learning output.
pub struct DwgmResult {
    p: usize,
    edge_probabilities: DMatrix<f64>,
    partial_correlations: DMatrix<f64>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> DwgmStatus {
    match e {
        Error::Domain(_) => DwgmStatus::Domain,
        Error::Shape(_) => DwgmStatus::Shape,
        Error::Parse { .. } | Error::Json(_) => DwgmStatus::Parse,
        Error::Config(_) => DwgmStatus::Config,
        Error::Input(_) | Error::EmptySelection | Error::DegenerateClasses(_) => DwgmStatus::Input,
        Error::Io(_) => DwgmStatus::Io,
        _ => DwgmStatus::Numeric,
    }
}

fn guard(f: impl FnOnce() -> Result<(), Error>) -> DwgmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            DwgmStatus::Ok
        }
        Ok(Err(e)) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic");
            DwgmStatus::Panic
        }
    }
}

fn null_error(what: &str) -> Error {
    Error::Input(format!("null pointer: {what}"))
}

macro_rules! nonnull {
    ($ptr:expr, $what:expr) => {
        if $ptr.is_null() {
            set_error(concat!("null pointer: ", $what));
            return DwgmStatus::NullPointer;
        }
    };
}

/// Message for the most recent failure on this thread; empty after a success.
/// The pointer stays valid until the next dwgm call on this thread.
#[no_mangle]
pub extern "C" fn dwgm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// `P(Y <= y)`; `y = -1` gives 0.
#[no_mangle]
pub extern "C" fn dwgm_dw_cdf(y: i64, q: f64, beta: f64, out: *mut f64) -> DwgmStatus {
    nonnull!(out, "out");
    guard(|| {
        let v = marginals::dw_cdf(y, &DwParams::new(q, beta)?)?;
        unsafe { *out = v };
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn dwgm_dw_pmf(y: i64, q: f64, beta: f64, out: *mut f64) -> DwgmStatus {
    nonnull!(out, "out");
    guard(|| {
        let v = marginals::dw_pmf(y, &DwParams::new(q, beta)?)?;
        unsafe { *out = v };
        Ok(())
    })
}

/// Smallest `y` with `cdf(y) >= tau`.
#[no_mangle]
pub extern "C" fn dwgm_dw_quantile(tau: f64, q: f64, beta: f64, out: *mut u64) -> DwgmStatus {
    nonnull!(out, "out");
    guard(|| {
        let v = marginals::dw_quantile(tau, &DwParams::new(q, beta)?)?;
        unsafe { *out = v };
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn dwgm_zidw_pmf(y: i64, q: f64, beta: f64, pi: f64, out: *mut f64) -> DwgmStatus {
    nonnull!(out, "out");
    guard(|| {
        let v = marginals::zidw_pmf(y, &DwParams::new(q, beta)?, pi)?;
        unsafe { *out = v };
        Ok(())
    })
}

/// Build a dataset from `n x p` row-major counts and `n x d` row-major
/// covariates (`covariates` may be null when `d == 0`). Returns null on
/// failure.
#[no_mangle]
pub extern "C" fn dwgm_dataset_new(
    counts: *const u64,
    n: usize,
    p: usize,
    covariates: *const f64,
    d: usize,
) -> *mut DwgmDataset {
    let mut out = ptr::null_mut();
    let status = guard(|| {
        if counts.is_null() && n * p > 0 {
            return Err(null_error("counts"));
        }
        if covariates.is_null() && n * d > 0 {
            return Err(null_error("covariates"));
        }
        let rows = if n * p == 0 { &[][..] } else { unsafe { std::slice::from_raw_parts(counts, n * p) } };
        let mut col_major = vec![0u64; n * p];
        for i in 0..n {
            for j in 0..p {
                col_major[j * n + i] = rows[i * p + j];
            }
        }
        let mut ds = CountDataset::from_columns(n, p, col_major)?;
        if d > 0 {
            let cov = unsafe { std::slice::from_raw_parts(covariates, n * d) };
            for c in 0..d {
                let col: Vec<f64> = (0..n).map(|i| cov[i * d + c]).collect();
                ds.push_covariate(&format!("x{c}"), &col)?;
            }
        }
        out = Box::into_raw(Box::new(DwgmDataset(ds)));
        Ok(())
    });
    if status == DwgmStatus::Ok {
        out
    } else {
        ptr::null_mut()
    }
}

#[no_mangle]
pub extern "C" fn dwgm_dataset_free(ds: *mut DwgmDataset) {
    if !ds.is_null() {
        drop(unsafe { Box::from_raw(ds) });
    }
}

#[no_mangle]
pub extern "C" fn dwgm_options_default(out: *mut DwgmOptions) -> DwgmStatus {
    nonnull!(out, "out");
    let chain = ChainConfig::default();
    let run = RunConfig::default();
    unsafe {
        *out = DwgmOptions {
            seed: run.seed,
            chains: run.chains,
            iterations: chain.iterations,
            burn_in_fraction: chain.burn_in_fraction,
            refresh_rate: chain.refresh_rate,
            link_prob: chain.link_prob,
            b: chain.b,
            d_scale: chain.d_scale,
            mh_iterations: MhConfig::default().iterations,
            marginal: DwgmMarginal::Dw,
            use_covariates: 1,
        }
    };
    DwgmStatus::Ok
}

fn run_config(o: &DwgmOptions) -> RunConfig {
    let choice = match o.marginal {
        DwgmMarginal::Dw => MarginalChoice::Dw,
        DwgmMarginal::Zidw => MarginalChoice::Zidw,
        DwgmMarginal::AutoBic => MarginalChoice::AutoBic,
        DwgmMarginal::Empirical => MarginalChoice::Empirical,
    };
    RunConfig {
        seed: o.seed,
        chains: o.chains,
        marginals: FitSettings {
            choice,
            compare_nb: false,
            mh: MhConfig { iterations: o.mh_iterations, ..MhConfig::default() },
            ..FitSettings::default()
        },
        chain: ChainConfig {
            iterations: o.iterations,
            burn_in_fraction: o.burn_in_fraction,
            refresh_rate: o.refresh_rate,
            link_prob: o.link_prob,
            b: o.b,
            d_scale: o.d_scale,
            ..ChainConfig::default()
        },
        ..RunConfig::default()
    }
}

/// Fit marginals, run the chains and store the merged result in `*out`.
#[no_mangle]
pub extern "C" fn dwgm_learn_structure(
    ds: *const DwgmDataset,
    options: *const DwgmOptions,
    out: *mut *mut DwgmResult,
) -> DwgmStatus {
    nonnull!(ds, "dataset");
    nonnull!(options, "options");
    nonnull!(out, "out");
    guard(|| {
        let ds = unsafe { &(*ds).0 };
        let cfg = run_config(unsafe { &*options });
        cfg.validate()?;
        let x = ds.design(unsafe { (*options).use_covariates } != 0);
        let fits = fit_columns(ds, &x, &cfg.marginals, split_seed(cfg.seed, 0))?;
        let cols: Vec<_> = fits.into_iter().map(|f| f.marginal).collect();
        let table = IntervalTable::build(ds, &x, &cols)?;
        let r = learn_structure(&cfg, &table, split_seed(cfg.seed, 1))?;
        let result = DwgmResult {
            p: ds.ncols(),
            edge_probabilities: r.edge_probabilities,
            partial_correlations: r.partial_correlations,
        };
        unsafe { *out = Box::into_raw(Box::new(result)) };
        Ok(())
    })
}

/// Number of nodes; 0 for a null handle.
#[no_mangle]
pub extern "C" fn dwgm_result_nodes(r: *const DwgmResult) -> usize {
    if r.is_null() {
        0
    } else {
        unsafe { (*r).p }
    }
}

fn copy_matrix(m: &DMatrix<f64>, out: *mut f64, len: usize) -> Result<(), Error> {
    let p = m.nrows();
    if len < p * p {
        return Err(Error::Shape(format!("buffer holds {len} values, need {}", p * p)));
    }
    let buf = unsafe { std::slice::from_raw_parts_mut(out, p * p) };
    for i in 0..p {
        for j in 0..p {
            buf[i * p + j] = m[(i, j)];
        }
    }
    Ok(())
}

/// Copy the `p x p` edge-probability matrix, row-major, into `out`.
#[no_mangle]
pub extern "C" fn dwgm_result_edge_probabilities(r: *const DwgmResult, out: *mut f64, len: usize) -> DwgmStatus {
    nonnull!(r, "result");
    nonnull!(out, "out");
    guard(|| copy_matrix(unsafe { &(*r).edge_probabilities }, out, len))
}

/// Copy the posterior-mean partial-correlation matrix, row-major, into `out`.
#[no_mangle]
pub extern "C" fn dwgm_result_partial_correlations(r: *const DwgmResult, out: *mut f64, len: usize) -> DwgmStatus {
    nonnull!(r, "result");
    nonnull!(out, "out");
    guard(|| copy_matrix(unsafe { &(*r).partial_correlations }, out, len))
}

#[no_mangle]
pub extern "C" fn dwgm_result_free(r: *mut DwgmResult) {
    if !r.is_null() {
        drop(unsafe { Box::from_raw(r) });
    }
}

/// Area under the ROC curve of `probs` (row-major `p x p`) against the upper
/// triangle of `truth` (row-major 0/1 adjacency).
#[no_mangle]
pub extern "C" fn dwgm_auc(probs: *const f64, truth: *const u8, p: usize, out: *mut f64) -> DwgmStatus {
    nonnull!(probs, "probs");
    nonnull!(truth, "truth");
    nonnull!(out, "out");
    guard(|| {
        let pr = unsafe { std::slice::from_raw_parts(probs, p * p) };
        let tr = unsafe { std::slice::from_raw_parts(truth, p * p) };
        let m = DMatrix::from_row_slice(p, p, pr);
        let mut g = Graph::empty(p);
        for i in 0..p {
            for j in i + 1..p {
                if tr[i * p + j] != 0 {
                    g.set_edge(i, j, true);
                }
            }
        }
        let auc = roc_auc(&m, &g, "ffi")?.auc;
        unsafe { *out = auc };
        Ok(())
    })
}
