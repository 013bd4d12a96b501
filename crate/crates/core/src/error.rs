use thiserror::Error;

/// Errors raised by the inference engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter outside its domain: {0}")]
    Domain(String),

    #[error("dimension mismatch: {0}")]
    Shape(String),

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("parse error: {message}")]
    Parse {
        message: String,
        /// Up to ten offending cells, formatted as `row R, column C: 'text'`.
        offenders: Vec<String>,
    },

    #[error("inconsistent latent interval: {0}")]
    Consistency(String),

    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("G-Wishart sampler did not converge after {iterations} sweeps (last change {last_change:.3e})")]
    SamplerConvergence { iterations: usize, last_change: f64 },

    #[error("all birth-death rates are zero; the chain cannot move")]
    ChainStuck,

    #[error("chain initialization failed: {0}")]
    Initialization(String),

    #[error("no columns passed the filter")]
    EmptySelection,

    #[error("normalization failed: {0}")]
    Normalization(String),

    #[error("degenerate classes: {0}")]
    DegenerateClasses(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Process exit code for the CLI: 2 parse, 3 numeric, 4 config.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::Io(_) | Error::Json(_) => 2,
            Error::Config(_) => 4,
            _ => 3,
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
}
