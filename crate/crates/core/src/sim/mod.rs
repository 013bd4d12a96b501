//! Simulation harness: synthetic data with a known graph and recovery scoring.

pub mod benchmark;
pub mod evaluate;
pub mod generate;

pub use benchmark::{run_benchmark, BenchmarkOutcome, BenchmarkSpec, Method, ReportRow};
pub use evaluate::{mann_whitney_auc, roc_auc, RecoveryReport};
pub use generate::{generate_counts, generate_with_precision, sample_random_graph, GeneratedData, MarginalPreset, SimulationSpec};
