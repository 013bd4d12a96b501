//! Files, filtering, normalization, configuration and the end-to-end pipeline.

pub mod config;
pub mod normalize;
pub mod pipeline;
pub mod table;

pub use config::{EvaluateConfig, InputConfig, OutputConfig, RunConfig, SimulationConfig};
pub use normalize::{filter_otus, library_size_factors};
pub use pipeline::{learn_structure, prepare_dataset, run_pipeline, Manifest, PipelineResult, StructureResult};
pub use table::{
    attach_covariates, format_count_table, format_matrix, parse_count_table, parse_matrix, read_count_table,
    write_count_table, Delimiter,
};
