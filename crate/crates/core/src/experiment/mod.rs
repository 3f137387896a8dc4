//! Experiment tables: configuration, orchestration and output.

mod config;
mod runner;
mod table;

pub use config::{parse_allocation, ExperimentConfig, Method, ModelConfig, OutputFormat, PayoffConfig};
pub use runner::{
    estimate_cell, labelled_stream, lt_rotation, method_directions, price_cell, run_cells, run_experiment,
    CellResult, Model, PricingProblem,
};
pub use table::{parse_csv, to_csv, to_json, write_csv, ResultRow, CSV_HEADER};
