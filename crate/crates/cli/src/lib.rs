//! Library surface of the `sumfunc` experiment driver: configuration
//! parsing, the table cache, the run manifest, and the experiment drivers.
//! The binary in `main.rs` is a thin argument-and-exit-code shell over this.

pub mod cache;
pub mod config;
pub mod experiments;
pub mod manifest;

pub use cache::{cache_load, cache_path, cache_store, load_or_build, TableSource};
pub use config::{
    linear_t_grid, parse_config_text, parse_grid_spec, parse_t_grid_spec, parse_term_rule,
    ExperimentConfig, VALID_EXPERIMENTS,
};
pub use experiments::run_experiment;
pub use manifest::{float_cell, RunRecorder, MANIFEST_FILE};
