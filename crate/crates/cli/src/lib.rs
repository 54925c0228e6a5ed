//! Experiment runner for `augustin-core`.
//!
//! A run reads an [`ExperimentConfig`], writes tidy CSV into the output directory and
//! finishes with `manifest.json`, which echoes the config and lists every file with a
//! content hash. With timing disabled, identical configs give byte-identical outputs.

// `!(x > 0.0)` is the NaN-rejecting test throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod experiments;
mod manifest;

pub use config::{validate_config, ExperimentConfig, Overrides, ScheduleKind, Task};
pub use experiments::{run_experiment, run_oracle_cache, RunError, RunOptions, RunOutcome};
pub use manifest::{content_hash, FileEntry, Manifest, MANIFEST_FILE};
