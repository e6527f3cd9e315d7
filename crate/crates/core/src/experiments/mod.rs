//! Relative-error studies on the Ishigami and Duffing models.

pub mod cdf;
pub mod config;
pub mod models;
pub mod trials;

pub use cdf::{cdf_rows, cdf_svg, emit_cdf, emit_cdf_svg, write_cdf_csv, CdfRow};
pub use config::{ExperimentConfig, GridChoice, ModelSpec};
pub use models::{duffing_qoi, duffing_response, ishigami};
pub use trials::{run_prepared, run_trials, run_trials_with_threads, Experiment, TrialRecord, TrialReport};
