//! Experiment harness: configured runs, comparator, bound checks, CSV traces
//! and horizon sweeps.

pub mod cli;
pub mod comparator;
pub mod config;
pub mod error;
pub mod output;
pub mod run;
pub mod sweep;
pub mod verify;

pub use config::ExperimentConfig;
pub use error::{HarnessError, Result};
pub use run::{run_experiment, RunData, RunOutput};
pub use verify::{verify_bounds, Check, Report};
