//! Experiment harness for `patchlearn-core`: benchmark runs, reports, model
//! files and CSV data exchange. The `patchlearn` binary wraps these.

pub mod dataio;
pub mod error;
pub mod experiment;
pub mod modelfile;
pub mod plot;
pub mod report;

pub use patchlearn_core::metrics::{metrics, Metrics};

pub use error::{HarnessError, Result};
pub use experiment::{run_experiment, sweep, ExperimentConfig, ExperimentRun};
pub use modelfile::{load_model, save_model, ModelFile, SavedModel};
pub use report::{ExperimentReport, Format};
