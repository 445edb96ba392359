use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] patchlearn_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("unsupported model file version {found} (this build reads version {supported})")]
    Version { found: u64, supported: u64 },
    #[error("not a model file: expected format tag {expected:?}, found {found:?}")]
    Format { expected: &'static str, found: String },
    #[error("malformed document at `{path}`: {message}")]
    Parse { path: String, message: String },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("malformed csv at line {line}: {message}")]
    CsvContent { line: u64, message: String },
    #[error("unknown experiment {0} (expected 1 to 5)")]
    UnknownExperiment(u32),
    #[error("invalid argument: {0}")]
    Argument(String),
}

impl HarnessError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        HarnessError::Io { path: path.into(), source }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
