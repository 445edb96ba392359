use alloc::string::String;
use alloc::vec::Vec;

/// Errors raised by the core algorithms.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("input has {got} components, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("no rule fires for input {0:?}")]
    UncoveredInput(Vec<f64>),
    #[error("example {index} is not covered by any rule")]
    UncoveredExample { index: usize },
    #[error("input dimension {dim} has zero-width range [{value}, {value}]")]
    DegenerateRange { dim: usize, value: f64 },
    #[error("membership functions leave [{lo}, {hi}] uncovered")]
    UncoveredRange { lo: f64, hi: f64 },
    #[error("empty data set")]
    EmptyData,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("learner cannot be trained: {0}")]
    Untrainable(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("series too short: need {needed} points, have {have}")]
    SeriesTooShort { needed: usize, have: usize },
}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    /// Whether the error means "this learner cannot be fit on this data" as
    /// opposed to a programming or configuration error.
    pub fn is_untrainable(&self) -> bool {
        matches!(
            self,
            Error::Untrainable(_)
                | Error::DegenerateRange { .. }
                | Error::UncoveredExample { .. }
                | Error::EmptyData
        )
    }
}
