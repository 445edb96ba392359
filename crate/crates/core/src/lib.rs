//! Patch learning for regression.
//!
//! A global model is trained on all data, the regions of its input domain that
//! contribute the most squared error are carved out as axis-aligned patches,
//! each patch gets its own local model, and the global model is refit on the
//! examples that fall outside every patch. Predictions are routed by patch
//! membership.
//!
//! Patch candidates come from the first-order rule partitions of a
//! grid-partitioned TSK fuzzy system with trapezoidal membership functions
//! ([`fuzzy`], [`anfis`], [`partition`]); the engine itself ([`patch`]) works
//! over any [`Learner`]. Comparison learners live in [`baselines`] and the
//! benchmark generators in [`datasets`].
//!
//! The crate is `no_std` and only needs `alloc`.
#![no_std]
#![forbid(unsafe_code)]
// `!(a < b)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod anfis;
pub mod baselines;
pub mod data;
pub mod datasets;
pub mod error;
pub mod fuzzy;
pub mod learner;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod partition;
pub mod patch;

pub use anfis::{AnfisConfig, AnfisLearner};
pub use data::LabeledSet;
pub use error::{Error, Result};
pub use fuzzy::{TrapezoidalMf, TskRule, TskSystem};
pub use learner::{Learner, Regressor};
pub use model::TrainedModel;
pub use partition::{PartitionGrid, PatchBox};
pub use patch::{CandidateSource, PlConfig, PlModel};
