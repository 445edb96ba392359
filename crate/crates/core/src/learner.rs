//! The base-learner contract the patch-learning engine is written against.

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::data::LabeledSet;
use crate::error::Result;
use crate::partition::PatchBox;

/// A trained regression model.
pub trait Regressor {
    /// Deterministic prediction for one input vector.
    fn predict(&self, x: &[f64]) -> f64;

    /// First-order rule partitions of the model's input domain, when the model
    /// has the rule structure to define them.
    fn rule_partitions(&self) -> Option<Result<Vec<PatchBox>>> {
        None
    }
}

/// Something that fits a [`Regressor`] to labeled data.
///
/// A learner may refuse to fit, e.g. when a patch holds too few examples;
/// it signals that with an error for which [`crate::Error::is_untrainable`]
/// is true.
pub trait Learner {
    type Model: Regressor;

    fn fit(&self, data: &LabeledSet) -> Result<Self::Model>;

    /// Fewest examples this learner should be trained on for `dims` inputs.
    fn min_examples(&self, dims: usize) -> usize;
}

impl<R: Regressor + ?Sized> Regressor for Box<R> {
    fn predict(&self, x: &[f64]) -> f64 {
        (**self).predict(x)
    }

    fn rule_partitions(&self) -> Option<Result<Vec<PatchBox>>> {
        (**self).rule_partitions()
    }
}

impl<L: Learner + ?Sized> Learner for &L {
    type Model = L::Model;

    fn fit(&self, data: &LabeledSet) -> Result<Self::Model> {
        (**self).fit(data)
    }

    fn min_examples(&self, dims: usize) -> usize {
        (**self).min_examples(dims)
    }
}
