//! Comparison learners: polynomial regression, CART regression trees,
//! bagging and least-squares boosting.

pub mod ensemble;
pub mod poly;
pub mod tree;

pub use ensemble::{bagging_train, lsboost_train, BaggingLearner, Combiner, EnsembleModel, LsBoostLearner, Resampling};
pub use poly::{poly_fit, PolynomialLearner, PolynomialModel};
pub use tree::{tree_fit, RegressionTree, TreeLearner, TreeParams};
