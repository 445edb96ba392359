//! Bagging and least-squares boosting.

use alloc::vec::Vec;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tree::{tree_fit, RegressionTree, TreeParams};
use crate::data::LabeledSet;
use crate::error::{Error, Result};
use crate::learner::{Learner, Regressor};

/// Draws allowed per bagging member before it is dropped.
const MAX_MEMBER_ATTEMPTS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Combiner {
    Average,
    /// `initial + shrinkage · Σ member(x)`
    BoostedSum { initial: f64, shrinkage: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleModel<M> {
    pub members: Vec<M>,
    pub combiner: Combiner,
}

impl<M: Regressor> Regressor for EnsembleModel<M> {
    fn predict(&self, x: &[f64]) -> f64 {
        match self.combiner {
            Combiner::Average => {
                self.members.iter().map(|m| m.predict(x)).sum::<f64>() / self.members.len() as f64
            }
            Combiner::BoostedSum { initial, shrinkage } => {
                initial + shrinkage * self.members.iter().map(|m| m.predict(x)).sum::<f64>()
            }
        }
    }
}

impl<M> EnsembleModel<M> {
    pub fn map_members<N>(self, f: impl FnMut(M) -> N) -> EnsembleModel<N> {
        EnsembleModel { members: self.members.into_iter().map(f).collect(), combiner: self.combiner }
    }

    /// The first `n` members with the same combiner (boosting prefix).
    pub fn truncated(&self, n: usize) -> EnsembleModel<M>
    where
        M: Clone,
    {
        EnsembleModel { members: self.members[..n.min(self.members.len())].to_vec(), combiner: self.combiner }
    }
}

/// How bagging resamples the training set.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Resampling {
    /// `N` draws with replacement.
    #[default]
    Bootstrap,
    /// Every member sees the full training set unchanged.
    Identity,
}

/// `b` members, each fit on a resample of `data`, combined by averaging.
///
/// Member `i` draws from its own ChaCha8 stream seeded from the `i`-th output
/// of a ChaCha8 stream seeded with `seed`. A member whose fit reports an
/// untrainable resample is redrawn; after five failed draws it is dropped.
pub fn bagging_train<L: Learner>(
    data: &LabeledSet,
    b: usize,
    learner: &L,
    seed: u64,
    resampling: Resampling,
) -> Result<EnsembleModel<L::Model>> {
    if b == 0 {
        return Err(Error::Config("bagging needs at least one member".into()));
    }
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    let mut seeder = ChaCha8Rng::seed_from_u64(seed);
    let n = data.len();
    let mut members = Vec::with_capacity(b);
    let mut last_err = None;
    for _ in 0..b {
        let mut rng = ChaCha8Rng::seed_from_u64(seeder.next_u64());
        for _ in 0..MAX_MEMBER_ATTEMPTS {
            let sample = match resampling {
                Resampling::Bootstrap => {
                    let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
                    data.select(&idx)
                }
                Resampling::Identity => data.clone(),
            };
            match learner.fit(&sample) {
                Ok(m) => {
                    members.push(m);
                    break;
                }
                Err(e) if e.is_untrainable() => last_err = Some(e),
                Err(e) => return Err(e),
            }
        }
    }
    if members.is_empty() {
        return Err(last_err.unwrap_or_else(|| Error::Untrainable("no bagging member could be trained".into())));
    }
    Ok(EnsembleModel { members, combiner: Combiner::Average })
}

/// Gradient boosting with squared loss: `F_0 = mean(y)`, then each round fits
/// a tree to the residuals `y − F_{t−1}(x)` and adds it scaled by `shrinkage`.
pub fn lsboost_train(
    data: &LabeledSet,
    rounds: usize,
    shrinkage: f64,
    params: TreeParams,
) -> Result<EnsembleModel<RegressionTree>> {
    if rounds == 0 {
        return Err(Error::Config("boosting needs at least one round".into()));
    }
    if !(0.0..=1.0).contains(&shrinkage) {
        return Err(Error::Config("shrinkage must lie in [0, 1]".into()));
    }
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    let initial = data.targets().iter().sum::<f64>() / data.len() as f64;
    let mut current = alloc::vec![initial; data.len()];
    let mut members = Vec::with_capacity(rounds);
    for _ in 0..rounds {
        let residuals: Vec<f64> = data.targets().iter().zip(&current).map(|(y, f)| y - f).collect();
        let work = LabeledSet::new(data.dims(), data.inputs().to_vec(), residuals)?;
        let tree = tree_fit(&work, params.max_depth, params.min_leaf)?;
        for (i, (x, _)) in data.iter().enumerate() {
            current[i] += shrinkage * tree.predict(x);
        }
        members.push(tree);
    }
    Ok(EnsembleModel { members, combiner: Combiner::BoostedSum { initial, shrinkage } })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaggingLearner<L> {
    pub base: L,
    pub members: usize,
    pub seed: u64,
    pub resampling: Resampling,
}

impl<L: Learner> Learner for BaggingLearner<L> {
    type Model = EnsembleModel<L::Model>;

    fn fit(&self, data: &LabeledSet) -> Result<Self::Model> {
        bagging_train(data, self.members, &self.base, self.seed, self.resampling)
    }

    fn min_examples(&self, dims: usize) -> usize {
        self.base.min_examples(dims)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LsBoostLearner {
    pub rounds: usize,
    pub shrinkage: f64,
    pub tree: TreeParams,
}

impl Default for LsBoostLearner {
    fn default() -> Self {
        Self { rounds: 1, shrinkage: 0.1, tree: TreeParams::default() }
    }
}

impl Learner for LsBoostLearner {
    type Model = EnsembleModel<RegressionTree>;

    fn fit(&self, data: &LabeledSet) -> Result<Self::Model> {
        lsboost_train(data, self.rounds, self.shrinkage, self.tree)
    }

    fn min_examples(&self, _dims: usize) -> usize {
        self.tree.min_leaf.max(1)
    }
}
