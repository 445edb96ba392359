use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::baselines::{EnsembleModel, PolynomialModel, RegressionTree};
use crate::error::Result;
use crate::fuzzy::TskSystem;
use crate::learner::Regressor;
use crate::partition::PatchBox;

/// Any trained model the crate can produce, tagged by kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrainedModel {
    Tsk(TskSystem),
    Polynomial(PolynomialModel),
    Tree(RegressionTree),
    Ensemble(EnsembleModel<TrainedModel>),
}

impl Regressor for TrainedModel {
    fn predict(&self, x: &[f64]) -> f64 {
        match self {
            TrainedModel::Tsk(m) => m.predict(x),
            TrainedModel::Polynomial(m) => m.predict(x),
            TrainedModel::Tree(m) => m.predict(x),
            TrainedModel::Ensemble(m) => m.predict(x),
        }
    }

    fn rule_partitions(&self) -> Option<Result<Vec<PatchBox>>> {
        match self {
            TrainedModel::Tsk(m) => m.rule_partitions(),
            _ => None,
        }
    }
}

impl From<TskSystem> for TrainedModel {
    fn from(m: TskSystem) -> Self {
        TrainedModel::Tsk(m)
    }
}

impl From<PolynomialModel> for TrainedModel {
    fn from(m: PolynomialModel) -> Self {
        TrainedModel::Polynomial(m)
    }
}

impl From<RegressionTree> for TrainedModel {
    fn from(m: RegressionTree) -> Self {
        TrainedModel::Tree(m)
    }
}

impl<M: Into<TrainedModel>> From<EnsembleModel<M>> for TrainedModel {
    fn from(m: EnsembleModel<M>) -> Self {
        TrainedModel::Ensemble(m.map_members(Into::into))
    }
}
