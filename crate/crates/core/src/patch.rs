//! The patch-learning engine.
//!
//! Training runs in three stages: fit a global model on all data; rank the
//! candidate patches by the global model's squared error inside them and
//! train a local model for the worst ones; refit the global model on the
//! examples that fall outside every recorded patch. Prediction asks the
//! patches in recorded order and falls back to the global model.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::data::LabeledSet;
use crate::error::{Error, Result};
use crate::learner::{Learner, Regressor};
use crate::metrics;
use crate::partition::PatchBox;

/// `rmse · (L + 1)^alpha`: training error penalized by patch count.
pub fn loss(rmse: f64, patches: usize, alpha: f64) -> f64 {
    rmse * libm::pow((patches + 1) as f64, alpha)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "boxes", rename_all = "snake_case")]
pub enum CandidateSource {
    /// First-order rule partitions of the initial global model.
    RulePartitions,
    /// A fixed, pairwise disjoint list of boxes.
    Explicit(Vec<PatchBox>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlConfig {
    /// Maximum number of patch models `L`.
    pub max_patches: usize,
    /// Loss exponent.
    pub alpha: f64,
    /// Patches with fewer examples count as untrainable. `None` defers to
    /// the patch learner's [`Learner::min_examples`].
    pub min_patch_examples: Option<usize>,
    pub candidate_source: CandidateSource,
}

impl Default for PlConfig {
    fn default() -> Self {
        Self { max_patches: 2, alpha: 0.25, min_patch_examples: None, candidate_source: CandidateSource::RulePartitions }
    }
}

impl PlConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(Error::Config(format!("alpha must be > 0, got {}", self.alpha)));
        }
        if self.min_patch_examples == Some(0) {
            return Err(Error::Config("min_patch_examples must be >= 1".into()));
        }
        Ok(())
    }
}

/// A candidate box with the initial global model's error inside it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub patch_box: PatchBox,
    pub sse: f64,
    pub examples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Patch<P> {
    pub patch_box: PatchBox,
    pub model: P,
    /// Training examples inside the box.
    pub examples: usize,
}

/// How the final global model came about.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum GlobalUpdate {
    /// Refit on the examples outside every patch.
    Refit { examples: usize },
    /// No usable examples remained outside the patches; the initial global
    /// model was kept.
    KeptInitial { examples: usize },
}

/// A trained patch-learning model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlModel<G, P> {
    pub patches: Vec<Patch<P>>,
    pub global: G,
    pub global_update: GlobalUpdate,
    pub alpha: f64,
    /// Training RMSE of the routed model.
    pub training_rmse: f64,
    pub loss: f64,
    /// Training RMSE of the initial global model combined with the first
    /// `l` patches, for `l = 0..=patches.len()`, before the global update.
    pub stage_rmse: Vec<f64>,
    /// Flat indices of candidates skipped as untrainable, in visiting order.
    pub skipped: Vec<usize>,
}

/// Which component of a [`PlModel`] answers an input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    Patch(usize),
    Global,
}

impl<G, P> PlModel<G, P> {
    pub fn route(&self, x: &[f64]) -> Route {
        self.patches
            .iter()
            .position(|p| p.patch_box.contains(x))
            .map_or(Route::Global, Route::Patch)
    }

    pub fn num_patches(&self) -> usize {
        self.patches.len()
    }

    pub fn map_models<G2, P2>(self, mut g: impl FnMut(G) -> G2, mut p: impl FnMut(P) -> P2) -> PlModel<G2, P2> {
        PlModel {
            patches: self
                .patches
                .into_iter()
                .map(|pt| Patch { patch_box: pt.patch_box, model: p(pt.model), examples: pt.examples })
                .collect(),
            global: g(self.global),
            global_update: self.global_update,
            alpha: self.alpha,
            training_rmse: self.training_rmse,
            loss: self.loss,
            stage_rmse: self.stage_rmse,
            skipped: self.skipped,
        }
    }
}

impl<G: Regressor, P: Regressor> Regressor for PlModel<G, P> {
    fn predict(&self, x: &[f64]) -> f64 {
        match self.route(x) {
            Route::Patch(i) => self.patches[i].model.predict(x),
            Route::Global => self.global.predict(x),
        }
    }
}

/// Routed prediction: the first patch containing `x` answers, otherwise the
/// global model.
pub fn predict<G: Regressor, P: Regressor>(model: &PlModel<G, P>, x: &[f64]) -> f64 {
    model.predict(x)
}

/// Squared error of `model` over the examples inside each box.
pub fn candidate_sse<R: Regressor + ?Sized>(model: &R, data: &LabeledSet, boxes: &[PatchBox]) -> Vec<f64> {
    let mut sse = vec![0.0; boxes.len()];
    for (x, y) in data.iter() {
        if let Some(k) = boxes.iter().position(|b| b.contains(x)) {
            let e = model.predict(x) - y;
            sse[k] += e * e;
        }
    }
    sse
}

/// Shared state for training patch-learning models with different `L` on the
/// same data: the initial global model, the ranked candidate pool and a cache
/// of patch fits (a patch model depends only on the examples in its box).
pub struct PatchSession<'a, GL: Learner, PL: Learner> {
    data: &'a LabeledSet,
    config: PlConfig,
    global_learner: &'a GL,
    patch_learner: &'a PL,
    initial_global: GL::Model,
    /// Candidates by descending SSE, ties to the lowest flat index.
    ranked: Vec<Candidate>,
    /// For each example, the position in `ranked` of the box holding it.
    owner: Vec<Option<usize>>,
    fits: Vec<Option<Option<PL::Model>>>,
}

impl<'a, GL, PL> PatchSession<'a, GL, PL>
where
    GL: Learner,
    GL::Model: Clone,
    PL: Learner,
    PL::Model: Clone,
{
    pub fn new(data: &'a LabeledSet, config: PlConfig, global_learner: &'a GL, patch_learner: &'a PL) -> Result<Self> {
        config.validate()?;
        if data.is_empty() {
            return Err(Error::EmptyData);
        }
        let initial_global = global_learner.fit(data)?;
        let boxes = match &config.candidate_source {
            CandidateSource::RulePartitions => initial_global.rule_partitions().ok_or_else(|| {
                Error::Config("global learner does not expose rule partitions; use explicit boxes".into())
            })??,
            CandidateSource::Explicit(boxes) => {
                for (i, a) in boxes.iter().enumerate() {
                    if a.dims() != data.dims() {
                        return Err(Error::DimensionMismatch { expected: data.dims(), got: a.dims() });
                    }
                    if boxes[..i].iter().any(|b| !a.is_disjoint(b)) {
                        return Err(Error::Config(format!("explicit patch box {a} overlaps an earlier box")));
                    }
                }
                boxes.clone()
            }
        };
        let mut ranked: Vec<Candidate> = boxes
            .into_iter()
            .map(|patch_box| Candidate { patch_box, sse: 0.0, examples: 0 })
            .collect();
        let mut owner_box = vec![None; data.len()];
        for (i, (x, y)) in data.iter().enumerate() {
            if let Some(k) = ranked.iter().position(|c| c.patch_box.contains(x)) {
                let e = initial_global.predict(x) - y;
                ranked[k].sse += e * e;
                ranked[k].examples += 1;
                owner_box[i] = Some(ranked[k].patch_box.flat_index);
            }
        }
        ranked.sort_by(|a, b| b.sse.total_cmp(&a.sse).then(a.patch_box.flat_index.cmp(&b.patch_box.flat_index)));
        let owner = owner_box
            .into_iter()
            .map(|k| k.and_then(|k| ranked.iter().position(|c| c.patch_box.flat_index == k)))
            .collect();
        let fits = vec![None; ranked.len()];
        Ok(Self { data, config, global_learner, patch_learner, initial_global, ranked, owner, fits })
    }

    pub fn initial_global(&self) -> &GL::Model {
        &self.initial_global
    }

    /// Candidate pool in selection order.
    pub fn candidates(&self) -> &[Candidate] {
        &self.ranked
    }

    pub fn config(&self) -> &PlConfig {
        &self.config
    }

    /// Largest `L` worth sweeping: with rule partitions the last candidate is
    /// left to the global model.
    pub fn max_useful_patches(&self) -> usize {
        let pool = self.ranked.len();
        let cap = match self.config.candidate_source {
            CandidateSource::RulePartitions => pool.saturating_sub(1),
            CandidateSource::Explicit(_) => pool,
        };
        self.config.max_patches.min(cap)
    }

    fn min_examples(&self) -> usize {
        self.config.min_patch_examples.unwrap_or_else(|| self.patch_learner.min_examples(self.data.dims()))
    }

    fn examples_of(&self, pos: usize) -> Vec<usize> {
        (0..self.data.len()).filter(|&i| self.owner[i] == Some(pos)).collect()
    }

    fn patch_fit(&mut self, pos: usize) -> Result<Option<PL::Model>> {
        if let Some(cached) = &self.fits[pos] {
            return Ok(cached.clone());
        }
        let result = if self.ranked[pos].examples < self.min_examples() {
            None
        } else {
            let subset = self.data.select(&self.examples_of(pos));
            match self.patch_learner.fit(&subset) {
                Ok(m) => Some(m),
                Err(e) if e.is_untrainable() => None,
                Err(e) => return Err(e),
            }
        };
        self.fits[pos] = Some(result.clone());
        Ok(result)
    }

    /// Trains the model with up to `l` patches.
    pub fn fit(&mut self, l: usize) -> Result<PlModel<GL::Model, PL::Model>> {
        let mut chosen: Vec<usize> = Vec::new();
        let mut patches = Vec::new();
        let mut skipped = Vec::new();
        let mut pos = 0;
        while patches.len() < l && pos < self.ranked.len() {
            match self.patch_fit(pos)? {
                Some(model) => {
                    let c = &self.ranked[pos];
                    patches.push(Patch { patch_box: c.patch_box.clone(), model, examples: c.examples });
                    chosen.push(pos);
                }
                None => skipped.push(self.ranked[pos].patch_box.flat_index),
            }
            pos += 1;
        }

        // Stage errors with the initial global model.
        let mut stage_pred: Vec<f64> = self.data.iter().map(|(x, _)| self.initial_global.predict(x)).collect();
        let mut stage_rmse = vec![metrics::rmse(&stage_pred, self.data.targets())];
        for (patch, &p) in patches.iter().zip(&chosen) {
            for i in self.examples_of(p) {
                stage_pred[i] = patch.model.predict(self.data.input(i));
            }
            stage_rmse.push(metrics::rmse(&stage_pred, self.data.targets()));
        }

        let outside: Vec<usize> = (0..self.data.len())
            .filter(|&i| self.owner[i].is_none_or(|p| !chosen.contains(&p)))
            .collect();
        let (global, global_update) = if patches.is_empty() {
            (self.initial_global.clone(), GlobalUpdate::Refit { examples: self.data.len() })
        } else if outside.is_empty() {
            (self.initial_global.clone(), GlobalUpdate::KeptInitial { examples: 0 })
        } else {
            match self.global_learner.fit(&self.data.select(&outside)) {
                Ok(g) => (g, GlobalUpdate::Refit { examples: outside.len() }),
                Err(e) if e.is_untrainable() => {
                    (self.initial_global.clone(), GlobalUpdate::KeptInitial { examples: outside.len() })
                }
                Err(e) => return Err(e),
            }
        };

        let mut model = PlModel {
            patches,
            global,
            global_update,
            alpha: self.config.alpha,
            training_rmse: 0.0,
            loss: 0.0,
            stage_rmse,
            skipped,
        };
        let pred: Vec<f64> = self.data.iter().map(|(x, _)| model.predict(x)).collect();
        model.training_rmse = metrics::rmse(&pred, self.data.targets());
        model.loss = loss(model.training_rmse, model.patches.len(), model.alpha);
        Ok(model)
    }
}

/// Trains one patch-learning model with up to `config.max_patches` patches.
///
/// Fewer patches are recorded when the candidate pool runs out of trainable
/// boxes; that is not an error.
pub fn train_patch_learning<GL, PL>(
    data: &LabeledSet,
    config: &PlConfig,
    global_learner: &GL,
    patch_learner: &PL,
) -> Result<PlModel<GL::Model, PL::Model>>
where
    GL: Learner,
    GL::Model: Clone,
    PL: Learner,
    PL::Model: Clone,
{
    let mut session = PatchSession::new(data, config.clone(), global_learner, patch_learner)?;
    session.fit(config.max_patches)
}

/// Outcome of a sweep over the number of patches.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection<G, P> {
    /// Index into `fits` of the lowest loss (ties to fewer patches).
    pub best: usize,
    /// One model per swept `L`, in increasing `L`.
    pub fits: Vec<PlModel<G, P>>,
}

impl<G, P> Selection<G, P> {
    pub fn best_l(&self) -> usize {
        self.fits[self.best].num_patches()
    }

    pub fn best_model(&self) -> &PlModel<G, P> {
        &self.fits[self.best]
    }
}

/// Index of the smallest loss; ties go to the earliest entry.
pub fn argmin_loss(losses: &[f64]) -> Option<usize> {
    losses
        .iter()
        .enumerate()
        .fold(None, |best: Option<(usize, f64)>, (i, &l)| match best {
            Some((_, b)) if l >= b => best,
            _ => Some((i, l)),
        })
        .map(|(i, _)| i)
}

/// Trains models for `L = 0..=min(L_max, candidates − 1)` and picks the one
/// with the smallest loss. The sweep stops early once the pool cannot supply
/// another trainable patch.
pub fn select_num_patches<GL, PL>(
    data: &LabeledSet,
    config: &PlConfig,
    global_learner: &GL,
    patch_learner: &PL,
) -> Result<Selection<GL::Model, PL::Model>>
where
    GL: Learner,
    GL::Model: Clone,
    PL: Learner,
    PL::Model: Clone,
{
    let mut session = PatchSession::new(data, config.clone(), global_learner, patch_learner)?;
    let top = session.max_useful_patches();
    let mut fits = Vec::with_capacity(top + 1);
    for l in 0..=top {
        let model = session.fit(l)?;
        let short = model.num_patches() < l;
        if !short {
            fits.push(model);
        }
        if short {
            break;
        }
    }
    let losses: Vec<f64> = fits.iter().map(|m| m.loss).collect();
    let best = argmin_loss(&losses).unwrap_or(0);
    Ok(Selection { best, fits })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::PolynomialLearner;
    use approx::assert_abs_diff_eq;

    #[test]
    fn loss_examples() {
        assert_abs_diff_eq!(loss(2.560, 0, 0.25), 2.560, epsilon = 1e-12);
        assert_abs_diff_eq!(loss(1.654, 1, 0.25), 1.967, epsilon = 5e-4);
        assert_abs_diff_eq!(loss(0.026, 2, 0.25), 0.0342, epsilon = 1e-4);
    }

    #[test]
    fn argmin_prefers_fewer_patches_on_ties() {
        assert_eq!(argmin_loss(&[0.046, 0.021, 0.023]), Some(1));
        assert_eq!(argmin_loss(&[3.0, 2.0, 1.0]), Some(2));
        assert_eq!(argmin_loss(&[0.2, 0.154, 0.163]), Some(1));
        assert_eq!(argmin_loss(&[1.0, 1.0]), Some(0));
        assert_eq!(argmin_loss(&[]), None);
    }

    #[test]
    fn candidate_sse_counts_only_box_members() {
        struct Zero;
        impl Regressor for Zero {
            fn predict(&self, _: &[f64]) -> f64 {
                0.0
            }
        }
        let d = LabeledSet::from_rows(1, [(vec![0.5], 1.0), (vec![0.7], -1.0), (vec![1.5], 0.0)]).unwrap();
        let boxes = [
            PatchBox::closed(vec![0.0], vec![1.0], 1).unwrap(),
            PatchBox::closed(vec![1.2], vec![2.0], 2).unwrap(),
            PatchBox::closed(vec![3.0], vec![4.0], 3).unwrap(),
        ];
        assert_eq!(candidate_sse(&Zero, &d, &boxes), vec![2.0, 0.0, 0.0]);
    }

    fn parabola_with_bump() -> LabeledSet {
        LabeledSet::from_rows(1, (0..=200).map(|i| {
            let x = 6.0 * i as f64 / 200.0;
            let bump = if (2.0..=3.0).contains(&x) { 5.0 * libm::sin(3.0 * x) } else { 0.0 };
            (vec![x], x * x + bump)
        }))
        .unwrap()
    }

    #[test]
    fn zero_patches_is_the_plain_fit() {
        let d = parabola_with_bump();
        let cfg = PlConfig {
            max_patches: 0,
            candidate_source: CandidateSource::Explicit(vec![PatchBox::closed(vec![2.0], vec![3.0], 1).unwrap()]),
            ..PlConfig::default()
        };
        let learner = PolynomialLearner { degree: 2 };
        let m = train_patch_learning(&d, &cfg, &learner, &learner).unwrap();
        let plain = learner.fit(&d).unwrap();
        assert!(m.patches.is_empty());
        assert_eq!(m.loss, m.training_rmse);
        for x in [0.0, 2.5, 6.0] {
            assert_eq!(m.predict(&[x]), plain.predict(&[x]));
        }
    }

    #[test]
    fn overlapping_explicit_boxes_rejected() {
        let d = parabola_with_bump();
        let cfg = PlConfig {
            candidate_source: CandidateSource::Explicit(vec![
                PatchBox::closed(vec![1.0], vec![3.0], 1).unwrap(),
                PatchBox::closed(vec![2.0], vec![4.0], 2).unwrap(),
            ]),
            ..PlConfig::default()
        };
        let l = PolynomialLearner { degree: 2 };
        assert!(matches!(train_patch_learning(&d, &cfg, &l, &l), Err(Error::Config(_))));
    }

    #[test]
    fn untrainable_candidates_are_skipped() {
        let d = parabola_with_bump();
        let cfg = PlConfig {
            max_patches: 2,
            min_patch_examples: Some(10),
            candidate_source: CandidateSource::Explicit(vec![
                PatchBox::closed(vec![2.0], vec![3.0], 1).unwrap(),
                PatchBox::closed(vec![5.99], vec![6.0], 2).unwrap(),
            ]),
            ..PlConfig::default()
        };
        let l = PolynomialLearner { degree: 2 };
        let m = train_patch_learning(&d, &cfg, &l, &l).unwrap();
        assert_eq!(m.num_patches(), 1);
        assert_eq!(m.skipped, vec![2]);
    }

    #[test]
    fn global_kept_when_patches_cover_everything() {
        let d = parabola_with_bump();
        let cfg = PlConfig {
            max_patches: 1,
            candidate_source: CandidateSource::Explicit(vec![PatchBox::closed(vec![0.0], vec![6.0], 1).unwrap()]),
            ..PlConfig::default()
        };
        let l = PolynomialLearner { degree: 2 };
        let m = train_patch_learning(&d, &cfg, &l, &l).unwrap();
        assert_eq!(m.global_update, GlobalUpdate::KeptInitial { examples: 0 });
    }

    #[test]
    fn rule_partitions_need_a_rule_model() {
        let d = parabola_with_bump();
        let l = PolynomialLearner { degree: 2 };
        assert!(matches!(train_patch_learning(&d, &PlConfig::default(), &l, &l), Err(Error::Config(_))));
    }
}
