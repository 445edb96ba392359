//! The five benchmark experiments and the generic patch-count sweep behind
//! them.

use std::thread;
use std::time::Instant;

use patchlearn_core::baselines::{bagging_train, lsboost_train, Resampling, TreeParams};
use patchlearn_core::datasets::{
    gen_curve1d, gen_mackey_glass, gen_manifold3d, gen_sinc2d, gen_sysid, MackeyGlassConfig, SysIdData,
};
use patchlearn_core::metrics::{metrics, rmse};
use patchlearn_core::patch::{argmin_loss, Candidate, GlobalUpdate, PatchSession};
use patchlearn_core::{AnfisConfig, AnfisLearner, LabeledSet, Learner, PlConfig, Regressor, TrainedModel};

use crate::error::{HarnessError, Result};
use crate::modelfile::SavedModel;
use crate::report::{BaselineRow, ConfigEcho, ExperimentReport, PlRow};

pub const LSBOOST_SHRINKAGE: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Largest number of patches to sweep; `None` uses the experiment default.
    pub l_max: Option<usize>,
    pub alpha: f64,
    /// Trapezoids per input for the global and patch fuzzy systems.
    pub mfs: usize,
    pub seed: u64,
    /// Online protocol only: retrain every this many steps.
    pub retrain_every: usize,
    /// Trainer settings; `mfs_per_input` is taken from `mfs`.
    pub anfis: AnfisConfig,
    /// `None` derives the threshold from the patch learner.
    pub min_patch_examples: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            l_max: None,
            alpha: 0.25,
            mfs: 2,
            seed: 1,
            retrain_every: 1,
            anfis: AnfisConfig::default(),
            min_patch_examples: None,
        }
    }
}

impl ExperimentConfig {
    fn anfis(&self) -> AnfisConfig {
        AnfisConfig { mfs_per_input: self.mfs, ..self.anfis }
    }

    fn pl_config(&self, l_max: usize) -> PlConfig {
        PlConfig {
            max_patches: l_max,
            alpha: self.alpha,
            min_patch_examples: self.min_patch_examples,
            ..PlConfig::default()
        }
    }
}

pub fn default_l_max(id: u32) -> Result<usize> {
    match id {
        1 | 2 | 4 => Ok(2),
        3 => Ok(5),
        5 => Ok(3),
        _ => Err(HarnessError::UnknownExperiment(id)),
    }
}

/// Everything an experiment produced, not just the report.
#[derive(Debug, Clone)]
pub struct ExperimentRun {
    pub report: ExperimentReport,
    /// One model per report row, same order.
    pub fits: Vec<SavedModel>,
    /// Candidate pool of the initial global model, in selection order.
    pub candidates: Vec<Candidate>,
    pub train: LabeledSet,
    pub test: Option<LabeledSet>,
    /// Plot abscissa for each row of the evaluation set.
    pub axis: Vec<f64>,
}

impl ExperimentRun {
    pub fn best_model(&self) -> &SavedModel {
        let i = self.report.rows.iter().position(|r| r.l == self.report.best_l).expect("best row exists");
        &self.fits[i]
    }

    /// Test split if there is one, training data otherwise.
    pub fn eval_set(&self) -> &LabeledSet {
        self.test.as_ref().unwrap_or(&self.train)
    }
}

pub fn run_experiment(id: u32, config: &ExperimentConfig) -> Result<ExperimentRun> {
    let l_max = match config.l_max {
        Some(l) => l,
        None => default_l_max(id)?,
    };
    match id {
        1 => sweep(&id.to_string(), gen_curve1d(), None, l_max, config),
        2 => sweep(&id.to_string(), gen_sinc2d(), None, l_max, config),
        3 => sweep(&id.to_string(), gen_manifold3d(), None, l_max, config),
        4 => run_sysid(l_max, config),
        5 => {
            let mg = gen_mackey_glass(&MackeyGlassConfig::default())?;
            sweep(&id.to_string(), mg.train, Some(mg.test), l_max, config)
        }
        _ => Err(HarnessError::UnknownExperiment(id)),
    }
}

/// Patch-learning sweep over `L = 0..=l_max` with ANFIS global and patch
/// models, plus Bagging and LSBoost with `1..=l_max+1` members.
pub fn sweep(
    label: &str,
    train: LabeledSet,
    test: Option<LabeledSet>,
    l_max: usize,
    config: &ExperimentConfig,
) -> Result<ExperimentRun> {
    let anfis = config.anfis();
    anfis.validate()?;
    let learner = AnfisLearner::new(anfis);
    let pl_config = config.pl_config(l_max);
    let members = l_max + 1;
    let eval = test.as_ref().unwrap_or(&train);

    let (pl, baselines) = thread::scope(|s| {
        let bagging = s.spawn(|| bagging_rows(&train, eval, members, &learner, config.seed));
        let pl = pl_sweep(&train, test.as_ref(), pl_config.clone(), &learner);
        let boost = lsboost_rows(&train, eval, members);
        let bagging = bagging.join().expect("bagging thread panicked");
        (pl, bagging.and_then(|mut rows| {
            rows.extend(boost?);
            Ok(rows)
        }))
    });
    let (rows, fits, candidates, mut notes) = pl?;
    let baselines = baselines?;

    let losses: Vec<f64> = rows.iter().map(|r| r.loss).collect();
    let best_l = argmin_loss(&losses).map_or(0, |i| rows[i].l);
    if rows.len() < l_max + 1 {
        notes.push(format!(
            "partial sweep: requested L up to {l_max}, trained L up to {}",
            rows.last().map_or(0, |r| r.l)
        ));
    }
    let tree = TreeParams::default();
    let report = ExperimentReport {
        experiment: label.to_string(),
        seed: config.seed,
        best_l,
        config: ConfigEcho {
            alpha: config.alpha,
            l_max,
            mfs_per_input: anfis.mfs_per_input,
            ridge_lambda: anfis.ridge_lambda,
            premise_epochs: anfis.premise_epochs,
            premise_step: anfis.premise_step,
            min_patch_examples: config.min_patch_examples.unwrap_or_else(|| learner.min_examples(train.dims())),
            train_rows: train.len(),
            test_rows: test.as_ref().map_or(0, LabeledSet::len),
            evaluated_on: if test.is_some() { "test" } else { "train" }.to_string(),
            bagging_resampling: "bootstrap".to_string(),
            lsboost_shrinkage: LSBOOST_SHRINKAGE,
            tree_max_depth: tree.max_depth,
            tree_min_leaf: tree.min_leaf,
            retrain_every: 0,
        },
        rows,
        baselines,
        notes,
    };
    let axis = if eval.dims() == 1 {
        eval.iter().map(|(x, _)| x[0]).collect()
    } else {
        (0..eval.len()).map(|i| i as f64).collect()
    };
    Ok(ExperimentRun { report, fits, candidates, train, test, axis })
}

type SweepParts = (Vec<PlRow>, Vec<SavedModel>, Vec<Candidate>, Vec<String>);

fn pl_sweep(
    train: &LabeledSet,
    test: Option<&LabeledSet>,
    pl_config: PlConfig,
    learner: &AnfisLearner,
) -> Result<SweepParts> {
    let eval = test.unwrap_or(train);
    let mut notes = Vec::new();
    let start = Instant::now();
    let mut session = PatchSession::new(train, pl_config, learner, learner)?;
    let mut setup_ms = start.elapsed().as_secs_f64() * 1e3;
    let top = session.max_useful_patches();
    if top < session.config().max_patches {
        notes.push(format!(
            "L capped at {top}: the candidate pool has {} boxes and the last one stays with the global model",
            session.candidates().len()
        ));
    }
    let mut rows = Vec::new();
    let mut fits = Vec::new();
    for l in 0..=top {
        let t = Instant::now();
        let model = session.fit(l)?;
        let wall_time_ms = t.elapsed().as_secs_f64() * 1e3 + setup_ms;
        setup_ms = 0.0;
        if model.num_patches() < l {
            notes.push(format!("no trainable candidate left for patch {l}; skipped boxes {:?}", model.skipped));
            break;
        }
        let pred: Vec<f64> = eval.iter().map(|(x, _)| model.predict(x)).collect();
        let m = metrics(&pred, eval.targets())?;
        let global_kept_initial = matches!(model.global_update, GlobalUpdate::KeptInitial { .. });
        if global_kept_initial {
            notes.push(format!("L={l}: global model could not be refit, initial global model kept"));
        }
        rows.push(PlRow {
            l,
            train_rmse: model.training_rmse,
            test_rmse: test.map(|_| m.rmse),
            ape: m.ape,
            loss: model.loss,
            wall_time_ms,
            global_kept_initial,
            patches: model.patches.iter().map(|p| p.patch_box.clone()).collect(),
        });
        fits.push(model.map_models(TrainedModel::from, TrainedModel::from));
    }
    Ok((rows, fits, session.candidates().to_vec(), notes))
}

fn bagging_rows(
    train: &LabeledSet,
    eval: &LabeledSet,
    members: usize,
    learner: &AnfisLearner,
    seed: u64,
) -> Result<Vec<BaselineRow>> {
    let ensemble = bagging_train(train, members, learner, seed, Resampling::Bootstrap)?;
    (1..=ensemble.members.len())
        .map(|n| baseline_row("bagging", n, &ensemble.truncated(n), eval))
        .collect()
}

fn lsboost_rows(train: &LabeledSet, eval: &LabeledSet, members: usize) -> Result<Vec<BaselineRow>> {
    let ensemble = lsboost_train(train, members, LSBOOST_SHRINKAGE, TreeParams::default())?;
    (1..=members).map(|n| baseline_row("lsboost", n, &ensemble.truncated(n), eval)).collect()
}

fn baseline_row(method: &str, members: usize, model: &impl Regressor, eval: &LabeledSet) -> Result<BaselineRow> {
    let pred: Vec<f64> = eval.iter().map(|(x, _)| model.predict(x)).collect();
    let m = metrics(&pred, eval.targets())?;
    Ok(BaselineRow { method: method.to_string(), members, rmse: m.rmse, ape: m.ape })
}

/// Identification experiment: the final models are trained on the pairs for
/// `k = 1..=250` and tested on `k = 251..=700`. The online protocol also
/// retrains on the pairs seen so far at every `retrain_every`-th step from
/// `k = 40`, and scores each model on the steps up to the next retrain.
pub fn run_sysid(l_max: usize, config: &ExperimentConfig) -> Result<ExperimentRun> {
    if config.retrain_every == 0 {
        return Err(HarnessError::Argument("--retrain-every must be at least 1".into()));
    }
    let sys = gen_sysid();
    let train = sys.window(1, SysIdData::TRAIN_END);
    let test = sys.window(SysIdData::TRAIN_END + 1, SysIdData::STEPS);
    let mut run = sweep("4", train, Some(test), l_max, config)?;

    let online = online_rmse(&sys, l_max, config)?;
    for (l, value) in online.iter().enumerate() {
        if let Some(v) = value {
            run.report.notes.push(format!("online one-step RMSE over k=41..250 with L={l}: {v}"));
        }
    }
    run.report.notes.push(format!(
        "online protocol: full retrain on pairs k=1..k every {} step(s) from k={} to k={}",
        config.retrain_every,
        SysIdData::TRAIN_START,
        SysIdData::TRAIN_END
    ));
    run.report.config.retrain_every = config.retrain_every;
    run.axis = (SysIdData::TRAIN_END + 1..=SysIdData::STEPS).map(|k| k as f64).collect();
    Ok(run)
}

/// Prequential RMSE per `L`: the model retrained at step `k` predicts the
/// pairs after `k` until the next retrain.
fn online_rmse(sys: &SysIdData, l_max: usize, config: &ExperimentConfig) -> Result<Vec<Option<f64>>> {
    let learner = AnfisLearner::new(config.anfis());
    let mut steps: Vec<usize> =
        (SysIdData::TRAIN_START..SysIdData::TRAIN_END).step_by(config.retrain_every).collect();
    steps.push(SysIdData::TRAIN_END);
    let mut pred = vec![Vec::new(); l_max + 1];
    let mut target = Vec::new();
    for pair in steps.windows(2) {
        let (k, next) = (pair[0], pair[1]);
        let window = sys.window(1, k);
        let mut session = PatchSession::new(&window, config.pl_config(l_max), &learner, &learner)?;
        let top = session.max_useful_patches();
        let ahead = sys.window(k + 1, next);
        target.extend_from_slice(ahead.targets());
        for (l, p) in pred.iter_mut().enumerate() {
            let model = session.fit(l.min(top))?;
            p.extend(ahead.iter().map(|(x, _)| model.predict(x)));
        }
    }
    Ok(pred.iter().map(|p| (!target.is_empty()).then(|| rmse(p, &target))).collect())
}
