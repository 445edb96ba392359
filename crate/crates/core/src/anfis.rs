//! Training of first-order TSK systems: uniform trapezoid initialization,
//! least-squares consequents and derivative-free premise refinement.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::data::LabeledSet;
use crate::error::{Error, Result};
use crate::fuzzy::{TrapezoidalMf, TskSystem};
use crate::learner::Learner;
use crate::linalg::{self, Matrix};
use crate::partition;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnfisConfig {
    /// Trapezoids per input (at least 2).
    pub mfs_per_input: usize,
    /// Ridge penalty on the stacked consequent coefficients.
    pub ridge_lambda: f64,
    /// Premise refinement sweeps; 0 disables refinement.
    pub premise_epochs: usize,
    /// Initial breakpoint step as a fraction of each input's range.
    pub premise_step: f64,
}

impl Default for AnfisConfig {
    fn default() -> Self {
        Self { mfs_per_input: 2, ridge_lambda: 1e-6, premise_epochs: 50, premise_step: 0.02 }
    }
}

impl AnfisConfig {
    pub fn validate(&self) -> Result<()> {
        if self.mfs_per_input < 2 {
            return Err(Error::Config(format!("mfs_per_input must be >= 2, got {}", self.mfs_per_input)));
        }
        if !(self.ridge_lambda >= 0.0) || !self.ridge_lambda.is_finite() {
            return Err(Error::Config(format!("ridge_lambda must be >= 0, got {}", self.ridge_lambda)));
        }
        if !(self.premise_step > 0.0) || !self.premise_step.is_finite() {
            return Err(Error::Config(format!("premise_step must be > 0, got {}", self.premise_step)));
        }
        Ok(())
    }
}

/// `k` trapezoids on `[lo, hi]`: the range is cut into `2k − 1` equal
/// segments, even segments are plateaus and odd segments are the shared
/// ramps between neighbours. The outer trapezoids have vertical edges at the
/// range ends.
pub fn uniform_mfs(lo: f64, hi: f64, k: usize) -> Vec<TrapezoidalMf> {
    let seg = (hi - lo) / (2 * k - 1) as f64;
    let at = |j: usize| if j == 0 { lo } else if j >= 2 * k - 1 { hi } else { lo + j as f64 * seg };
    (0..k)
        .map(|i| {
            let b = at(2 * i);
            let c = at(2 * i + 1);
            let a = if i == 0 { lo } else { at(2 * i - 1) };
            let d = if i + 1 == k { hi } else { at(2 * i + 2) };
            TrapezoidalMf { a, b, c, d }
        })
        .collect()
}

/// Uniform-overlap initial system spanning the data's input ranges, with
/// zero consequents.
pub fn init_from_data(data: &LabeledSet, config: &AnfisConfig) -> Result<TskSystem> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    let ranges = data.input_ranges();
    for (dim, &(lo, hi)) in ranges.iter().enumerate() {
        if !(hi > lo) {
            return Err(Error::DegenerateRange { dim, value: lo });
        }
    }
    let mfs = ranges.iter().map(|&(lo, hi)| uniform_mfs(lo, hi, config.mfs_per_input)).collect();
    TskSystem::new(mfs, ranges)
}

/// Normalized firing strengths of every example, `N × R`.
fn normalized_firing(system: &TskSystem, data: &LabeledSet) -> Result<Matrix> {
    let r = system.rules().len();
    let mut w = Matrix::zeros(data.len(), r);
    for (i, (x, _)) in data.iter().enumerate() {
        let row = w.row_mut(i);
        let total = system.firing_strengths(x, row)?;
        if total <= 0.0 {
            return Err(Error::UncoveredExample { index: i });
        }
        row.iter_mut().for_each(|v| *v /= total);
    }
    Ok(w)
}

/// Least-squares consequents; returns the fitted system and its training MSE.
fn fit_with_mse(system: &TskSystem, data: &LabeledSet, ridge: f64) -> Result<(TskSystem, f64)> {
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    let m = system.dims();
    let width = m + 1;
    let firing = normalized_firing(system, data)?;
    let r = system.rules().len();
    // Rules that never fire on the data stay at zero.
    let active: Vec<usize> = (0..r)
        .filter(|&j| (0..data.len()).any(|i| firing.get(i, j) > 0.0))
        .collect();
    let p = active.len() * width;
    let mut design = Matrix::zeros(data.len(), p);
    for (i, (x, _)) in data.iter().enumerate() {
        let row = design.row_mut(i);
        for (slot, &j) in active.iter().enumerate() {
            let w = firing.get(i, j);
            let base = slot * width;
            row[base] = w;
            for (t, &v) in x.iter().enumerate() {
                row[base + 1 + t] = w * v;
            }
        }
    }
    let beta = linalg::least_squares(&design, data.targets(), ridge)?;
    let mut coeffs = vec![0.0; r * width];
    for (slot, &j) in active.iter().enumerate() {
        coeffs[j * width..(j + 1) * width].copy_from_slice(&beta[slot * width..(slot + 1) * width]);
    }
    let sse: f64 = (0..data.len())
        .map(|i| {
            let pred: f64 = design.row(i).iter().zip(&beta).map(|(a, b)| a * b).sum();
            let e = pred - data.target(i);
            e * e
        })
        .sum();
    let fitted = system.clone().with_consequents(&coeffs)?;
    Ok((fitted, sse / data.len() as f64))
}

/// Refits every rule consequent by (ridge-regularized) linear least squares,
/// keeping the premises fixed.
pub fn fit_consequents(system: &TskSystem, data: &LabeledSet, ridge_lambda: f64) -> Result<TskSystem> {
    fit_with_mse(system, data, ridge_lambda).map(|(s, _)| s)
}

/// MF list of one input is admissible for premise refinement: valid
/// trapezoids inside the range, outer edges pinned to the range ends, inner
/// feet strictly inside, neighbours ordered, no coverage gap.
fn admissible(mfs: &[TrapezoidalMf], (lo, hi): (f64, f64)) -> bool {
    let k = mfs.len();
    let pinned_ok = mfs[0].a == lo && mfs[k - 1].d == hi;
    let inner_ok = mfs.iter().enumerate().all(|(i, mf)| {
        mf.is_valid()
            && mf.a >= lo
            && mf.d <= hi
            && (i == 0 || mf.a > lo)
            && (i + 1 == k || mf.d < hi)
    });
    let ordered = mfs.windows(2).all(|w| w[0].a <= w[1].a && w[0].d <= w[1].d);
    pinned_ok && inner_ok && ordered && partition::partitions_1d(mfs, (lo, hi)).is_ok()
}

/// Asserts the structural invariants a trained system must satisfy.
pub fn check_invariants(system: &TskSystem) -> Result<()> {
    let expected: usize = system.mfs().iter().map(Vec::len).product();
    if system.rules().len() != expected {
        return Err(Error::InvalidArgument(format!("{} rules, expected {expected}", system.rules().len())));
    }
    for (mfs, &range) in system.mfs().iter().zip(system.input_ranges()) {
        if mfs.iter().any(|mf| !mf.is_valid()) {
            return Err(Error::InvalidArgument("trapezoid breakpoints out of order".into()));
        }
        partition::partitions_1d(mfs, range)?;
    }
    Ok(())
}

/// Full training: initialization, consequent fit, then `premise_epochs`
/// sweeps of coordinate descent over every MF breakpoint with
/// accept-if-improved moves (the step of a breakpoint halves each time
/// neither direction improves). Each candidate premise is scored by the
/// training MSE after its own consequent refit.
pub fn train(data: &LabeledSet, config: &AnfisConfig) -> Result<TskSystem> {
    let init = init_from_data(data, config)?;
    let (mut best, mut best_mse) = fit_with_mse(&init, data, config.ridge_lambda)?;
    let ranges: Vec<(f64, f64)> = best.input_ranges().to_vec();
    let k = config.mfs_per_input;

    // (dim, mf, breakpoint) coordinates with their current steps.
    let mut coords: Vec<(usize, usize, usize, f64)> = Vec::new();
    for (dim, &(lo, hi)) in ranges.iter().enumerate() {
        for mf in 0..k {
            for bp in 0..4 {
                coords.push((dim, mf, bp, config.premise_step * (hi - lo)));
            }
        }
    }

    for _ in 0..config.premise_epochs {
        let mut any_live = false;
        for coord in coords.iter_mut() {
            let (dim, mf, bp, step) = *coord;
            let (lo, hi) = ranges[dim];
            if step <= 1e-9 * (hi - lo) {
                continue;
            }
            any_live = true;
            let mut accepted = false;
            for dir in [1.0, -1.0] {
                let mut mfs = best.mfs()[dim].clone();
                let mut p = mfs[mf].breakpoints();
                p[bp] += dir * step;
                mfs[mf] = TrapezoidalMf::from_breakpoints(p);
                if !admissible(&mfs, (lo, hi)) {
                    continue;
                }
                let mut candidate = best.clone();
                candidate.set_mfs(dim, mfs);
                match fit_with_mse(&candidate, data, config.ridge_lambda) {
                    Ok((fitted, mse)) if mse < best_mse => {
                        best = fitted;
                        best_mse = mse;
                        accepted = true;
                        break;
                    }
                    Ok(_) => {}
                    Err(e) if e.is_untrainable() => {}
                    Err(e) => return Err(e),
                }
            }
            if !accepted {
                coord.3 = step * 0.5;
            }
        }
        debug_assert!(check_invariants(&best).is_ok());
        if !any_live {
            break;
        }
    }
    check_invariants(&best)?;
    Ok(best)
}

/// Training MSE of a system on `data`.
pub fn training_mse(system: &TskSystem, data: &LabeledSet) -> Result<f64> {
    let mut sse = 0.0;
    for (x, y) in data.iter() {
        let e = system.infer(x)? - y;
        sse += e * e;
    }
    Ok(sse / data.len() as f64)
}

/// [`Learner`] wrapper around [`train`].
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AnfisLearner {
    pub config: AnfisConfig,
}

impl AnfisLearner {
    pub fn new(config: AnfisConfig) -> Self {
        Self { config }
    }
}

impl Learner for AnfisLearner {
    type Model = TskSystem;

    fn fit(&self, data: &LabeledSet) -> Result<TskSystem> {
        train(data, &self.config)
    }

    /// Three examples per consequent coefficient: `3·(M + 1)·K^M`.
    fn min_examples(&self, dims: usize) -> usize {
        let rules = self.config.mfs_per_input.pow(dims as u32);
        3 * (dims + 1) * rules
    }
}
