//! Deterministic generators for the benchmark problems.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use core::f64::consts::PI;
use serde::{Deserialize, Serialize};

use crate::data::LabeledSet;
use crate::error::{Error, Result};

fn linspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> + Clone {
    (0..n).map(move |i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
}

/// `x + x²` with an `8 sin x` bump on `[1.5, 3]` and a `2 sin x` bump on `[4, 5]`.
pub fn curve1d(x: f64) -> f64 {
    let base = x + x * x;
    if (1.5..=3.0).contains(&x) {
        base + 8.0 * libm::sin(x)
    } else if (4.0..=5.0).contains(&x) {
        base + 2.0 * libm::sin(x)
    } else {
        base
    }
}

/// 601 equally spaced samples of [`curve1d`] on `[0, 6]`.
pub fn gen_curve1d() -> LabeledSet {
    LabeledSet::from_rows(1, linspace(0.0, 6.0, 601).map(|x| (vec![x], curve1d(x))))
        .expect("finite grid")
        .with_provenance("curve1d")
}

/// `sin(x)/x` with the removable singularity filled in.
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        libm::sin(x) / x
    }
}

/// 30 × 30 grid of `sinc(x1)·sinc(x2)` on `[−10, 10]²`.
pub fn gen_sinc2d() -> LabeledSet {
    let axis = linspace(-10.0, 10.0, 30);
    let rows = axis.clone().flat_map(|a| axis.clone().map(move |b| (vec![a, b], sinc(a) * sinc(b))));
    LabeledSet::from_rows(2, rows).expect("finite grid").with_provenance("sinc2d")
}

pub fn manifold3d(x: &[f64]) -> f64 {
    let s = 1.0 + libm::sqrt(x[0]) + 1.0 / x[1] + libm::pow(x[2], -1.5);
    s * s
}

/// 11 × 11 × 11 grid of `(1 + x1^0.5 + x2^−1 + x3^−1.5)²` on `[1, 6]³`.
pub fn gen_manifold3d() -> LabeledSet {
    let axis = linspace(1.0, 6.0, 11);
    let mut rows = Vec::with_capacity(1331);
    for a in axis.clone() {
        for b in axis.clone() {
            for c in axis.clone() {
                let x = vec![a, b, c];
                let y = manifold3d(&x);
                rows.push((x, y));
            }
        }
    }
    LabeledSet::from_rows(3, rows).expect("finite grid").with_provenance("manifold3d")
}

/// The plant nonlinearity `0.6 sin(πu) + 0.3 sin(3πu) + 0.1 sin(5πu)`.
pub fn plant_f(u: f64) -> f64 {
    0.6 * libm::sin(PI * u) + 0.3 * libm::sin(3.0 * PI * u) + 0.1 * libm::sin(5.0 * PI * u)
}

/// Plant input at time index `k` (1-based).
pub fn plant_u(k: usize) -> f64 {
    let kf = k as f64;
    let slow = libm::sin(2.0 * PI * kf / 250.0);
    if k < 500 {
        slow
    } else {
        0.5 * slow + 0.5 * libm::sin(2.0 * PI * kf / 25.0)
    }
}

/// Streams of the identification benchmark
/// `y(k+1) = 0.3 y(k) + 0.6 y(k−1) + f(u(k))`, started from `y(1) = y(2) = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SysIdData {
    /// `u[k − 1] = u(k)` for `k = 1..=700`.
    pub u: Vec<f64>,
    /// `y[k − 1] = y(k)` for `k = 1..=701`.
    pub y: Vec<f64>,
    /// Identification pairs `(u(k), f(u(k)))` for `k = 1..=700`, row `k − 1`.
    pub pairs: LabeledSet,
}

impl SysIdData {
    pub const STEPS: usize = 700;
    pub const TRAIN_START: usize = 40;
    pub const TRAIN_END: usize = 250;

    pub fn u_at(&self, k: usize) -> f64 {
        self.u[k - 1]
    }

    pub fn y_at(&self, k: usize) -> f64 {
        self.y[k - 1]
    }

    /// `y(k+1) − 0.3 y(k) − 0.6 y(k−1)`, defined for `k ≥ 2`.
    pub fn recovered_f(&self, k: usize) -> f64 {
        self.y_at(k + 1) - 0.3 * self.y_at(k) - 0.6 * self.y_at(k - 1)
    }

    /// Pairs with `k` in `first..=last`.
    pub fn window(&self, first: usize, last: usize) -> LabeledSet {
        self.pairs.slice(first - 1, last)
    }
}

pub fn gen_sysid() -> SysIdData {
    let n = SysIdData::STEPS;
    let u: Vec<f64> = (1..=n).map(plant_u).collect();
    let mut y = vec![0.0; n + 1];
    for k in 2..=n {
        // y is 0-based: y[k] holds y(k+1).
        y[k] = 0.3 * y[k - 1] + 0.6 * y[k - 2] + plant_f(u[k - 1]);
    }
    let pairs = LabeledSet::from_rows(1, u.iter().map(|&v| (vec![v], plant_f(v))))
        .expect("finite streams")
        .with_provenance("sysid");
    SysIdData { u, y, pairs }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MackeyGlassConfig {
    pub tau: f64,
    pub x0: f64,
    pub steps_per_unit: usize,
    /// Last integer time emitted.
    pub horizon: usize,
    /// Embedding lags, in input order.
    pub lags: Vec<usize>,
    /// Prediction distance `P`.
    pub predict_ahead: usize,
    pub train_rows: usize,
    pub test_rows: usize,
}

impl Default for MackeyGlassConfig {
    fn default() -> Self {
        Self {
            tau: 17.0,
            x0: 1.2,
            steps_per_unit: 10,
            horizon: 1117,
            lags: vec![12, 6, 0],
            predict_ahead: 6,
            train_rows: 617,
            test_rows: 500,
        }
    }
}

impl MackeyGlassConfig {
    /// Delay measured in integration steps.
    pub fn delay_steps(&self) -> Result<usize> {
        if !(self.tau > 0.0) || self.steps_per_unit == 0 {
            return Err(Error::Config("tau and steps_per_unit must be positive".into()));
        }
        let d = self.tau * self.steps_per_unit as f64;
        let r = libm::round(d);
        if libm::fabs(d - r) > 1e-9 * d.max(1.0) {
            return Err(Error::Config(format!(
                "tau · steps_per_unit = {d} is not integral; delayed reads would fall between grid points"
            )));
        }
        Ok(r as usize)
    }
}

fn mg_rate(x: f64, delayed: f64) -> f64 {
    0.2 * delayed / (1.0 + libm::pow(delayed, 10.0)) - 0.1 * x
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MackeyGlass {
    /// `series[t]` for `t = 0..=horizon`.
    pub series: Vec<f64>,
    pub embedded: LabeledSet,
    pub train: LabeledSet,
    pub test: LabeledSet,
}

/// Integrates the delay equation on the fine grid with classical RK4.
///
/// History before `t = 0` is the constant `x0`. The half-step stages read the
/// delayed state as the mean of the two neighbouring grid values.
pub fn integrate_mackey_glass(config: &MackeyGlassConfig) -> Result<Vec<f64>> {
    let delay = config.delay_steps()?;
    let spu = config.steps_per_unit;
    let h = 1.0 / spu as f64;
    let steps = config.horizon * spu;
    let mut x = Vec::with_capacity(steps + 1);
    x.push(config.x0);
    let hist = |x: &[f64], i: isize| if i < 0 { config.x0 } else { x[i as usize] };
    for n in 0..steps {
        let cur = x[n];
        let lag = n as isize - delay as isize;
        let d0 = hist(&x, lag);
        let d1 = hist(&x, lag + 1);
        let dm = 0.5 * (d0 + d1);
        let k1 = mg_rate(cur, d0);
        let k2 = mg_rate(cur + 0.5 * h * k1, dm);
        let k3 = mg_rate(cur + 0.5 * h * k2, dm);
        let k4 = mg_rate(cur + h * k3, d1);
        x.push(cur + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
    }
    Ok(x.into_iter().step_by(spu).collect())
}

pub fn gen_mackey_glass(config: &MackeyGlassConfig) -> Result<MackeyGlass> {
    let series = integrate_mackey_glass(config)?;
    let embedded = apply_embedding(&series, &config.lags, config.predict_ahead)?.with_provenance("mackey-glass");
    let n = embedded.len();
    if config.train_rows > n || config.test_rows > n {
        return Err(Error::SeriesTooShort { needed: config.train_rows.max(config.test_rows), have: n });
    }
    let train = embedded.slice(0, config.train_rows).with_provenance("mackey-glass:train");
    let test = embedded.slice(n - config.test_rows, n).with_provenance("mackey-glass:test");
    Ok(MackeyGlass { series, embedded, train, test })
}

/// Delay embedding: one row per valid `t`, inputs `series[t − lag]` in the
/// order of `lags`, target `series[t + horizon]`.
pub fn apply_embedding(series: &[f64], lags: &[usize], horizon: usize) -> Result<LabeledSet> {
    if lags.is_empty() {
        return Err(Error::InvalidArgument("embedding needs at least one lag".into()));
    }
    let max_lag = *lags.iter().max().unwrap_or(&0);
    let needed = max_lag + horizon + 1;
    if series.len() < needed {
        return Err(Error::SeriesTooShort { needed, have: series.len() });
    }
    let rows = (max_lag..series.len() - horizon)
        .map(|t| (lags.iter().map(|&l| series[t - l]).collect::<Vec<f64>>(), series[t + horizon]));
    LabeledSet::from_rows(lags.len(), rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn curve1d_examples() {
        let d = gen_curve1d();
        assert_eq!(d.len(), 601);
        assert_eq!(d.input(0), &[0.0]);
        assert_eq!(d.input(600), &[6.0]);
        assert_eq!(curve1d(0.0), 0.0);
        assert_eq!(curve1d(5.5), 35.75);
        assert_abs_diff_eq!(curve1d(2.0), 13.274, epsilon = 1e-3);
        // Branch boundaries are closed.
        assert_abs_diff_eq!(curve1d(1.5), 3.75 + 8.0 * libm::sin(1.5), epsilon = 1e-12);
        assert_abs_diff_eq!(curve1d(5.0), 30.0 + 2.0 * libm::sin(5.0), epsilon = 1e-12);
    }

    #[test]
    fn sinc2d_examples() {
        assert_eq!(sinc(0.0), 1.0);
        assert_abs_diff_eq!(sinc(PI) * sinc(2.0), 0.0, epsilon = 1e-16);
        assert_abs_diff_eq!(sinc(10.0) * sinc(10.0), 0.002960, epsilon = 1e-6);
        let d = gen_sinc2d();
        assert_eq!(d.len(), 900);
        assert_eq!(d.input(899), &[10.0, 10.0]);
    }

    #[test]
    fn manifold_examples() {
        assert_eq!(manifold3d(&[1.0, 1.0, 1.0]), 16.0);
        assert_eq!(manifold3d(&[4.0, 1.0, 1.0]), 25.0);
        assert_abs_diff_eq!(manifold3d(&[6.0, 6.0, 6.0]), 13.574, epsilon = 1e-3);
        assert_eq!(gen_manifold3d().len(), 1331);
    }

    #[test]
    fn sysid_examples() {
        assert_eq!(plant_f(0.0), 0.0);
        assert_abs_diff_eq!(plant_f(1.0), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(plant_u(250), 0.0, epsilon = 1e-15);
        let s = gen_sysid();
        assert_eq!((s.u.len(), s.y.len(), s.pairs.len()), (700, 701, 700));
        assert_eq!((s.y_at(1), s.y_at(2)), (0.0, 0.0));
        for k in 2..=700 {
            assert_abs_diff_eq!(s.recovered_f(k), plant_f(s.u_at(k)), epsilon = 1e-14);
        }
        assert_eq!(s.window(40, 250).len(), 211);
    }

    #[test]
    fn embedding_examples() {
        let series: Vec<f64> = (0..=20).map(|v| v as f64).collect();
        let d = apply_embedding(&series, &[2, 0], 1).unwrap();
        assert_eq!(d.input(0), &[0.0, 2.0]);
        assert_eq!(d.target(0), 3.0);
        let id = apply_embedding(&series, &[0], 0).unwrap();
        assert_eq!(id.len(), 21);
        assert!(id.iter().all(|(x, y)| x[0] == y));
        let flat = apply_embedding(&[0.7; 10], &[3, 1], 2).unwrap();
        assert!(flat.iter().all(|(x, y)| x == [0.7, 0.7] && y == 0.7));
        assert!(matches!(apply_embedding(&series, &[15], 6), Err(Error::SeriesTooShort { .. })));
    }

    #[test]
    fn mackey_glass_shape_and_start() {
        let mg = gen_mackey_glass(&MackeyGlassConfig::default()).unwrap();
        assert_eq!(mg.series.len(), 1118);
        assert_eq!(mg.series[0], 1.2);
        assert_eq!((mg.train.len(), mg.test.len()), (617, 500));
        assert!(mg.series.iter().all(|&v| v > 0.0 && v < 1.6));
    }

    #[test]
    fn non_integral_delay_rejected() {
        let cfg = MackeyGlassConfig { tau: 17.05, ..MackeyGlassConfig::default() };
        assert!(matches!(gen_mackey_glass(&cfg), Err(Error::Config(_))));
    }
}
