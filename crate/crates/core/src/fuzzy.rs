//! Trapezoidal membership functions and first-order TSK inference.
//!
//! Antecedents are combined with the product t-norm and the output is the
//! firing-strength-weighted average of the rules' affine consequents.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learner::Regressor;
use crate::partition::{self, PatchBox};

/// Trapezoid with feet `a`, `d` and shoulders `b`, `c`.
///
/// Membership is 0 outside `[a, d]`, 1 on `[b, c]` and linear on the edges.
/// A vertical edge (`a == b` or `c == d`) belongs to the plateau, so
/// `membership(a) == 1` when `a == b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrapezoidalMf {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl TrapezoidalMf {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let mf = Self { a, b, c, d };
        if mf.is_valid() {
            Ok(mf)
        } else {
            Err(Error::InvalidArgument(format!("trapezoid breakpoints out of order: ({a}, {b}, {c}, {d})")))
        }
    }

    pub fn is_valid(&self) -> bool {
        [self.a, self.b, self.c, self.d].iter().all(|v| v.is_finite())
            && self.a <= self.b
            && self.b <= self.c
            && self.c <= self.d
    }

    #[inline]
    pub fn membership(&self, x: f64) -> f64 {
        if x < self.a || x > self.d {
            0.0
        } else if x >= self.b && x <= self.c {
            1.0
        } else if x < self.b {
            (x - self.a) / (self.b - self.a)
        } else {
            (self.d - x) / (self.d - self.c)
        }
    }

    pub fn breakpoints(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn from_breakpoints(p: [f64; 4]) -> Self {
        Self { a: p[0], b: p[1], c: p[2], d: p[3] }
    }
}

/// One rule of the grid: an MF index per input plus `M + 1` consequent
/// coefficients `b_0, b_1..b_M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TskRule {
    pub antecedent: Vec<usize>,
    pub consequent: Vec<f64>,
}

impl TskRule {
    #[inline]
    pub fn consequent_at(&self, x: &[f64]) -> f64 {
        self.consequent[0] + self.consequent[1..].iter().zip(x).map(|(b, v)| b * v).sum::<f64>()
    }
}

/// Grid-partitioned first-order TSK fuzzy system.
///
/// Holds one rule per element of the Cartesian product of the per-dimension
/// MF lists, ordered with the last dimension varying fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TskSystem {
    mfs: Vec<Vec<TrapezoidalMf>>,
    rules: Vec<TskRule>,
    input_ranges: Vec<(f64, f64)>,
}

impl TskSystem {
    /// Builds the full rule grid with zero consequents.
    pub fn new(mfs: Vec<Vec<TrapezoidalMf>>, input_ranges: Vec<(f64, f64)>) -> Result<Self> {
        if mfs.is_empty() {
            return Err(Error::InvalidArgument("system needs at least one input".into()));
        }
        if mfs.len() != input_ranges.len() {
            return Err(Error::DimensionMismatch { expected: mfs.len(), got: input_ranges.len() });
        }
        if mfs.iter().any(|m| m.is_empty()) {
            return Err(Error::InvalidArgument("every input needs at least one MF".into()));
        }
        if let Some(mf) = mfs.iter().flatten().find(|mf| !mf.is_valid()) {
            return Err(Error::InvalidArgument(format!("invalid trapezoid {mf:?}")));
        }
        let dims = mfs.len();
        let counts: Vec<usize> = mfs.iter().map(Vec::len).collect();
        let total: usize = counts.iter().product();
        let mut rules = Vec::with_capacity(total);
        let mut idx = vec![0usize; dims];
        for _ in 0..total {
            rules.push(TskRule { antecedent: idx.clone(), consequent: vec![0.0; dims + 1] });
            for m in (0..dims).rev() {
                idx[m] += 1;
                if idx[m] < counts[m] {
                    break;
                }
                idx[m] = 0;
            }
        }
        Ok(Self { mfs, rules, input_ranges })
    }

    /// Replaces every rule's consequent; `coeffs` is rule-major, `M + 1` per rule.
    pub fn with_consequents(mut self, coeffs: &[f64]) -> Result<Self> {
        let width = self.dims() + 1;
        if coeffs.len() != width * self.rules.len() {
            return Err(Error::DimensionMismatch { expected: width * self.rules.len(), got: coeffs.len() });
        }
        for (rule, c) in self.rules.iter_mut().zip(coeffs.chunks_exact(width)) {
            rule.consequent.copy_from_slice(c);
        }
        Ok(self)
    }

    pub fn dims(&self) -> usize {
        self.mfs.len()
    }

    pub fn mfs(&self) -> &[Vec<TrapezoidalMf>] {
        &self.mfs
    }

    pub fn rules(&self) -> &[TskRule] {
        &self.rules
    }

    pub fn rules_mut(&mut self) -> &mut [TskRule] {
        &mut self.rules
    }

    pub fn input_ranges(&self) -> &[(f64, f64)] {
        &self.input_ranges
    }

    /// Replaces the MFs of one dimension, keeping the rule grid.
    pub(crate) fn set_mfs(&mut self, dim: usize, mfs: Vec<TrapezoidalMf>) {
        debug_assert_eq!(mfs.len(), self.mfs[dim].len());
        self.mfs[dim] = mfs;
    }

    fn check_dims(&self, x: &[f64]) -> Result<()> {
        if x.len() == self.dims() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected: self.dims(), got: x.len() })
        }
    }

    /// Product of the rule's antecedent memberships at `x`.
    pub fn rule_firing(&self, rule: &TskRule, x: &[f64]) -> Result<f64> {
        self.check_dims(x)?;
        if rule.antecedent.len() != self.dims() {
            return Err(Error::DimensionMismatch { expected: self.dims(), got: rule.antecedent.len() });
        }
        let mut w = 1.0;
        for ((m, &k), &v) in rule.antecedent.iter().enumerate().zip(x) {
            let mf = self
                .mfs[m]
                .get(k)
                .ok_or(Error::IndexOutOfRange { index: k + 1, max: self.mfs[m].len() })?;
            w *= mf.membership(v);
        }
        Ok(w)
    }

    /// Writes every rule's firing strength at `x` into `out` and returns their sum.
    pub fn firing_strengths(&self, x: &[f64], out: &mut [f64]) -> Result<f64> {
        self.check_dims(x)?;
        debug_assert_eq!(out.len(), self.rules.len());
        let per_dim: Vec<Vec<f64>> = self
            .mfs
            .iter()
            .zip(x)
            .map(|(mfs, &v)| mfs.iter().map(|mf| mf.membership(v)).collect())
            .collect();
        let mut total = 0.0;
        for (w, rule) in out.iter_mut().zip(&self.rules) {
            *w = rule.antecedent.iter().enumerate().map(|(m, &k)| per_dim[m][k]).product();
            total += *w;
        }
        Ok(total)
    }

    /// Firing-strength-weighted average of the consequents at `x`.
    pub fn infer(&self, x: &[f64]) -> Result<f64> {
        let mut w = vec![0.0; self.rules.len()];
        let total = self.firing_strengths(x, &mut w)?;
        if total <= 0.0 {
            return Err(Error::UncoveredInput(x.to_vec()));
        }
        let num: f64 = w
            .iter()
            .zip(&self.rules)
            .filter(|(w, _)| **w > 0.0)
            .map(|(w, r)| w * r.consequent_at(x))
            .sum();
        Ok(num / total)
    }

    /// `x` clamped into the recorded training range.
    pub fn clamp_to_range(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.input_ranges).map(|(&v, &(lo, hi))| v.clamp(lo, hi)).collect()
    }
}

impl Regressor for TskSystem {
    /// Inference with the uncovered-input fallback: an input no rule fires on
    /// is clamped to the training range first.
    fn predict(&self, x: &[f64]) -> f64 {
        match self.infer(x) {
            Ok(y) => y,
            Err(Error::UncoveredInput(_)) => self.infer(&self.clamp_to_range(x)).unwrap_or(f64::NAN),
            Err(_) => f64::NAN,
        }
    }

    fn rule_partitions(&self) -> Option<Result<Vec<PatchBox>>> {
        Some(partition::candidate_boxes(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn mf(a: f64, b: f64, c: f64, d: f64) -> TrapezoidalMf {
        TrapezoidalMf::new(a, b, c, d).unwrap()
    }

    #[test]
    fn membership_examples() {
        let t = mf(0.0, 1.0, 2.0, 3.0);
        assert_eq!(t.membership(1.5), 1.0);
        assert_eq!(t.membership(5.0), 0.0);
        assert_eq!(t.membership(0.5), 0.5);
        assert_eq!(t.membership(2.5), 0.5);
        assert_eq!(t.membership(0.0), 0.0);
        assert_eq!(t.membership(3.0), 0.0);
    }

    #[test]
    fn degenerate_edges_belong_to_plateau() {
        let left = mf(0.0, 0.0, 2.0, 4.0);
        assert_eq!(left.membership(0.0), 1.0);
        assert_eq!(left.membership(-1e-12), 0.0);
        let right = mf(2.0, 4.0, 6.0, 6.0);
        assert_eq!(right.membership(6.0), 1.0);
        assert_eq!(right.membership(6.0 + 1e-12), 0.0);
    }

    #[test]
    fn rejects_unordered_breakpoints() {
        assert!(TrapezoidalMf::new(1.0, 0.0, 2.0, 3.0).is_err());
        assert!(TrapezoidalMf::new(0.0, 1.0, 2.0, f64::NAN).is_err());
    }

    fn one_dim(consequents: &[f64]) -> TskSystem {
        TskSystem::new(vec![vec![mf(0.0, 0.0, 2.0, 4.0), mf(2.0, 4.0, 6.0, 6.0)]], vec![(0.0, 6.0)])
            .unwrap()
            .with_consequents(consequents)
            .unwrap()
    }

    #[test]
    fn firing_is_product_of_memberships() {
        let sys = TskSystem::new(
            vec![vec![mf(0.0, 1.0, 2.0, 3.0)], vec![mf(0.0, 1.0, 2.0, 3.0)]],
            vec![(0.0, 3.0), (0.0, 3.0)],
        )
        .unwrap();
        let r = &sys.rules()[0];
        assert_eq!(sys.rule_firing(r, &[1.5, 1.5]).unwrap(), 1.0);
        assert_eq!(sys.rule_firing(r, &[0.5, 0.0]).unwrap(), 0.0);
        assert_eq!(sys.rule_firing(r, &[0.5, 1.0]).unwrap(), 0.5);
        assert!(matches!(sys.rule_firing(r, &[1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn single_rule_region_returns_its_consequent() {
        let sys = one_dim(&[1.0, 2.0, -3.0, 0.5]);
        assert_abs_diff_eq!(sys.infer(&[1.0]).unwrap(), 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(sys.infer(&[5.0]).unwrap(), -0.5, epsilon = 1e-15);
    }

    #[test]
    fn weighted_average_of_consequents() {
        // Constant consequents 1 and 5; at x = 3.5 the weights are 0.25 / 0.75.
        let sys = one_dim(&[1.0, 0.0, 5.0, 0.0]);
        assert_abs_diff_eq!(sys.infer(&[3.5]).unwrap(), 0.25 * 1.0 + 0.75 * 5.0, epsilon = 1e-12);
        // Equal weights at x = 3 with values 2 and 4.
        let sys = one_dim(&[2.0, 0.0, 4.0, 0.0]);
        assert_abs_diff_eq!(sys.infer(&[3.0]).unwrap(), 3.0, epsilon = 1e-12);
    }

    #[test]
    fn uncovered_input_is_an_error_and_predict_clamps() {
        let sys = one_dim(&[1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(sys.infer(&[7.0]), Err(Error::UncoveredInput(_))));
        assert_abs_diff_eq!(sys.predict(&[7.0]), 1.0 + 6.0, epsilon = 1e-12);
    }

    #[test]
    fn rule_grid_is_last_dimension_fastest() {
        let two = vec![mf(0.0, 0.0, 0.4, 0.6), mf(0.4, 0.6, 1.0, 1.0)];
        let sys = TskSystem::new(vec![two.clone(), two], vec![(0.0, 1.0); 2]).unwrap();
        let ants: Vec<Vec<usize>> = sys.rules().iter().map(|r| r.antecedent.clone()).collect();
        assert_eq!(ants, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
    }
}
