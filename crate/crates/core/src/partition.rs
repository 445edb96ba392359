//! First-order rule partitions and patch boxes.
//!
//! Along one input, a first-order rule partition is a maximal interval on
//! which the set of MFs with positive membership does not change. The
//! Cartesian product of the per-input partitions gives the patch candidates,
//! addressed either by a multi-index `(k_1, .., k_M)` or by the flat index
//! `k = k_M + Σ_{m<M} (k_m − 1)·Π_{p>m} K_p` (all indices 1-based).
//!
//! Boundary ownership: every interval is closed below and open above, except
//! the last interval of each input, which is closed at both ends. The boxes of
//! a grid therefore tile the input range without overlap.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fuzzy::{TrapezoidalMf, TskSystem};

/// Breakpoints closer than this fraction of the range width are merged.
const MERGE_TOL: f64 = 1e-9;

/// An axis-aligned box in the input domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatchBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    /// Whether `hi[m]` itself belongs to the box.
    pub upper_closed: Vec<bool>,
    /// 1-based flat index within the source grid (or position in an explicit list).
    pub flat_index: usize,
    /// 1-based per-dimension partition indices.
    pub multi_index: Vec<usize>,
}

impl PatchBox {
    /// A box closed at both ends in every dimension.
    pub fn closed(lo: Vec<f64>, hi: Vec<f64>, flat_index: usize) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::DimensionMismatch { expected: lo.len(), got: hi.len() });
        }
        if lo.iter().zip(&hi).any(|(l, h)| !(l < h)) {
            return Err(Error::InvalidArgument("patch box needs lo < hi in every dimension".into()));
        }
        let m = lo.len();
        Ok(Self { lo, hi, upper_closed: vec![true; m], flat_index, multi_index: vec![flat_index] })
    }

    pub fn dims(&self) -> usize {
        self.lo.len()
    }

    #[inline]
    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.lo.len()
            && x.iter().enumerate().all(|(m, &v)| {
                v >= self.lo[m] && (v < self.hi[m] || (self.upper_closed[m] && v <= self.hi[m]))
            })
    }

    /// True when no point belongs to both boxes.
    pub fn is_disjoint(&self, other: &PatchBox) -> bool {
        (0..self.dims()).any(|m| {
            let sep = |a_hi: f64, a_closed: bool, b_lo: f64| a_hi < b_lo || (a_hi == b_lo && !a_closed);
            sep(self.hi[m], self.upper_closed[m], other.lo[m]) || sep(other.hi[m], other.upper_closed[m], self.lo[m])
        })
    }
}

impl core::fmt::Display for PatchBox {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        for m in 0..self.dims() {
            if m > 0 {
                f.write_str("x")?;
            }
            let close = if self.upper_closed[m] { ']' } else { ')' };
            write!(f, "[{:.4},{:.4}{}", self.lo[m], self.hi[m], close)?;
        }
        Ok(())
    }
}

/// Per-input rule partitions of a fuzzy system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionGrid {
    pub per_dim: Vec<Vec<(f64, f64)>>,
}

impl PartitionGrid {
    pub fn from_system(system: &TskSystem) -> Result<Self> {
        let per_dim = system
            .mfs()
            .iter()
            .zip(system.input_ranges())
            .map(|(mfs, &range)| partitions_1d(mfs, range))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { per_dim })
    }

    /// `K_m` for every input.
    pub fn dims(&self) -> Vec<usize> {
        self.per_dim.iter().map(Vec::len).collect()
    }

    pub fn total(&self) -> usize {
        self.per_dim.iter().map(Vec::len).product()
    }

    /// Box for flat index `k` (1-based).
    pub fn patch_box(&self, k: usize) -> Result<PatchBox> {
        let dims = self.dims();
        let multi = multi_index(k, &dims)?;
        let mut lo = Vec::with_capacity(dims.len());
        let mut hi = Vec::with_capacity(dims.len());
        let mut upper_closed = Vec::with_capacity(dims.len());
        for (m, &km) in multi.iter().enumerate() {
            let (l, h) = self.per_dim[m][km - 1];
            lo.push(l);
            hi.push(h);
            upper_closed.push(km == dims[m]);
        }
        Ok(PatchBox { lo, hi, upper_closed, flat_index: k, multi_index: multi })
    }

    /// All boxes, ordered by flat index.
    pub fn boxes(&self) -> Result<Vec<PatchBox>> {
        (1..=self.total()).map(|k| self.patch_box(k)).collect()
    }
}

fn fired_set(mfs: &[TrapezoidalMf], x: f64) -> Vec<bool> {
    mfs.iter().map(|mf| mf.membership(x) > 0.0).collect()
}

/// First-order rule partitions of one input over `range`.
///
/// Candidate breakpoints are the range ends plus every MF foot inside the
/// range; adjacent intervals firing the same MF set are merged. Fails with
/// [`Error::UncoveredRange`] where no MF fires.
pub fn partitions_1d(mfs: &[TrapezoidalMf], range: (f64, f64)) -> Result<Vec<(f64, f64)>> {
    let (lo, hi) = range;
    if !(lo < hi) {
        return Err(Error::InvalidArgument("partition range needs lo < hi".into()));
    }
    let tol = MERGE_TOL * (hi - lo);
    let mut points = vec![lo, hi];
    points.extend(mfs.iter().flat_map(|mf| [mf.a, mf.d]).filter(|&p| p > lo && p < hi));
    points.sort_by(f64::total_cmp);
    let mut merged: Vec<f64> = Vec::with_capacity(points.len());
    for p in points {
        match merged.last() {
            Some(&q) if p - q <= tol => {}
            _ => merged.push(p),
        }
    }
    // Snap the last point to hi when a foot sat within tolerance of it.
    if let Some(last) = merged.last_mut() {
        *last = hi;
    }

    let mut out: Vec<((f64, f64), Vec<bool>)> = Vec::new();
    for w in merged.windows(2) {
        let (p, q) = (w[0], w[1]);
        let set = fired_set(mfs, 0.5 * (p + q));
        if !set.contains(&true) {
            return Err(Error::UncoveredRange { lo: p, hi: q });
        }
        match out.last_mut() {
            Some((iv, prev)) if *prev == set => iv.1 = q,
            _ => out.push(((p, q), set)),
        }
    }
    for &p in &merged {
        if !fired_set(mfs, p).contains(&true) {
            return Err(Error::UncoveredRange { lo: p, hi: p });
        }
    }
    Ok(out.into_iter().map(|(iv, _)| iv).collect())
}

fn suffix_products(dims: &[usize]) -> Result<Vec<usize>> {
    // strides[m] = Π_{p>m} K_p
    let mut strides = vec![1usize; dims.len()];
    for m in (0..dims.len().saturating_sub(1)).rev() {
        strides[m] = strides[m + 1]
            .checked_mul(dims[m + 1])
            .ok_or_else(|| Error::InvalidArgument("partition count overflows usize".into()))?;
    }
    Ok(strides)
}

fn check_dims(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::InvalidArgument("every dimension needs at least one partition".into()));
    }
    dims.iter()
        .try_fold(1usize, |acc, &k| acc.checked_mul(k))
        .ok_or_else(|| Error::InvalidArgument("partition count overflows usize".into()))
}

/// Flat index of a multi-index, both 1-based.
pub fn flat_index(multi: &[usize], dims: &[usize]) -> Result<usize> {
    check_dims(dims)?;
    if multi.len() != dims.len() {
        return Err(Error::DimensionMismatch { expected: dims.len(), got: multi.len() });
    }
    if let Some((&k, &max)) = multi.iter().zip(dims).find(|(&k, &max)| k == 0 || k > max) {
        return Err(Error::IndexOutOfRange { index: k, max });
    }
    let strides = suffix_products(dims)?;
    let last = dims.len() - 1;
    Ok(multi[last] + (0..last).map(|m| (multi[m] - 1) * strides[m]).sum::<usize>())
}

/// Inverse of [`flat_index`].
pub fn multi_index(k: usize, dims: &[usize]) -> Result<Vec<usize>> {
    let total = check_dims(dims)?;
    if k == 0 || k > total {
        return Err(Error::IndexOutOfRange { index: k, max: total });
    }
    let strides = suffix_products(dims)?;
    let last = dims.len() - 1;
    let mut out = Vec::with_capacity(dims.len());
    // Remaining offset k − 1 − Σ_{i<m} (k_i − 1)·stride_i, peeled one input at a time.
    let mut rest = k - 1;
    for &stride in &strides[..last] {
        let km = rest / stride + 1;
        rest -= (km - 1) * stride;
        out.push(km);
    }
    out.push(rest + 1);
    Ok(out)
}

/// Every first-order rule partition box of `system`, ordered by flat index.
pub fn candidate_boxes(system: &TskSystem) -> Result<Vec<PatchBox>> {
    PartitionGrid::from_system(system)?.boxes()
}
