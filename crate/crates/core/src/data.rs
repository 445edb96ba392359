use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A regression data set: `len()` rows of `dims()` inputs plus one target each.
///
/// Inputs are stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSet {
    dims: usize,
    inputs: Vec<f64>,
    targets: Vec<f64>,
    /// Free-form origin tag, e.g. `"curve1d"` or `"mackey-glass:train"`.
    pub provenance: String,
}

impl LabeledSet {
    pub fn new(dims: usize, inputs: Vec<f64>, targets: Vec<f64>) -> Result<Self> {
        if dims == 0 {
            return Err(Error::InvalidArgument("input dimension must be positive".into()));
        }
        if inputs.len() != dims * targets.len() {
            return Err(Error::DimensionMismatch { expected: dims * targets.len(), got: inputs.len() });
        }
        if inputs.iter().chain(&targets).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite value in data".into()));
        }
        Ok(Self { dims, inputs, targets, provenance: String::new() })
    }

    pub fn from_rows<I>(dims: usize, rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<f64>, f64)>,
    {
        let mut inputs = Vec::new();
        let mut targets = Vec::new();
        for (x, y) in rows {
            if x.len() != dims {
                return Err(Error::DimensionMismatch { expected: dims, got: x.len() });
            }
            inputs.extend_from_slice(&x);
            targets.push(y);
        }
        Self::new(dims, inputs, targets)
    }

    pub fn with_provenance(mut self, tag: impl Into<String>) -> Self {
        self.provenance = tag.into();
        self
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    #[inline]
    pub fn input(&self, i: usize) -> &[f64] {
        &self.inputs[i * self.dims..(i + 1) * self.dims]
    }

    #[inline]
    pub fn target(&self, i: usize) -> f64 {
        self.targets[i]
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn inputs(&self) -> &[f64] {
        &self.inputs
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.inputs.chunks_exact(self.dims).zip(self.targets.iter().copied())
    }

    /// Rows at `indices`, in that order (duplicates allowed).
    pub fn select(&self, indices: &[usize]) -> LabeledSet {
        let mut inputs = Vec::with_capacity(indices.len() * self.dims);
        let mut targets = Vec::with_capacity(indices.len());
        for &i in indices {
            inputs.extend_from_slice(self.input(i));
            targets.push(self.targets[i]);
        }
        LabeledSet { dims: self.dims, inputs, targets, provenance: self.provenance.clone() }
    }

    /// Rows `start..end`.
    pub fn slice(&self, start: usize, end: usize) -> LabeledSet {
        LabeledSet {
            dims: self.dims,
            inputs: self.inputs[start * self.dims..end * self.dims].to_vec(),
            targets: self.targets[start..end].to_vec(),
            provenance: self.provenance.clone(),
        }
    }

    /// Per-dimension `[min, max]` of the inputs.
    pub fn input_ranges(&self) -> Vec<(f64, f64)> {
        let mut ranges = alloc::vec![(f64::INFINITY, f64::NEG_INFINITY); self.dims];
        for x in self.inputs.chunks_exact(self.dims) {
            for (r, &v) in ranges.iter_mut().zip(x) {
                r.0 = r.0.min(v);
                r.1 = r.1.max(v);
            }
        }
        ranges
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn rejects_ragged_input() {
        assert!(LabeledSet::new(2, vec![1.0, 2.0, 3.0], vec![1.0, 2.0]).is_err());
        assert!(LabeledSet::new(1, vec![f64::NAN], vec![1.0]).is_err());
    }

    #[test]
    fn select_and_ranges() {
        let d = LabeledSet::from_rows(2, [(vec![0.0, 5.0], 1.0), (vec![2.0, -1.0], 2.0)]).unwrap();
        assert_eq!(d.input_ranges(), vec![(0.0, 2.0), (-1.0, 5.0)]);
        let s = d.select(&[1, 1]);
        assert_eq!(s.len(), 2);
        assert_eq!(s.input(0), &[2.0, -1.0]);
        assert_eq!(s.target(1), 2.0);
    }
}
