//! Dense least squares via Householder QR.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Relative threshold on the diagonal of R below which the design is treated
/// as rank deficient.
const RANK_TOL: f64 = 1e-11;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length");
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }
}

/// Solves `min ‖A·β − b‖² + ridge·‖β‖²`.
///
/// The ridge term is handled by appending `sqrt(ridge)·I` rows to the design,
/// so the factorization never forms the normal equations. Returns
/// [`Error::Untrainable`] when the (augmented) design is rank deficient.
pub fn least_squares(a: &Matrix, b: &[f64], ridge: f64) -> Result<Vec<f64>> {
    let (n, p) = (a.rows(), a.cols());
    if b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: b.len() });
    }
    if ridge < 0.0 || !ridge.is_finite() {
        return Err(Error::InvalidArgument(format!("ridge must be >= 0, got {ridge}")));
    }
    if p == 0 {
        return Ok(Vec::new());
    }
    let extra = if ridge > 0.0 { p } else { 0 };
    let m = n + extra;
    if m < p {
        return Err(Error::Untrainable(format!("{n} equations for {p} unknowns")));
    }

    // Column-major copy makes the Householder sweeps contiguous.
    let mut q = vec![0.0; m * p];
    for r in 0..n {
        let row = a.row(r);
        for c in 0..p {
            q[c * m + r] = row[c];
        }
    }
    let sr = libm::sqrt(ridge);
    for c in 0..extra {
        q[c * m + n + c] = sr;
    }
    let mut rhs = vec![0.0; m];
    rhs[..n].copy_from_slice(b);

    let mut diag = vec![0.0; p];
    for k in 0..p {
        let col = &mut q[k * m..(k + 1) * m];
        let norm = libm::sqrt(col[k..].iter().map(|v| v * v).sum::<f64>());
        if norm == 0.0 {
            diag[k] = 0.0;
            continue;
        }
        let alpha = if col[k] > 0.0 { -norm } else { norm };
        col[k] -= alpha;
        let vnorm2: f64 = col[k..].iter().map(|v| v * v).sum();
        diag[k] = alpha;
        if vnorm2 == 0.0 {
            continue;
        }
        let (head, tail) = q.split_at_mut((k + 1) * m);
        let v = &head[k * m..(k + 1) * m];
        for j in 0..(p - k - 1) {
            let cj = &mut tail[j * m..(j + 1) * m];
            let s: f64 = v[k..].iter().zip(&cj[k..]).map(|(x, y)| x * y).sum();
            let f = 2.0 * s / vnorm2;
            for (y, x) in cj[k..].iter_mut().zip(&v[k..]) {
                *y -= f * x;
            }
        }
        let s: f64 = v[k..].iter().zip(&rhs[k..]).map(|(x, y)| x * y).sum();
        let f = 2.0 * s / vnorm2;
        for (y, x) in rhs[k..].iter_mut().zip(&v[k..]) {
            *y -= f * x;
        }
    }

    let scale = diag.iter().fold(0.0_f64, |acc, d| acc.max(libm::fabs(*d)));
    if scale == 0.0 || diag.iter().any(|d| libm::fabs(*d) <= RANK_TOL * scale) {
        return Err(Error::Untrainable("rank-deficient design".into()));
    }

    // Back substitution with R stored above the diagonal of q, diag separately.
    let mut beta = vec![0.0; p];
    for k in (0..p).rev() {
        let mut s = rhs[k];
        for j in (k + 1)..p {
            s -= q[j * m + k] * beta[j];
        }
        beta[k] = s / diag[k];
    }
    Ok(beta)
}
