use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::data::LabeledSet;
use crate::error::{Error, Result};
use crate::learner::{Learner, Regressor};
use crate::linalg::{self, Matrix};

/// Per-input polynomial without cross terms.
///
/// Coefficients are ordered by power, then by input:
/// `[β_0, β(x_1), .., β(x_M), β(x_1²), .., β(x_M²)]`, so there are
/// `1 + degree·M` of them. For one input this is `β_0 + β_1 x + β_2 x²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialModel {
    pub degree: usize,
    pub dims: usize,
    pub coefficients: Vec<f64>,
}

fn features(x: &[f64], degree: usize, out: &mut [f64]) {
    let m = x.len();
    out[0] = 1.0;
    for (t, &v) in x.iter().enumerate() {
        let mut pow = v;
        for d in 0..degree {
            out[1 + d * m + t] = pow;
            pow *= v;
        }
    }
}

impl PolynomialModel {
    pub fn coefficient_count(degree: usize, dims: usize) -> usize {
        1 + degree * dims
    }
}

impl Regressor for PolynomialModel {
    fn predict(&self, x: &[f64]) -> f64 {
        let mut f = alloc::vec![0.0; self.coefficients.len()];
        features(x, self.degree, &mut f);
        f.iter().zip(&self.coefficients).map(|(a, b)| a * b).sum()
    }
}

/// Ordinary least squares. A design with fewer examples than coefficients,
/// or a rank-deficient one, is reported as [`Error::Untrainable`].
pub fn poly_fit(data: &LabeledSet, degree: usize) -> Result<PolynomialModel> {
    if !(1..=2).contains(&degree) {
        return Err(Error::Config(format!("polynomial degree must be 1 or 2, got {degree}")));
    }
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    let dims = data.dims();
    let p = PolynomialModel::coefficient_count(degree, dims);
    if data.len() < p {
        return Err(Error::Untrainable(format!("{} examples for {p} coefficients", data.len())));
    }
    let mut design = Matrix::zeros(data.len(), p);
    for (i, (x, _)) in data.iter().enumerate() {
        features(x, degree, design.row_mut(i));
    }
    let coefficients = linalg::least_squares(&design, data.targets(), 0.0)?;
    Ok(PolynomialModel { degree, dims, coefficients })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PolynomialLearner {
    pub degree: usize,
}

impl Learner for PolynomialLearner {
    type Model = PolynomialModel;

    fn fit(&self, data: &LabeledSet) -> Result<PolynomialModel> {
        poly_fit(data, self.degree)
    }

    /// Three examples per coefficient.
    fn min_examples(&self, dims: usize) -> usize {
        3 * PolynomialModel::coefficient_count(self.degree, dims)
    }
}
