//! Error metrics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Targets with magnitude at or below this are left out of the APE average.
pub const APE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub rmse: f64,
    pub sse: f64,
    /// Mean absolute relative error, as a fraction.
    pub ape: f64,
}

pub fn metrics(predictions: &[f64], targets: &[f64]) -> Result<Metrics> {
    if predictions.len() != targets.len() {
        return Err(Error::DimensionMismatch { expected: targets.len(), got: predictions.len() });
    }
    if targets.is_empty() {
        return Err(Error::EmptyData);
    }
    let sse = sse(predictions, targets);
    let (rel, count) = predictions
        .iter()
        .zip(targets)
        .filter(|(_, y)| libm::fabs(**y) > APE_EPS)
        .fold((0.0, 0usize), |(s, n), (p, y)| (s + libm::fabs(y - p) / libm::fabs(*y), n + 1));
    Ok(Metrics {
        rmse: libm::sqrt(sse / targets.len() as f64),
        sse,
        ape: if count == 0 { 0.0 } else { rel / count as f64 },
    })
}

pub fn sse(predictions: &[f64], targets: &[f64]) -> f64 {
    predictions.iter().zip(targets).map(|(p, y)| (p - y) * (p - y)).sum()
}

pub fn rmse(predictions: &[f64], targets: &[f64]) -> f64 {
    if targets.is_empty() {
        return 0.0;
    }
    libm::sqrt(sse(predictions, targets) / targets.len() as f64)
}
