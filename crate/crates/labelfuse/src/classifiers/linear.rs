//! Linear decision functions with optional sigmoid calibration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numerically stable logistic function `1 / (1 + exp(-z))`.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Stable `ln(1 + exp(z))`.
pub fn log1p_exp(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// A linear score `w . x + b`, mapped to a probability either directly
/// through the logistic function (logistic regression) or through a fitted
/// Platt sigmoid `1 / (1 + exp(A s + B))` (calibrated SVM).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Platt parameters `(A, B)`; `None` means the raw score is already a
    /// log-odds and goes through the plain sigmoid.
    pub calibration: Option<(f64, f64)>,
}

impl LinearModel {
    pub fn new(weights: Vec<f64>, bias: f64, calibration: Option<(f64, f64)>) -> Result<Self> {
        if !bias.is_finite() || weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidData("non-finite linear model weights".into()));
        }
        if let Some((a, b)) = calibration {
            if !a.is_finite() || !b.is_finite() {
                return Err(Error::InvalidData("non-finite calibration parameters".into()));
            }
        }
        Ok(Self { weights, bias, calibration })
    }

    pub fn n_features(&self) -> usize {
        self.weights.len()
    }

    pub fn raw_score_sparse(&self, features: &[(usize, f64)]) -> Result<f64> {
        let mut s = self.bias;
        for &(t, v) in features {
            let w = self.weights.get(t).ok_or_else(|| {
                Error::DimensionMismatch(format!(
                    "feature index {t} out of range for model with m={}",
                    self.weights.len()
                ))
            })?;
            s += w * v;
        }
        Ok(s)
    }

    pub fn raw_score_dense(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.weights.len() {
            return Err(Error::DimensionMismatch(format!(
                "input has {} features, model expects {}",
                x.len(),
                self.weights.len()
            )));
        }
        Ok(self.bias + self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>())
    }

    /// Map a raw score to a probability.
    pub fn probability(&self, raw: f64) -> f64 {
        match self.calibration {
            Some((a, b)) => sigmoid(-(a * raw + b)),
            None => sigmoid(raw),
        }
    }

    pub fn predict_proba_sparse(&self, features: &[(usize, f64)]) -> Result<f64> {
        Ok(self.probability(self.raw_score_sparse(features)?))
    }

    pub fn predict_proba_dense(&self, x: &[f64]) -> Result<f64> {
        Ok(self.probability(self.raw_score_dense(x)?))
    }
}
