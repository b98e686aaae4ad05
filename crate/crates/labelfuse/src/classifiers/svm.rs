//! Linear SVM trained by deterministic dual coordinate descent.
//!
//! Solves the L1-hinge-loss dual
//! `min_a 1/2 a' Q a - e' a  s.t. 0 <= a_i <= C` with `Q_ij = y_i y_j x_i' x_j`,
//! sweeping coordinates in a fixed cyclic order and maintaining the primal
//! vector `w = sum_i a_i y_i x_i`. The bias is handled by augmenting every
//! example with a constant feature. KKT tolerance 1e-3 on the projected
//! gradient.

use crate::classifiers::linear::LinearModel;
use crate::error::{Error, Result};

pub const KKT_TOL: f64 = 1e-3;
pub const MAX_SWEEPS: usize = 1000;

/// Train an (uncalibrated) linear SVM on sparse rows.
///
/// Single-class input is accepted and yields a constant-sign model.
pub fn train_linear_svm(
    rows: &[&[(usize, f64)]],
    n_features: usize,
    targets: &[bool],
    c: f64,
) -> Result<LinearModel> {
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::InvalidParameter(format!("C must be > 0, got {c}")));
    }
    if rows.is_empty() {
        return Err(Error::InvalidData("SVM needs at least one example".into()));
    }
    if rows.len() != targets.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} rows vs {} targets",
            rows.len(),
            targets.len()
        )));
    }
    for row in rows {
        for &(j, v) in *row {
            if j >= n_features {
                return Err(Error::DimensionMismatch(format!(
                    "feature index {j} out of range for m={n_features}"
                )));
            }
            if !v.is_finite() {
                return Err(Error::InvalidData(format!("non-finite input value {v}")));
            }
        }
    }

    let n = rows.len();
    let bias_idx = n_features;
    // Q_ii with the augmented bias feature
    let qii: Vec<f64> =
        rows.iter().map(|r| 1.0 + r.iter().map(|&(_, v)| v * v).sum::<f64>()).collect();
    let y: Vec<f64> = targets.iter().map(|&t| if t { 1.0 } else { -1.0 }).collect();

    let mut alpha = vec![0.0f64; n];
    let mut w = vec![0.0f64; n_features + 1];

    for _ in 0..MAX_SWEEPS {
        let mut max_violation = 0.0f64;
        for i in 0..n {
            let mut wx = w[bias_idx];
            for &(j, v) in rows[i] {
                wx += w[j] * v;
            }
            let g = y[i] * wx - 1.0;
            let pg = if alpha[i] <= 0.0 {
                g.min(0.0)
            } else if alpha[i] >= c {
                g.max(0.0)
            } else {
                g
            };
            max_violation = max_violation.max(pg.abs());
            if pg.abs() > 1e-12 {
                let new_alpha = (alpha[i] - g / qii[i]).clamp(0.0, c);
                let delta = (new_alpha - alpha[i]) * y[i];
                if delta != 0.0 {
                    for &(j, v) in rows[i] {
                        w[j] += delta * v;
                    }
                    w[bias_idx] += delta;
                    alpha[i] = new_alpha;
                }
            }
        }
        if max_violation < KKT_TOL {
            break;
        }
    }

    let bias = w[bias_idx];
    w.truncate(n_features);
    LinearModel::new(w, bias, None)
}

/// Dense-row convenience wrapper.
pub fn train_linear_svm_dense(rows: &[Vec<f64>], targets: &[bool], c: f64) -> Result<LinearModel> {
    let n_features = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != n_features) {
        return Err(Error::DimensionMismatch("ragged dense rows".into()));
    }
    let sparse: Vec<Vec<(usize, f64)>> = rows
        .iter()
        .map(|r| r.iter().copied().enumerate().filter(|&(_, v)| v != 0.0).collect())
        .collect();
    let refs: Vec<&[(usize, f64)]> = sparse.iter().map(Vec::as_slice).collect();
    train_linear_svm(&refs, n_features, targets, c)
}
