//! L2-penalized logistic regression (Gaussian-prior MAP estimate).
//!
//! Minimizes `sum_i ln(1 + exp(-y_i (w . x_i + b))) + lambda/2 ||w||^2` with
//! the bias unpenalized, by L-BFGS with Armijo backtracking. Zero
//! initialization and a fixed update schedule make the solver fully
//! deterministic.

use crate::classifiers::linear::{log1p_exp, sigmoid, LinearModel};
use crate::error::{Error, Result};

pub const GRAD_TOL: f64 = 1e-6;
pub const MAX_ITER: usize = 1000;
const LBFGS_MEMORY: usize = 10;

/// Objective and gradient of the penalized log-loss at `theta = [w, b]`.
/// The gradient is written into `grad`.
fn objective_grad(
    rows: &[&[(usize, f64)]],
    targets: &[bool],
    lambda: f64,
    theta: &[f64],
    grad: &mut [f64],
) -> f64 {
    let m = theta.len() - 1;
    let bias = theta[m];
    grad.fill(0.0);
    let mut loss = 0.0;
    for (row, &t) in rows.iter().zip(targets) {
        let y = if t { 1.0 } else { -1.0 };
        let mut z = bias;
        for &(j, v) in *row {
            z += theta[j] * v;
        }
        loss += log1p_exp(-y * z);
        // d/dz ln(1+exp(-y z)) = -y * sigmoid(-y z)
        let coeff = -y * sigmoid(-y * z);
        for &(j, v) in *row {
            grad[j] += coeff * v;
        }
        grad[m] += coeff;
    }
    for j in 0..m {
        loss += 0.5 * lambda * theta[j] * theta[j];
        grad[j] += lambda * theta[j];
    }
    loss
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// L-BFGS two-loop recursion: returns the descent direction `-H g`.
fn lbfgs_direction(grad: &[f64], history: &[(Vec<f64>, Vec<f64>)]) -> Vec<f64> {
    let mut q: Vec<f64> = grad.to_vec();
    let mut alphas = Vec::with_capacity(history.len());
    for (s, y) in history.iter().rev() {
        let rho = 1.0 / dot(y, s);
        let alpha = rho * dot(s, &q);
        for (qi, yi) in q.iter_mut().zip(y) {
            *qi -= alpha * yi;
        }
        alphas.push((rho, alpha));
    }
    if let Some((s, y)) = history.last() {
        let gamma = dot(s, y) / dot(y, y);
        for qi in q.iter_mut() {
            *qi *= gamma;
        }
    }
    for ((s, y), &(rho, alpha)) in history.iter().zip(alphas.iter().rev()) {
        let beta = rho * dot(y, &q);
        for (qi, si) in q.iter_mut().zip(s) {
            *qi += (alpha - beta) * si;
        }
    }
    for qi in q.iter_mut() {
        *qi = -*qi;
    }
    q
}

fn validate_inputs(rows: &[&[(usize, f64)]], n_features: usize, targets: &[bool]) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::InvalidData("logistic regression needs at least one example".into()));
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
    Ok(())
}

/// Train on sparse rows. Converges to gradient norm `1e-6` or stops after
/// 1000 iterations, whichever comes first.
pub fn train_logreg(
    rows: &[&[(usize, f64)]],
    n_features: usize,
    targets: &[bool],
    lambda: f64,
) -> Result<LinearModel> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::InvalidParameter(format!("lambda must be >= 0, got {lambda}")));
    }
    validate_inputs(rows, n_features, targets)?;

    let dim = n_features + 1;
    let mut theta = vec![0.0f64; dim];
    let mut grad = vec![0.0f64; dim];
    let mut f = objective_grad(rows, targets, lambda, &theta, &mut grad);
    let mut history: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();

    for _ in 0..MAX_ITER {
        if norm(&grad) <= GRAD_TOL {
            break;
        }
        let mut dir = lbfgs_direction(&grad, &history);
        let mut slope = dot(&grad, &dir);
        if !(slope < 0.0) {
            dir = grad.iter().map(|g| -g).collect();
            slope = dot(&grad, &dir);
        }

        // Armijo backtracking from a unit step
        let mut step = 1.0f64;
        let mut next = vec![0.0f64; dim];
        let mut next_grad = vec![0.0f64; dim];
        let mut accepted = false;
        while step >= 1e-20 {
            for i in 0..dim {
                next[i] = theta[i] + step * dir[i];
            }
            let fnext = objective_grad(rows, targets, lambda, &next, &mut next_grad);
            if fnext <= f + 1e-4 * step * slope {
                let s: Vec<f64> = next.iter().zip(&theta).map(|(a, b)| a - b).collect();
                let y: Vec<f64> = next_grad.iter().zip(&grad).map(|(a, b)| a - b).collect();
                if dot(&s, &y) > 1e-12 * norm(&s) * norm(&y) {
                    history.push((s, y));
                    if history.len() > LBFGS_MEMORY {
                        history.remove(0);
                    }
                }
                theta.copy_from_slice(&next);
                grad.copy_from_slice(&next_grad);
                f = fnext;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break; // no further float-representable progress
        }
    }

    let bias = theta[dim - 1];
    theta.truncate(n_features);
    LinearModel::new(theta, bias, None)
}

/// Train on dense rows, e.g. the `(p - 1)`-dimensional label contexts.
pub fn train_logreg_dense(rows: &[Vec<f64>], targets: &[bool], lambda: f64) -> Result<LinearModel> {
    let n_features = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != n_features) {
        return Err(Error::DimensionMismatch("ragged dense rows".into()));
    }
    let sparse: Vec<Vec<(usize, f64)>> = rows
        .iter()
        .map(|r| r.iter().copied().enumerate().filter(|&(_, v)| v != 0.0).collect())
        .collect();
    let refs: Vec<&[(usize, f64)]> = sparse.iter().map(Vec::as_slice).collect();
    train_logreg(&refs, n_features, targets, lambda)
}

/// Penalized-loss gradient at an arbitrary point; exposed for verifying the
/// optimizer against finite differences.
pub fn logreg_gradient(
    rows: &[&[(usize, f64)]],
    targets: &[bool],
    lambda: f64,
    weights: &[f64],
    bias: f64,
) -> Vec<f64> {
    let mut theta = weights.to_vec();
    theta.push(bias);
    let mut grad = vec![0.0; theta.len()];
    objective_grad(rows, targets, lambda, &theta, &mut grad);
    grad
}

/// Penalized loss value; the finite-difference oracle differentiates this.
pub fn logreg_loss(
    rows: &[&[(usize, f64)]],
    targets: &[bool],
    lambda: f64,
    weights: &[f64],
    bias: f64,
) -> f64 {
    let mut theta = weights.to_vec();
    theta.push(bias);
    let mut grad = vec![0.0; theta.len()];
    objective_grad(rows, targets, lambda, &theta, &mut grad)
}
