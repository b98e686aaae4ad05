//! Platt's sigmoid calibration.
//!
//! Fits `P(pos | s) = 1 / (1 + exp(A s + B))` by regularized maximum
//! likelihood on smoothed targets `t+ = (N+ + 1)/(N+ + 2)` and
//! `t- = 1/(N- + 2)`, using Newton's method with backtracking line search.
//! The fit never fails: if the line search stalls, the best parameters so
//! far are returned.

const MAX_ITER: usize = 200;
const MIN_STEP: f64 = 1e-10;
const SIGMA: f64 = 1e-12;
pub const GRAD_TOL: f64 = 1e-8;

/// Platt's smoothed target values for the positive and negative class.
pub fn platt_targets(n_pos: usize, n_neg: usize) -> (f64, f64) {
    ((n_pos as f64 + 1.0) / (n_pos as f64 + 2.0), 1.0 / (n_neg as f64 + 2.0))
}

fn nll(scores: &[f64], targets: &[f64], a: f64, b: f64) -> f64 {
    let mut fval = 0.0;
    for (&s, &t) in scores.iter().zip(targets) {
        let f_apb = a * s + b;
        if f_apb >= 0.0 {
            fval += t * f_apb + (-f_apb).exp().ln_1p();
        } else {
            fval += (t - 1.0) * f_apb + f_apb.exp().ln_1p();
        }
    }
    fval
}

/// Fit `(A, B)` on raw scores and binary labels.
pub fn fit_platt(scores: &[f64], targets: &[bool]) -> (f64, f64) {
    assert_eq!(scores.len(), targets.len(), "scores and targets must align");
    if scores.is_empty() {
        return (0.0, 0.0);
    }
    let n_pos = targets.iter().filter(|&&t| t).count();
    let n_neg = targets.len() - n_pos;
    let (hi, lo) = platt_targets(n_pos, n_neg);
    let t: Vec<f64> = targets.iter().map(|&x| if x { hi } else { lo }).collect();

    // constant scores leave A unidentifiable; fix A = 0 and solve B in
    // closed form, mapping every input to the smoothed base rate
    if scores.iter().all(|&s| s == scores[0]) {
        let mean_t = t.iter().sum::<f64>() / t.len() as f64;
        return (0.0, ((1.0 - mean_t) / mean_t).ln());
    }

    let mut a = 0.0f64;
    let mut b = ((n_neg as f64 + 1.0) / (n_pos as f64 + 1.0)).ln();
    let mut fval = nll(scores, &t, a, b);

    for _ in 0..MAX_ITER {
        // gradient and Hessian of the negative log-likelihood
        let (mut h11, mut h22) = (SIGMA, SIGMA);
        let (mut h21, mut g1, mut g2) = (0.0f64, 0.0f64, 0.0f64);
        for (&s, &ti) in scores.iter().zip(&t) {
            let f_apb = a * s + b;
            let (p, q) = if f_apb >= 0.0 {
                let e = (-f_apb).exp();
                (e / (1.0 + e), 1.0 / (1.0 + e))
            } else {
                let e = f_apb.exp();
                (1.0 / (1.0 + e), e / (1.0 + e))
            };
            let d2 = p * q;
            h11 += s * s * d2;
            h22 += d2;
            h21 += s * d2;
            let d1 = ti - p;
            g1 += s * d1;
            g2 += d1;
        }

        if g1.abs() < GRAD_TOL && g2.abs() < GRAD_TOL {
            break;
        }

        let det = h11 * h22 - h21 * h21;
        let da = -(h22 * g1 - h21 * g2) / det;
        let db = -(-h21 * g1 + h11 * g2) / det;
        let gd = g1 * da + g2 * db;

        let mut step = 1.0f64;
        let mut improved = false;
        while step >= MIN_STEP {
            let (na, nb) = (a + step * da, b + step * db);
            let newf = nll(scores, &t, na, nb);
            if newf < fval + 1e-4 * step * gd {
                a = na;
                b = nb;
                fval = newf;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (a, b)
}
