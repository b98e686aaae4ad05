//! Binary multinomial naive Bayes over sparse term counts.

use serde::{Deserialize, Serialize};

use crate::classifiers::linear::sigmoid;
use crate::error::{Error, Result};
use crate::types::{Dataset, SparseDocument};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NbOptions {
    /// Laplace/Lidstone smoothing of the term distributions.
    pub alpha: f64,
    /// Binarize counts to presence before estimating term distributions.
    pub binarize: bool,
}

impl Default for NbOptions {
    fn default() -> Self {
        Self { alpha: 1.0, binarize: false }
    }
}

/// One-vs-rest multinomial model for a single category: smoothed log priors
/// and per-class log term distributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NbModel {
    pub log_prior_pos: f64,
    pub log_prior_neg: f64,
    pub log_like_pos: Vec<f64>,
    pub log_like_neg: Vec<f64>,
    pub alpha: f64,
    pub binarize: bool,
}

impl NbModel {
    pub fn n_terms(&self) -> usize {
        self.log_like_pos.len()
    }

    /// Posterior `P(c | doc)` for the model's category, computed from the
    /// two class log scores. The sigmoid-of-difference form cannot overflow
    /// however large the counts.
    pub fn predict_proba(&self, doc: &SparseDocument) -> Result<f64> {
        let m = self.n_terms();
        let mut lp_pos = self.log_prior_pos;
        let mut lp_neg = self.log_prior_neg;
        for &(t, v) in &doc.features {
            if t >= m {
                return Err(Error::DimensionMismatch(format!(
                    "term index {t} out of range for NB model with m={m}"
                )));
            }
            let count = if self.binarize {
                if v > 0.0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                v
            };
            lp_pos += count * self.log_like_pos[t];
            lp_neg += count * self.log_like_neg[t];
        }
        Ok(sigmoid(lp_pos - lp_neg))
    }
}

/// Fit the one-vs-rest model for `category`.
///
/// Term distributions are `P(t | c) = (count(t, c) + alpha) / (total(c) + alpha m)`
/// and priors are Laplace-smoothed `(n_c + 1) / (n + 2)`. Fractional counts
/// are accepted; integrality is not required.
pub fn train_nb(ds: &Dataset, category: usize, opts: &NbOptions) -> Result<NbModel> {
    if !(opts.alpha.is_finite() && opts.alpha > 0.0) {
        return Err(Error::InvalidParameter(format!("alpha must be > 0, got {}", opts.alpha)));
    }
    if ds.n_docs() == 0 {
        return Err(Error::InvalidData("NB training needs a non-empty dataset".into()));
    }
    if category >= ds.n_categories() {
        return Err(Error::DimensionMismatch(format!(
            "category {category} out of range for p={}",
            ds.n_categories()
        )));
    }

    let m = ds.n_terms();
    let mut counts_pos = vec![0.0f64; m];
    let mut counts_neg = vec![0.0f64; m];
    let mut n_pos = 0usize;
    for doc in ds.documents() {
        let in_class = doc.labels.contains(&category);
        if in_class {
            n_pos += 1;
        }
        let counts = if in_class { &mut counts_pos } else { &mut counts_neg };
        for &(t, v) in &doc.features {
            let c = if opts.binarize {
                if v > 0.0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                v
            };
            counts[t] += c;
        }
    }

    let n = ds.n_docs() as f64;
    let prior_pos = (n_pos as f64 + 1.0) / (n + 2.0);

    let smooth = |counts: Vec<f64>| -> Vec<f64> {
        let total: f64 = counts.iter().sum();
        let denom = total + opts.alpha * m as f64;
        counts.into_iter().map(|c| ((c + opts.alpha) / denom).ln()).collect()
    };

    Ok(NbModel {
        log_prior_pos: prior_pos.ln(),
        log_prior_neg: (1.0 - prior_pos).ln(),
        log_like_pos: smooth(counts_pos),
        log_like_neg: smooth(counts_neg),
        alpha: opts.alpha,
        binarize: opts.binarize,
    })
}
