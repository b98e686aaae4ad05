//! Evaluation measures for multilabel predictions.
//!
//! Label-based: micro and macro F1 from per-category contingency tables.
//! Example-based: Hamming loss and subset 0/1 loss. Ranking: one-error.
//! Significance testing lives in [`sign`].

pub mod sign;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::ScoreMatrix;

pub use sign::{
    binomial_tail, macro_s_test, micro_sign_test, SignificanceVerdict, Symbol, TestKind,
};

/// Per-category confusion counts. `TP + FP + FN + TN = n` for every
/// category.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContingencyTable {
    pub tp: Vec<usize>,
    pub fp: Vec<usize>,
    pub fn_: Vec<usize>,
    pub tn: Vec<usize>,
}

impl ContingencyTable {
    pub fn n_categories(&self) -> usize {
        self.tp.len()
    }
}

/// Exact per-category counts of true/false positives/negatives.
pub fn contingency(
    true_sets: &[BTreeSet<usize>],
    pred_sets: &[BTreeSet<usize>],
    p: usize,
) -> Result<ContingencyTable> {
    if true_sets.len() != pred_sets.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} truth rows vs {} prediction rows",
            true_sets.len(),
            pred_sets.len()
        )));
    }
    for set in true_sets.iter().chain(pred_sets) {
        if let Some(&l) = set.iter().next_back() {
            if l >= p {
                return Err(Error::DimensionMismatch(format!(
                    "label index {l} out of range for p={p}"
                )));
            }
        }
    }
    let mut ct = ContingencyTable {
        tp: vec![0; p],
        fp: vec![0; p],
        fn_: vec![0; p],
        tn: vec![0; p],
    };
    for (truth, pred) in true_sets.iter().zip(pred_sets) {
        for j in 0..p {
            match (truth.contains(&j), pred.contains(&j)) {
                (true, true) => ct.tp[j] += 1,
                (false, true) => ct.fp[j] += 1,
                (true, false) => ct.fn_[j] += 1,
                (false, false) => ct.tn[j] += 1,
            }
        }
    }
    Ok(ct)
}

fn f1_from_counts(tp: usize, fp: usize, fn_: usize) -> f64 {
    let denom = 2 * tp + fp + fn_;
    if denom == 0 {
        // a category that never occurs and is never predicted is perfect
        1.0
    } else {
        2.0 * tp as f64 / denom as f64
    }
}

/// `(micro_f1, macro_f1, per_category_f1)`.
///
/// Micro pools the counts over categories; macro is the unweighted mean of
/// the per-category values.
pub fn f1_scores(ct: &ContingencyTable) -> (f64, f64, Vec<f64>) {
    let per_category: Vec<f64> = (0..ct.n_categories())
        .map(|j| f1_from_counts(ct.tp[j], ct.fp[j], ct.fn_[j]))
        .collect();
    let macro_f1 = if per_category.is_empty() {
        1.0
    } else {
        per_category.iter().sum::<f64>() / per_category.len() as f64
    };
    let micro_f1 = f1_from_counts(
        ct.tp.iter().sum(),
        ct.fp.iter().sum(),
        ct.fn_.iter().sum(),
    );
    (micro_f1, macro_f1, per_category)
}

/// Mean normalized Hamming distance: per document, the size of the
/// symmetric difference between truth and prediction divided by `p`.
pub fn hamming_loss(
    true_sets: &[BTreeSet<usize>],
    pred_sets: &[BTreeSet<usize>],
    p: usize,
) -> Result<f64> {
    if p == 0 {
        return Err(Error::InvalidParameter("hamming loss needs p >= 1".into()));
    }
    if true_sets.len() != pred_sets.len() {
        return Err(Error::DimensionMismatch("truth/prediction row counts differ".into()));
    }
    if true_sets.is_empty() {
        return Ok(0.0);
    }
    let total: usize = true_sets
        .iter()
        .zip(pred_sets)
        .map(|(t, q)| t.symmetric_difference(q).count())
        .sum();
    Ok(total as f64 / (p as f64 * true_sets.len() as f64))
}

/// Fraction of documents whose predicted set differs from the truth at all.
pub fn subset_01_loss(true_sets: &[BTreeSet<usize>], pred_sets: &[BTreeSet<usize>]) -> Result<f64> {
    if true_sets.len() != pred_sets.len() {
        return Err(Error::DimensionMismatch("truth/prediction row counts differ".into()));
    }
    if true_sets.is_empty() {
        return Ok(0.0);
    }
    let wrong = true_sets.iter().zip(pred_sets).filter(|(t, q)| t != q).count();
    Ok(wrong as f64 / true_sets.len() as f64)
}

/// Fraction of documents whose top-scored label (ties break toward the
/// lowest index) is not among the true labels. Every true set must be
/// non-empty.
pub fn one_error(true_sets: &[BTreeSet<usize>], scores: &ScoreMatrix) -> Result<f64> {
    if true_sets.len() != scores.n_rows() {
        return Err(Error::DimensionMismatch(format!(
            "{} truth rows vs {} score rows",
            true_sets.len(),
            scores.n_rows()
        )));
    }
    if true_sets.is_empty() {
        return Ok(0.0);
    }
    let mut errors = 0usize;
    for (i, truth) in true_sets.iter().enumerate() {
        if truth.is_empty() {
            return Err(Error::InvalidData(format!(
                "document {i} has an empty true label set; one-error is undefined"
            )));
        }
        let row = scores.row(i);
        let mut top = 0usize;
        for (j, &s) in row.iter().enumerate() {
            if s > row[top] {
                top = j;
            }
        }
        if !truth.contains(&top) {
            errors += 1;
        }
    }
    Ok(errors as f64 / true_sets.len() as f64)
}

/// All measures for one system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub micro_f1: f64,
    pub macro_f1: f64,
    pub hamming_loss: f64,
    pub subset_01_loss: f64,
    pub one_error: f64,
    pub per_category_f1: Vec<f64>,
}

/// Evaluate hard predictions plus the soft scores behind them.
pub fn metrics_report(
    true_sets: &[BTreeSet<usize>],
    pred_sets: &[BTreeSet<usize>],
    scores: &ScoreMatrix,
    p: usize,
) -> Result<MetricsReport> {
    let ct = contingency(true_sets, pred_sets, p)?;
    let (micro_f1, macro_f1, per_category_f1) = f1_scores(&ct);
    Ok(MetricsReport {
        micro_f1,
        macro_f1,
        hamming_loss: hamming_loss(true_sets, pred_sets, p)?,
        subset_01_loss: subset_01_loss(true_sets, pred_sets)?,
        one_error: one_error(true_sets, scores)?,
        per_category_f1,
    })
}
