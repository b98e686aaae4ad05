//! Label classifiers: estimating `p_j(c_j | l_j)` from co-occurrence
//! patterns of the training labels.
//!
//! For each category `j`, the training problem uses the TRUE labels of the
//! other `p - 1` categories as inputs and membership in `c_j` as the target.
//! The trained model must accept continuous inputs in `[0, 1]^(p-1)` at
//! prediction time: the continuous context approximation feeds it predicted
//! probabilities, not bits. That train/predict asymmetry is a known,
//! deliberate distribution shift.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::classifiers::{
    fit_platt, train_linear_svm_dense, train_logreg_dense, LinearModel,
};
use crate::error::{Error, Result};
use crate::types::{Dataset, LabelContext};

/// The `p - 1`-dimensional binary training problem for one category.
///
/// Input column `k` corresponds to category `k` when `k < excluded_category`
/// and to category `k + 1` otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelTrainingSet {
    pub excluded_category: usize,
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<bool>,
}

/// One row per training document: the other categories' true label bits as
/// inputs, membership in category `j` as the target.
pub fn build_label_dataset(ds: &Dataset, j: usize) -> Result<LabelTrainingSet> {
    let p = ds.n_categories();
    if j >= p {
        return Err(Error::DimensionMismatch(format!("category {j} out of range for p={p}")));
    }
    let mut inputs = Vec::with_capacity(ds.n_docs());
    let mut targets = Vec::with_capacity(ds.n_docs());
    for doc in ds.documents() {
        let row: Vec<f64> = (0..p)
            .filter(|&k| k != j)
            .map(|k| if doc.labels.contains(&k) { 1.0 } else { 0.0 })
            .collect();
        inputs.push(row);
        targets.push(doc.labels.contains(&j));
    }
    Ok(LabelTrainingSet { excluded_category: j, inputs, targets })
}

/// Which learner estimates the label posterior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelKind {
    Logreg,
    /// Linear SVM with Platt-calibrated output.
    Svm,
}

impl fmt::Display for LabelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LabelKind::Logreg => "logreg",
            LabelKind::Svm => "svm",
        })
    }
}

impl FromStr for LabelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "logreg" => Ok(LabelKind::Logreg),
            "svm" => Ok(LabelKind::Svm),
            other => Err(Error::InvalidConfig(format!(
                "unknown label classifier '{other}' (expected logreg or svm)"
            ))),
        }
    }
}

/// Hyperparameters for the two label-classifier kinds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabelHyper {
    /// L2 penalty for the logistic kind.
    pub lambda: f64,
    /// Soft-margin C for the SVM kind.
    pub c: f64,
}

impl Default for LabelHyper {
    fn default() -> Self {
        Self { lambda: 1.0, c: 1.0 }
    }
}

/// A trained label classifier for one category.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelModel {
    pub kind: LabelKind,
    pub excluded_category: usize,
    pub linear: LinearModel,
}

/// Train the label classifier on the dense `(p - 1)`-dimensional inputs.
pub fn train_label_classifier(
    kind: LabelKind,
    lts: &LabelTrainingSet,
    hyper: &LabelHyper,
) -> Result<LabelModel> {
    let linear = match kind {
        LabelKind::Logreg => train_logreg_dense(&lts.inputs, &lts.targets, hyper.lambda)?,
        LabelKind::Svm => {
            let mut model = train_linear_svm_dense(&lts.inputs, &lts.targets, hyper.c)?;
            let scores: Vec<f64> = lts
                .inputs
                .iter()
                .map(|row| model.raw_score_dense(row))
                .collect::<Result<_>>()?;
            model.calibration = Some(fit_platt(&scores, &lts.targets));
            model
        }
    };
    Ok(LabelModel { kind, excluded_category: lts.excluded_category, linear })
}

/// `p_j(c_j | l_j)` for a (possibly continuous) context.
pub fn label_posterior(model: &LabelModel, ctx: &LabelContext) -> Result<f64> {
    if ctx.excluded_category() != model.excluded_category {
        return Err(Error::DimensionMismatch(format!(
            "context excludes category {} but the model excludes {}",
            ctx.excluded_category(),
            model.excluded_category
        )));
    }
    model.linear.predict_proba_dense(ctx.values())
}
