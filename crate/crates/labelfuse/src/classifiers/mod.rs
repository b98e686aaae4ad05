//! Per-category probabilistic content classifiers.
//!
//! Every classifier exposes the same contract: given a document, produce a
//! finite posterior estimate `p_j(c_j | x_i)` in `[0, 1]`. Four kinds are
//! available — multinomial naive Bayes, k-NN with a normalized vote, a
//! linear SVM with Platt-calibrated output, and L2-regularized logistic
//! regression.

pub mod knn;
pub mod linear;
pub mod logreg;
pub mod nb;
pub mod platt;
pub mod svm;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use knn::{train_knn, KnnIndex, KnnOptions, KnnStore};
pub use linear::{sigmoid, LinearModel};
pub use logreg::{train_logreg, train_logreg_dense};
pub use nb::{train_nb, NbModel, NbOptions};
pub use platt::{fit_platt, platt_targets};
pub use svm::{train_linear_svm, train_linear_svm_dense};

use crate::error::Result;
use crate::types::SparseDocument;

/// Which content classifier to train.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ContentKind {
    Nb,
    Knn,
    Svm,
    Logreg,
}

impl fmt::Display for ContentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ContentKind::Nb => "nb",
            ContentKind::Knn => "knn",
            ContentKind::Svm => "svm",
            ContentKind::Logreg => "logreg",
        })
    }
}

impl FromStr for ContentKind {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "nb" => Ok(ContentKind::Nb),
            "knn" => Ok(ContentKind::Knn),
            "svm" => Ok(ContentKind::Svm),
            "logreg" => Ok(ContentKind::Logreg),
            other => Err(crate::error::Error::InvalidConfig(format!(
                "unknown content classifier '{other}' (expected nb, knn, svm or logreg)"
            ))),
        }
    }
}

/// A trained per-category content classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ContentModel {
    Nb(NbModel),
    Knn(KnnIndex),
    /// Calibrated linear SVM.
    Svm(LinearModel),
    Logreg(LinearModel),
}

impl ContentModel {
    /// The shared predict-probability contract.
    pub fn predict_proba(&self, doc: &SparseDocument) -> Result<f64> {
        match self {
            ContentModel::Nb(m) => m.predict_proba(doc),
            ContentModel::Knn(m) => m.predict_proba(doc),
            ContentModel::Svm(m) | ContentModel::Logreg(m) => {
                m.predict_proba_sparse(&doc.features)
            }
        }
    }

    pub fn kind(&self) -> ContentKind {
        match self {
            ContentModel::Nb(_) => ContentKind::Nb,
            ContentModel::Knn(_) => ContentKind::Knn,
            ContentModel::Svm(_) => ContentKind::Svm,
            ContentModel::Logreg(_) => ContentKind::Logreg,
        }
    }
}
