//! Training orchestration and model persistence.

use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::{
    fit_platt, train_knn, train_linear_svm, train_logreg, train_nb, ContentKind, ContentModel,
    KnnOptions, KnnStore, NbOptions,
};
use crate::combine::{estimate_priors, DEFAULT_EPSILON};
use crate::data::{FittedPreprocess, SelectionMethod, Weighting};
use crate::error::{Error, Result};
use crate::labels::{build_label_dataset, train_label_classifier, LabelHyper, LabelKind, LabelModel};
use crate::types::{Dataset, Mode};

/// Everything needed to train the `p` content and `p` label classifiers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub content: ContentKind,
    pub nb: NbOptions,
    pub knn: KnnOptions,
    /// L2 penalty shared by content and label logistic regressions.
    pub lambda: f64,
    /// Soft-margin C shared by content and label SVMs.
    pub c: f64,
    /// Calibrate the content SVM on 3-fold out-of-fold scores instead of
    /// in-sample scores.
    pub platt_cv3: bool,
    pub label_kind: LabelKind,
    pub mode: Mode,
    pub epsilon_clamp: f64,
}

impl Default for ModelSpec {
    fn default() -> Self {
        Self {
            content: ContentKind::Nb,
            nb: NbOptions::default(),
            knn: KnnOptions::default(),
            lambda: 1.0,
            c: 1.0,
            platt_cv3: false,
            label_kind: LabelKind::Logreg,
            mode: Mode::M2,
            epsilon_clamp: DEFAULT_EPSILON,
        }
    }
}

/// Priors, `p` content classifiers and `p` label classifiers, plus the
/// context mode they are fused under.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub priors: Vec<f64>,
    pub content: Vec<ContentModel>,
    pub labels: Vec<LabelModel>,
    pub mode: Mode,
    pub epsilon_clamp: f64,
}

fn svm_content_model(
    rows: &[&[(usize, f64)]],
    n_features: usize,
    targets: &[bool],
    c: f64,
    cv3: bool,
) -> Result<ContentModel> {
    let mut model = train_linear_svm(rows, n_features, targets, c)?;
    let (scores, cal_targets): (Vec<f64>, Vec<bool>) = if cv3 && rows.len() >= 3 {
        // out-of-fold scores from 3 deterministic round-robin folds
        let mut scores = Vec::with_capacity(rows.len());
        let mut cal_targets = Vec::with_capacity(rows.len());
        for fold in 0..3usize {
            let mut tr_rows = Vec::new();
            let mut tr_targets = Vec::new();
            for (i, (&row, &t)) in rows.iter().zip(targets).enumerate() {
                if i % 3 != fold {
                    tr_rows.push(row);
                    tr_targets.push(t);
                }
            }
            let fold_model = train_linear_svm(&tr_rows, n_features, &tr_targets, c)?;
            for (i, (&row, &t)) in rows.iter().zip(targets).enumerate() {
                if i % 3 == fold {
                    scores.push(fold_model.raw_score_sparse(row)?);
                    cal_targets.push(t);
                }
            }
        }
        (scores, cal_targets)
    } else {
        let scores = rows
            .iter()
            .map(|row| model.raw_score_sparse(row))
            .collect::<Result<Vec<f64>>>()?;
        (scores, targets.to_vec())
    };
    model.calibration = Some(fit_platt(&scores, &cal_targets));
    Ok(ContentModel::Svm(model))
}

impl TrainedModel {
    /// Train on an already-preprocessed corpus. The `p` per-category
    /// problems are independent and run in parallel.
    pub fn fit(ds: &Dataset, spec: &ModelSpec) -> Result<Self> {
        ds.check_training()?;
        if !(spec.epsilon_clamp > 0.0 && spec.epsilon_clamp < 0.5) {
            return Err(Error::InvalidConfig(format!(
                "epsilon_clamp {} outside (0, 0.5)",
                spec.epsilon_clamp
            )));
        }
        let p = ds.n_categories();
        let priors = estimate_priors(ds, spec.epsilon_clamp)?;

        let rows: Vec<&[(usize, f64)]> =
            ds.documents().iter().map(|d| d.features.as_slice()).collect();
        let knn_store = match spec.content {
            ContentKind::Knn => Some(Arc::new(KnnStore::build(ds))),
            _ => None,
        };

        let content: Vec<ContentModel> = (0..p)
            .into_par_iter()
            .map(|j| -> Result<ContentModel> {
                match spec.content {
                    ContentKind::Nb => Ok(ContentModel::Nb(train_nb(ds, j, &spec.nb)?)),
                    ContentKind::Knn => {
                        let store = knn_store.as_ref().expect("store built for knn").clone();
                        Ok(ContentModel::Knn(train_knn(store, ds, j, &spec.knn)?))
                    }
                    ContentKind::Svm => {
                        let targets: Vec<bool> =
                            ds.documents().iter().map(|d| d.labels.contains(&j)).collect();
                        svm_content_model(&rows, ds.n_terms(), &targets, spec.c, spec.platt_cv3)
                    }
                    ContentKind::Logreg => {
                        let targets: Vec<bool> =
                            ds.documents().iter().map(|d| d.labels.contains(&j)).collect();
                        Ok(ContentModel::Logreg(train_logreg(
                            &rows,
                            ds.n_terms(),
                            &targets,
                            spec.lambda,
                        )?))
                    }
                }
            })
            .collect::<Result<_>>()?;

        let hyper = LabelHyper { lambda: spec.lambda, c: spec.c };
        let labels: Vec<LabelModel> = (0..p)
            .into_par_iter()
            .map(|j| {
                let lts = build_label_dataset(ds, j)?;
                train_label_classifier(spec.label_kind, &lts, &hyper)
            })
            .collect::<Result<_>>()?;

        Ok(Self { priors, content, labels, mode: spec.mode, epsilon_clamp: spec.epsilon_clamp })
    }

    pub fn n_categories(&self) -> usize {
        self.priors.len()
    }

    /// The same model under a different context mode.
    pub fn with_mode(&self, mode: Mode) -> Self {
        Self { mode, ..self.clone() }
    }

    pub fn check_compatible(&self, ds: &Dataset) -> Result<()> {
        if ds.n_categories() != self.n_categories() {
            return Err(Error::DimensionMismatch(format!(
                "dataset has p={} but the model was trained with p={}",
                ds.n_categories(),
                self.n_categories()
            )));
        }
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        let p = self.priors.len();
        if self.content.len() != p || self.labels.len() != p {
            return Err(Error::ModelFormat(format!(
                "inconsistent category counts: {} priors, {} content models, {} label models",
                p,
                self.content.len(),
                self.labels.len()
            )));
        }
        if self.priors.iter().any(|&q| !(q > 0.0 && q < 1.0)) {
            return Err(Error::ModelFormat("priors must lie strictly inside (0, 1)".into()));
        }
        if !(self.epsilon_clamp > 0.0 && self.epsilon_clamp < 0.5) {
            return Err(Error::ModelFormat("epsilon_clamp outside (0, 0.5)".into()));
        }
        Ok(())
    }
}

const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    preprocess: FittedPreprocess,
    model: TrainedModel,
}

/// How the raw corpus is reduced and weighted before model fitting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineSpec {
    pub min_df: usize,
    pub selection: Option<(SelectionMethod, usize)>,
    /// `None` picks the classifier's conventional default: raw counts for
    /// naive Bayes, tf-idf for k-NN, SVM and logistic regression.
    pub weighting: Option<Weighting>,
    pub model: ModelSpec,
}

impl Default for PipelineSpec {
    fn default() -> Self {
        Self { min_df: 1, selection: None, weighting: None, model: ModelSpec::default() }
    }
}

impl PipelineSpec {
    pub fn resolved_weighting(&self) -> Weighting {
        self.weighting.unwrap_or(match self.model.content {
            ContentKind::Nb => Weighting::Tf,
            _ => Weighting::TfIdf,
        })
    }
}

/// A fitted preprocess plus the model trained on its output: the persisted,
/// replayable unit.
#[derive(Debug, Clone, PartialEq)]
pub struct Pipeline {
    pub preprocess: FittedPreprocess,
    pub model: TrainedModel,
}

impl Pipeline {
    /// Preprocess a raw training corpus and fit the model on the result.
    pub fn fit(raw_train: &Dataset, spec: &PipelineSpec) -> Result<Self> {
        let (prepared, preprocess) = FittedPreprocess::fit(
            raw_train,
            spec.min_df,
            spec.selection,
            spec.resolved_weighting(),
        )?;
        let model = TrainedModel::fit(&prepared, &spec.model)?;
        Ok(Self { preprocess, model })
    }

    /// Apply the fitted preprocess to a raw corpus and predict.
    pub fn predict(&self, raw_ds: &Dataset) -> Result<(crate::types::ScoreMatrix, crate::types::ScoreMatrix)> {
        let prepared = self.preprocess.apply(raw_ds)?;
        crate::combine::predict_all(&self.model, &prepared)
    }

    pub fn to_json(&self) -> Result<String> {
        let file = ModelFile {
            format_version: MODEL_FORMAT_VERSION,
            preprocess: self.preprocess.clone(),
            model: self.model.clone(),
        };
        let mut s = serde_json::to_string(&file)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile =
            serde_json::from_str(text).map_err(|e| Error::ModelFormat(e.to_string()))?;
        if file.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::ModelFormat(format!(
                "unsupported model format version {}",
                file.format_version
            )));
        }
        file.model.validate()?;
        Ok(Self { preprocess: file.preprocess, model: file.model })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
