//! Fusing content and label posteriors.
//!
//! The fusion rule follows from treating a document's content and the other
//! categories' labels as conditionally independent given the category:
//!
//! ```text
//!                  p_cx * p_cl / prior
//! p = ---------------------------------------------------
//!     p_cx * p_cl / prior + (1-p_cx)(1-p_cl)/(1-prior)
//! ```
//!
//! All three inputs are clamped into `[eps, 1-eps]` first, so the ratio form
//! is safe: no division by zero, no overflow. When the label model is
//! uninformative (`p_cl == prior`) the rule collapses to the content score
//! exactly.
//!
//! Prediction is a single pass: content scores for every (document,
//! category) pair first, then per category a context built from the *other*
//! base scores — thresholded (M1) or raw (M2) — queried against the label
//! model and fused. The final scores never feed back into the contexts.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::labels::label_posterior;
use crate::model::TrainedModel;
use crate::types::{Dataset, LabelContext, Mode, ScoreMatrix};

pub const DEFAULT_EPSILON: f64 = 1e-6;
pub const DECISION_THRESHOLD: f64 = 0.5;

/// Prediction-time knobs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CombinerConfig {
    pub mode: Mode,
    /// Probabilities are clamped into `[epsilon_clamp, 1 - epsilon_clamp]`
    /// before fusion.
    pub epsilon_clamp: f64,
    /// Hard-categorization threshold; 0.5 throughout, no tuning.
    pub threshold: f64,
    /// Promote the argmax label when thresholding yields an empty set.
    pub force_nonempty: bool,
}

impl Default for CombinerConfig {
    fn default() -> Self {
        Self {
            mode: Mode::M2,
            epsilon_clamp: DEFAULT_EPSILON,
            threshold: DECISION_THRESHOLD,
            force_nonempty: false,
        }
    }
}

impl CombinerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon_clamp > 0.0 && self.epsilon_clamp < 0.5) {
            return Err(Error::InvalidConfig(format!(
                "epsilon_clamp {} outside (0, 0.5)",
                self.epsilon_clamp
            )));
        }
        if self.epsilon_clamp >= self.threshold {
            return Err(Error::InvalidConfig("epsilon_clamp must be below the threshold".into()));
        }
        Ok(())
    }
}

/// Laplace-smoothed category priors `(n_j + 1) / (n + 2)`, clamped into
/// `[epsilon, 1 - epsilon]`.
pub fn estimate_priors(ds: &Dataset, epsilon: f64) -> Result<Vec<f64>> {
    if ds.n_docs() == 0 {
        return Err(Error::InvalidData("cannot estimate priors of an empty dataset".into()));
    }
    let n = ds.n_docs() as f64;
    Ok(ds
        .label_counts()
        .into_iter()
        .map(|n_j| ((n_j as f64 + 1.0) / (n + 2.0)).clamp(epsilon, 1.0 - epsilon))
        .collect())
}

/// Thresholded context: every other category enters as 1.0 when its score
/// is >= 0.5 and as 0.0 below. A score of exactly 0.5 maps to the positive
/// class (the threshold function is negative only strictly below 0.5).
pub fn context_m1(scores_row: &[f64], j: usize) -> Result<LabelContext> {
    LabelContext::from_full(scores_row, j, |s| {
        if s < DECISION_THRESHOLD {
            0.0
        } else {
            1.0
        }
    })
}

/// Continuous context: the other categories' scores, verbatim.
pub fn context_m2(scores_row: &[f64], j: usize) -> Result<LabelContext> {
    LabelContext::from_full(scores_row, j, |s| s)
}

fn clamp(x: f64, epsilon: f64) -> f64 {
    x.clamp(epsilon, 1.0 - epsilon)
}

/// Fuse a content posterior, a label posterior and the category prior.
/// Strictly increasing in `p_cx` and `p_cl`; output always in `(0, 1)`.
pub fn combine_posterior(p_cx: f64, p_cl: f64, prior: f64, epsilon: f64) -> f64 {
    let px = clamp(p_cx, epsilon);
    let pl = clamp(p_cl, epsilon);
    let pr = clamp(prior, epsilon);
    let pos = px * pl / pr;
    let neg = (1.0 - px) * (1.0 - pl) / (1.0 - pr);
    pos / (pos + neg)
}

/// Step 1 of the prediction pass: content posteriors for every
/// (document, category) pair.
pub fn content_scores(model: &TrainedModel, ds: &Dataset) -> Result<ScoreMatrix> {
    model.check_compatible(ds)?;
    let rows: Vec<Vec<f64>> = ds
        .documents()
        .par_iter()
        .map(|doc| {
            model
                .content
                .iter()
                .map(|clf| clf.predict_proba(doc))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    ScoreMatrix::from_rows(rows)
}

/// Step 2 of the prediction pass: per category, build the context from the
/// base row (per the model's mode), query the label model and fuse. The
/// base matrix is only read, never modified; under `Mode::Baseline` it is
/// returned as-is.
pub fn fuse_scores(model: &TrainedModel, base: &ScoreMatrix) -> Result<ScoreMatrix> {
    let p = model.n_categories();
    if base.n_cols() != p {
        return Err(Error::DimensionMismatch(format!(
            "base scores carry {} categories, model expects {p}",
            base.n_cols()
        )));
    }
    let mode = match model.mode {
        Mode::Baseline => return Ok(base.clone()),
        m => m,
    };
    let rows: Vec<Vec<f64>> = base
        .rows()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|row| {
            (0..p)
                .map(|j| {
                    let ctx = match mode {
                        Mode::M1 => context_m1(row, j)?,
                        Mode::M2 => context_m2(row, j)?,
                        Mode::Baseline => unreachable!(),
                    };
                    let p_cl = label_posterior(&model.labels[j], &ctx)?;
                    Ok(combine_posterior(row[j], p_cl, model.priors[j], model.epsilon_clamp))
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    ScoreMatrix::from_rows(rows)
}

/// Run the full prediction pass, returning `(base_scores, final_scores)`.
///
/// Both matrices are soft scores; threshold with [`binarize`] for hard
/// categorization.
pub fn predict_all(model: &TrainedModel, ds: &Dataset) -> Result<(ScoreMatrix, ScoreMatrix)> {
    let base = content_scores(model, ds)?;
    let fused = fuse_scores(model, &base)?;
    Ok((base, fused))
}

/// Threshold soft scores into label sets: a label is included when its score
/// is >= 0.5. With `force_nonempty`, an empty set falls back to the argmax
/// label (ties break toward the lowest index).
pub fn binarize(scores: &ScoreMatrix, cfg: &CombinerConfig) -> Vec<BTreeSet<usize>> {
    scores
        .rows()
        .map(|row| {
            let mut set: BTreeSet<usize> = row
                .iter()
                .enumerate()
                .filter(|&(_, &s)| s >= cfg.threshold)
                .map(|(j, _)| j)
                .collect();
            if set.is_empty() && cfg.force_nonempty && !row.is_empty() {
                let mut best = 0usize;
                for (j, &s) in row.iter().enumerate() {
                    if s > row[best] {
                        best = j;
                    }
                }
                set.insert(best);
            }
            set
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn priors_are_smoothed_and_clamped() {
        use crate::data::parse_dataset;
        let text = "0 \n0 \n0 \n1 \n1 \n1 \n1 \n1 \n1 \n1 \n";
        let ds = parse_dataset(text, Some((0, 2)), false).unwrap();
        let priors = estimate_priors(&ds, 1e-6).unwrap();
        assert!((priors[0] - 4.0 / 12.0).abs() < 1e-12);
        // a category never seen: (0+1)/(10+2), never 0
        let ds = parse_dataset(text, Some((0, 3)), false).unwrap();
        let priors = estimate_priors(&ds, 1e-6).unwrap();
        assert!((priors[2] - 1.0 / 12.0).abs() < 1e-12);
        // all ten docs: 11/12, never 1
        let all = "0 \n".repeat(10);
        let ds = parse_dataset(&all, Some((0, 1)), false).unwrap();
        let priors = estimate_priors(&ds, 1e-6).unwrap();
        assert!((priors[0] - 11.0 / 12.0).abs() < 1e-12);
    }

    #[test]
    fn m1_context_thresholds_at_half_inclusive() {
        let ctx = context_m1(&[0.7, 0.4, 0.5], 1).unwrap();
        assert_eq!(ctx.values(), &[1.0, 1.0]);
        let ctx = context_m1(&[0.0, 0.0, 0.0], 1).unwrap();
        assert_eq!(ctx.values(), &[0.0, 0.0]);
        let ctx = context_m1(&[0.9, 0.49], 0).unwrap();
        assert_eq!(ctx.values(), &[0.0]);
    }

    #[test]
    fn m2_context_copies_scores() {
        let ctx = context_m2(&[0.7, 0.4, 0.5], 1).unwrap();
        assert_eq!(ctx.values(), &[0.7, 0.5]);
        let ctx = context_m2(&[0.7, 0.4, 0.5], 0).unwrap();
        assert_eq!(ctx.values(), &[0.4, 0.5]);
    }

    #[test]
    fn m1_is_threshold_of_m2() {
        let rows = [[0.1, 0.5, 0.9], [0.49, 0.51, 0.5], [0.0, 1.0, 0.3]];
        for row in rows {
            for j in 0..3 {
                let m1 = context_m1(&row, j).unwrap();
                let m2 = context_m2(&row, j).unwrap();
                let thresholded: Vec<f64> = m2
                    .values()
                    .iter()
                    .map(|&v| if v < 0.5 { 0.0 } else { 1.0 })
                    .collect();
                assert_eq!(m1.values(), thresholded.as_slice());
            }
        }
    }

    #[test]
    fn combine_hand_value() {
        let p = combine_posterior(0.8, 0.6, 0.5, 1e-6);
        assert!((p - 0.96 / 1.12).abs() < 1e-12, "p = {p}");
    }

    #[test]
    fn combine_collapses_when_label_model_uninformative() {
        let p = combine_posterior(0.7, 0.3, 0.3, 1e-6);
        assert!((p - 0.7).abs() < 1e-12);
        assert_eq!(combine_posterior(0.5, 0.5, 0.5, 1e-6), 0.5);
    }

    #[test]
    fn binarize_thresholds_and_fallbacks() {
        let scores = ScoreMatrix::from_rows(vec![
            vec![0.7, 0.2],
            vec![0.2, 0.3],
            vec![0.5, 0.5],
        ])
        .unwrap();
        let plain = binarize(&scores, &CombinerConfig::default());
        assert_eq!(plain[0], [0].into_iter().collect());
        assert!(plain[1].is_empty());
        assert_eq!(plain[2], [0, 1].into_iter().collect());

        let forced = binarize(
            &scores,
            &CombinerConfig { force_nonempty: true, ..CombinerConfig::default() },
        );
        assert_eq!(forced[1], [1].into_iter().collect());
        // tie falls back to the lowest index
        let tied = ScoreMatrix::from_rows(vec![vec![0.3, 0.3]]).unwrap();
        let forced = binarize(
            &tied,
            &CombinerConfig { force_nonempty: true, ..CombinerConfig::default() },
        );
        assert_eq!(forced[0], [0].into_iter().collect());
    }

    #[test]
    fn config_validation() {
        assert!(CombinerConfig::default().validate().is_ok());
        assert!(CombinerConfig { epsilon_clamp: 0.0, ..Default::default() }.validate().is_err());
        assert!(CombinerConfig { epsilon_clamp: 0.6, ..Default::default() }.validate().is_err());
    }

    proptest! {
        /// combine(p, q, r) + combine(1-p, 1-q, 1-r) = 1.
        #[test]
        fn complement_consistency(p in 0.0f64..1.0, q in 0.0f64..1.0, r in 0.0f64..1.0) {
            let eps = DEFAULT_EPSILON;
            let a = combine_posterior(p, q, r, eps);
            let b = combine_posterior(1.0 - p, 1.0 - q, 1.0 - r, eps);
            prop_assert!((a + b - 1.0).abs() < 1e-12);
        }

        /// Output lives strictly inside (0, 1) and is finite.
        #[test]
        fn output_is_open_interval(p in 0.0f64..=1.0, q in 0.0f64..=1.0, r in 0.0f64..=1.0) {
            let v = combine_posterior(p, q, r, DEFAULT_EPSILON);
            prop_assert!(v.is_finite() && v > 0.0 && v < 1.0);
        }

        /// Identity collapse: p_cl = prior gives back p_cx.
        #[test]
        fn identity_collapse(p in 0.0f64..1.0, r in 0.001f64..0.999) {
            let eps = DEFAULT_EPSILON;
            let v = combine_posterior(p, r, r, eps);
            prop_assert!((v - p.clamp(eps, 1.0 - eps)).abs() < 1e-12);
        }
    }
}
