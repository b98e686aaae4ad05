//! Vocabulary pruning, feature selection and term weighting.
//!
//! Feature-selection statistics are presence-based (a term counts for a
//! document when its value is > 0), the standard convention for information
//! gain and chi-square in text categorization. Logarithms are natural; the
//! base only rescales rankings.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{Dataset, SparseDocument};

/// Per-term per-category 2x2 presence table scorer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SelectionMethod {
    /// Information gain, combined across categories by summing.
    IgSum,
    /// Chi-square statistic, combined across categories by taking the max.
    ChiMax,
}

impl fmt::Display for SelectionMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SelectionMethod::IgSum => "ig-sum",
            SelectionMethod::ChiMax => "chi-max",
        })
    }
}

impl FromStr for SelectionMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ig-sum" | "ig_sum" => Ok(SelectionMethod::IgSum),
            "chi-max" | "chi_max" => Ok(SelectionMethod::ChiMax),
            other => Err(Error::InvalidConfig(format!(
                "unknown feature selection method '{other}'"
            ))),
        }
    }
}

/// Outcome of a feature-selection pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSelection {
    pub method: SelectionMethod,
    pub k: usize,
    /// Kept original term indices, sorted ascending.
    pub kept_terms: Vec<usize>,
    /// Old index -> new index; `None` for dropped terms.
    pub remap: Vec<Option<usize>>,
}

/// Term weighting applied before training distance- or margin-based models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weighting {
    /// Raw term frequencies as parsed.
    Tf,
    /// tf * ln(n/df), then L2-normalized per document.
    TfIdf,
}

impl fmt::Display for Weighting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Weighting::Tf => "tf",
            Weighting::TfIdf => "tfidf",
        })
    }
}

impl FromStr for Weighting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tf" => Ok(Weighting::Tf),
            "tfidf" | "tf-idf" => Ok(Weighting::TfIdf),
            other => Err(Error::InvalidConfig(format!("unknown weighting '{other}'"))),
        }
    }
}

/// Document frequencies: number of documents where each term has value > 0.
fn document_frequencies(ds: &Dataset) -> Vec<usize> {
    let mut df = vec![0usize; ds.n_terms()];
    for doc in ds.documents() {
        for &(t, v) in &doc.features {
            if v > 0.0 {
                df[t] += 1;
            }
        }
    }
    df
}

fn remap_documents(ds: &Dataset, remap: &[Option<usize>], new_m: usize) -> Dataset {
    let documents = ds
        .documents()
        .iter()
        .map(|doc| {
            let features = doc
                .features
                .iter()
                .filter_map(|&(t, v)| remap[t].map(|nt| (nt, v)))
                .collect();
            // remap is monotone on kept indices, so order is preserved
            SparseDocument { doc_id: doc.doc_id, features, labels: doc.labels.clone() }
        })
        .collect();
    ds.with_documents(new_m, documents)
}

fn build_remap(n_terms: usize, kept: &[usize]) -> Vec<Option<usize>> {
    let mut remap = vec![None; n_terms];
    for (new, &old) in kept.iter().enumerate() {
        remap[old] = Some(new);
    }
    remap
}

/// Remove terms occurring in fewer than `min_df` documents, reindexing the
/// survivors densely in their original order. Label sets are untouched.
pub fn prune_vocabulary(ds: &Dataset, min_df: usize) -> Result<(Dataset, Vec<Option<usize>>)> {
    if min_df < 1 {
        return Err(Error::InvalidParameter("min_df must be >= 1".into()));
    }
    let df = document_frequencies(ds);
    let kept: Vec<usize> = (0..ds.n_terms()).filter(|&t| df[t] >= min_df).collect();
    let remap = build_remap(ds.n_terms(), &kept);
    Ok((remap_documents(ds, &remap, kept.len()), remap))
}

/// Information gain (mutual information, natural log) of one 2x2 table.
/// Degenerate margins contribute 0 rather than NaN.
fn information_gain(a: f64, b: f64, c: f64, d: f64, n: f64) -> f64 {
    let cells = [
        (a, a + b, a + c), // term present, in category
        (b, a + b, b + d), // term present, not in category
        (c, c + d, a + c), // term absent, in category
        (d, c + d, b + d), // term absent, not in category
    ];
    let mut ig = 0.0;
    for (cnt, row, col) in cells {
        if cnt > 0.0 && row > 0.0 && col > 0.0 {
            ig += cnt / n * (n * cnt / (row * col)).ln();
        }
    }
    ig.max(0.0)
}

/// Chi-square statistic of one 2x2 table; 0 for degenerate margins.
fn chi_square(a: f64, b: f64, c: f64, d: f64, n: f64) -> f64 {
    let denom = (a + c) * (b + d) * (a + b) * (c + d);
    if denom == 0.0 {
        return 0.0;
    }
    let diff = a * d - c * b;
    n * diff * diff / denom
}

/// Keep the top-`k` terms by the per-term global score (IG summed over
/// categories, or chi-square maxed over categories). Ties break toward the
/// lower original index. Terms present in no document are never kept.
pub fn select_features(
    ds: &Dataset,
    method: SelectionMethod,
    k: usize,
) -> Result<(Dataset, FeatureSelection)> {
    if k < 1 {
        return Err(Error::InvalidParameter("feature selection k must be >= 1".into()));
    }
    let n = ds.n_docs();
    let m = ds.n_terms();
    let p = ds.n_categories();
    let df = document_frequencies(ds);
    let cat_counts = ds.label_counts();

    // co-occurrence of term presence with each category
    let mut present_and_cat = vec![0usize; m * p];
    for doc in ds.documents() {
        for &(t, v) in &doc.features {
            if v > 0.0 {
                for &l in &doc.labels {
                    present_and_cat[t * p + l] += 1;
                }
            }
        }
    }

    let n_f = n as f64;
    let mut scores = vec![0.0f64; m];
    for t in 0..m {
        if df[t] == 0 {
            continue;
        }
        let mut acc = 0.0f64;
        for j in 0..p {
            let a = present_and_cat[t * p + j] as f64;
            let b = df[t] as f64 - a;
            let c = cat_counts[j] as f64 - a;
            let d = n_f - df[t] as f64 - c;
            let s = match method {
                SelectionMethod::IgSum => information_gain(a, b, c, d, n_f),
                SelectionMethod::ChiMax => chi_square(a, b, c, d, n_f),
            };
            acc = match method {
                SelectionMethod::IgSum => acc + s,
                SelectionMethod::ChiMax => acc.max(s),
            };
        }
        scores[t] = acc;
    }

    let mut live: Vec<usize> = (0..m).filter(|&t| df[t] > 0).collect();
    live.sort_by(|&x, &y| scores[y].total_cmp(&scores[x]).then(x.cmp(&y)));
    let mut kept: Vec<usize> = live.into_iter().take(k).collect();
    kept.sort_unstable();

    let remap = build_remap(m, &kept);
    let new_ds = remap_documents(ds, &remap, kept.len());
    Ok((new_ds, FeatureSelection { method, k, kept_terms: kept, remap }))
}

fn idf_vector(ds: &Dataset) -> Vec<f64> {
    let n = ds.n_docs() as f64;
    document_frequencies(ds)
        .into_iter()
        .map(|df| if df > 0 { (n / df as f64).ln() } else { 0.0 })
        .collect()
}

fn weight_document(doc: &SparseDocument, idf: &[f64]) -> SparseDocument {
    let mut features: Vec<(usize, f64)> =
        doc.features.iter().map(|&(t, v)| (t, v * idf[t])).collect();
    let norm = features.iter().map(|&(_, v)| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        for (_, v) in &mut features {
            *v /= norm;
        }
    }
    SparseDocument { doc_id: doc.doc_id, features, labels: doc.labels.clone() }
}

/// tf-idf weighting with the dataset's own document frequencies:
/// `value(t, d) = tf(t, d) * ln(n / df(t))`, then per-document L2
/// normalization. Zero-norm documents stay all-zero.
pub fn tfidf_transform(ds: &Dataset) -> Dataset {
    let idf = idf_vector(ds);
    let documents = ds.documents().iter().map(|d| weight_document(d, &idf)).collect();
    ds.with_documents(ds.n_terms(), documents)
}

/// Preprocessing fitted on a training corpus, replayable on test corpora:
/// the composed term remap from pruning and selection, plus the weighting
/// (with training idf values when tf-idf).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedPreprocess {
    pub input_terms: usize,
    pub remap: Vec<Option<usize>>,
    pub output_terms: usize,
    pub weighting: Weighting,
    /// Training idf per output term; empty under `Weighting::Tf`.
    pub idf: Vec<f64>,
}

impl FittedPreprocess {
    /// Prune, select and weight a training corpus, recording everything
    /// needed to apply the same transform to future corpora.
    pub fn fit(
        ds: &Dataset,
        min_df: usize,
        selection: Option<(SelectionMethod, usize)>,
        weighting: Weighting,
    ) -> Result<(Dataset, FittedPreprocess)> {
        let input_terms = ds.n_terms();
        let (pruned, prune_map) = prune_vocabulary(ds, min_df)?;
        let (reduced, composed) = match selection {
            Some((method, k)) => {
                let (selected, sel) = select_features(&pruned, method, k)?;
                let composed = prune_map
                    .iter()
                    .map(|slot| slot.and_then(|mid| sel.remap[mid]))
                    .collect();
                (selected, composed)
            }
            None => (pruned, prune_map),
        };
        let output_terms = reduced.n_terms();
        let (weighted, idf) = match weighting {
            Weighting::Tf => (reduced, Vec::new()),
            Weighting::TfIdf => {
                let idf = idf_vector(&reduced);
                let documents =
                    reduced.documents().iter().map(|d| weight_document(d, &idf)).collect();
                (reduced.with_documents(output_terms, documents), idf)
            }
        };
        Ok((weighted, FittedPreprocess { input_terms, remap: composed, output_terms, weighting, idf }))
    }

    /// Replay the fitted transform on another corpus with the same original
    /// vocabulary.
    pub fn apply(&self, ds: &Dataset) -> Result<Dataset> {
        if ds.n_terms() > self.input_terms {
            return Err(Error::DimensionMismatch(format!(
                "dataset has m={} but the preprocess was fitted on m={}",
                ds.n_terms(),
                self.input_terms
            )));
        }
        let remapped = remap_documents(ds, &self.remap, self.output_terms);
        match self.weighting {
            Weighting::Tf => Ok(remapped),
            Weighting::TfIdf => {
                let documents =
                    remapped.documents().iter().map(|d| weight_document(d, &self.idf)).collect();
                Ok(remapped.with_documents(self.output_terms, documents))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::format::parse_dataset;

    fn ds(text: &str) -> Dataset {
        parse_dataset(text, None, false).unwrap()
    }

    #[test]
    fn prune_removes_low_df_terms() {
        // term 0 in 2 docs, term 1 in 3 docs, term 2 in 1 doc
        let d = ds("0 0:1 1:1\n0 0:1 1:1 2:1\n1 1:1\n1 \n");
        let (pruned, remap) = prune_vocabulary(&d, 3).unwrap();
        assert_eq!(pruned.n_terms(), 1);
        assert_eq!(remap, vec![None, Some(0), None]);
        assert_eq!(pruned.doc(0).features, vec![(0, 1.0)]);
        // boundary: df == min_df is kept
        let (kept, _) = prune_vocabulary(&d, 2).unwrap();
        assert_eq!(kept.n_terms(), 2);
    }

    #[test]
    fn prune_min_df_one_is_identity_on_live_vocabulary() {
        let d = ds("0 0:1 1:2\n1 0:1\n");
        let (pruned, remap) = prune_vocabulary(&d, 1).unwrap();
        assert_eq!(pruned, d);
        assert!(remap.iter().enumerate().all(|(i, r)| *r == Some(i)));
    }

    #[test]
    fn prune_is_idempotent() {
        let d = ds("0 0:1 1:1\n0 1:1 2:1\n1 1:1\n");
        let (once, _) = prune_vocabulary(&d, 2).unwrap();
        let (twice, _) = prune_vocabulary(&once, 2).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn chi_square_hand_value() {
        // 8 docs, one category: A=3, B=1, C=1, D=3
        assert_eq!(chi_square(3.0, 1.0, 1.0, 3.0, 8.0), 2.0);
    }

    #[test]
    fn independent_term_has_zero_information_gain() {
        // term present in half of each class: independent of the category
        let d = ds("0 0:1 1:1\n0 1:1\n1 0:1 1:1\n1 1:1\n");
        let (_, sel) = select_features(&d, SelectionMethod::IgSum, 2).unwrap();
        // term 0 is independent, term 1 is constant: both score 0, tie-break
        // keeps the lower index first but k=2 keeps both
        assert_eq!(sel.kept_terms, vec![0, 1]);
        let (_, sel1) = select_features(&d, SelectionMethod::IgSum, 1).unwrap();
        assert_eq!(sel1.kept_terms, vec![0]);
    }

    #[test]
    fn informative_term_outranks_independent_term() {
        // term 1 perfectly predicts category 0; term 0 is noise
        let d = ds("0 0:1 1:1\n0 1:1\n1 0:1\n1 \n");
        let (reduced, sel) = select_features(&d, SelectionMethod::ChiMax, 1).unwrap();
        assert_eq!(sel.kept_terms, vec![1]);
        assert_eq!(reduced.n_terms(), 1);
        assert_eq!(reduced.doc(0).features, vec![(0, 1.0)]);
    }

    #[test]
    fn selection_saturates_to_identity() {
        let d = ds("0 0:1 1:1\n1 1:1\n");
        let (reduced, sel) = select_features(&d, SelectionMethod::IgSum, 10).unwrap();
        assert_eq!(reduced, d);
        assert!(sel.remap.iter().enumerate().all(|(i, r)| *r == Some(i)));
    }

    #[test]
    fn degenerate_category_contributes_zero() {
        // every doc is in category 0: scores must be finite (0), not NaN
        let d = ds("0 0:1\n0 1:1\n");
        let (_, sel) = select_features(&d, SelectionMethod::IgSum, 2).unwrap();
        assert_eq!(sel.kept_terms, vec![0, 1]);
        let (_, sel) = select_features(&d, SelectionMethod::ChiMax, 2).unwrap();
        assert_eq!(sel.kept_terms, vec![0, 1]);
    }

    #[test]
    fn tfidf_hand_values() {
        // 2 docs, doc0 = {a:1, b:1}, df(a)=1, df(b)=2
        let d = ds("0 0:1 1:1\n1 1:1\n");
        let w = tfidf_transform(&d);
        let feats = &w.doc(0).features;
        assert_eq!(feats[0].0, 0);
        assert!((feats[0].1 - 1.0).abs() < 1e-12, "{:?}", feats);
        assert_eq!(feats[1], (1, 0.0));
        // a term present in every document gets idf 0; doc1 has zero norm
        assert_eq!(w.doc(1).features, vec![(1, 0.0)]);
    }

    #[test]
    fn tfidf_single_doc_normalizes_to_one() {
        let d = ds("0 3:7\n");
        // single doc: idf = ln(1/1) = 0 -> zero vector stays zero
        let w = tfidf_transform(&d);
        assert_eq!(w.doc(0).features, vec![(3, 0.0)]);
        // two docs, term only in one: weight normalizes to 1
        let d = ds("0 0:7\n1 1:1\n");
        let w = tfidf_transform(&d);
        assert!((w.doc(0).features[0].1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fitted_preprocess_replays_on_test_data() {
        let train = ds("0 0:2 1:1\n0 1:1 2:5\n1 1:1\n1 0:1\n");
        let (wtrain, fitted) =
            FittedPreprocess::fit(&train, 2, None, Weighting::TfIdf).unwrap();
        // term 2 (df=1) pruned
        assert_eq!(fitted.output_terms, 2);
        assert_eq!(wtrain.n_terms(), 2);
        let test = ds("0 0:1 2:9\n");
        let wtest = fitted.apply(&test).unwrap();
        assert_eq!(wtest.n_terms(), 2);
        // term 2 dropped, term 0 reweighted by train idf and normalized
        assert_eq!(wtest.doc(0).features.len(), 1);
        assert!((wtest.doc(0).features[0].1 - 1.0).abs() < 1e-12);
    }
}
