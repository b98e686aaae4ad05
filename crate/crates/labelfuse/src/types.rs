//! Shared domain types and their invariants.
//!
//! Everything here is immutable after construction and safe to share across
//! concurrent workers. Constructors validate; the rest of the crate relies on
//! these invariants instead of re-checking them.
//!
//! All indices (terms, categories, documents) are 0-based everywhere,
//! including the on-disk dataset format.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One instance: sparse term counts plus its true label set.
///
/// Feature values are reals, not integers, so tf-idf-weighted corpora reuse
/// the same type; naive Bayes training accepts fractional counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseDocument {
    pub doc_id: usize,
    /// `(term index, value)` pairs with strictly increasing term indices.
    pub features: Vec<(usize, f64)>,
    pub labels: BTreeSet<usize>,
}

impl SparseDocument {
    /// Build a document, rejecting unsorted or duplicate term indices and
    /// non-finite or negative values. Label bounds are checked by
    /// [`Dataset::new`], which knows `p`.
    pub fn new(
        doc_id: usize,
        features: Vec<(usize, f64)>,
        labels: BTreeSet<usize>,
    ) -> Result<Self> {
        let mut prev: Option<usize> = None;
        for &(t, v) in &features {
            if let Some(p) = prev {
                if t <= p {
                    return Err(Error::InvalidDocument(format!(
                        "doc {doc_id}: term index {t} not strictly increasing after {p}"
                    )));
                }
            }
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidDocument(format!(
                    "doc {doc_id}: term {t} has invalid value {v}"
                )));
            }
            prev = Some(t);
        }
        Ok(Self { doc_id, features, labels })
    }

    /// Highest term index plus one, or 0 for a feature-empty document.
    pub fn min_terms(&self) -> usize {
        self.features.last().map_or(0, |&(t, _)| t + 1)
    }

    pub fn l2_norm(&self) -> f64 {
        self.features.iter().map(|&(_, v)| v * v).sum::<f64>().sqrt()
    }
}

/// Immutable corpus with fixed dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    n_terms: usize,
    n_categories: usize,
    documents: Vec<SparseDocument>,
    pub category_names: Option<Vec<String>>,
    pub term_names: Option<Vec<String>>,
}

impl Dataset {
    /// Build a corpus, checking every document against `(m, p)`.
    ///
    /// `n_terms` may be 0 (a corpus can lose its whole vocabulary to
    /// pruning); `n_categories` must be at least 1. Empty label sets are
    /// allowed here — trainers call [`Dataset::check_training`] to reject
    /// them where the learning problem requires non-empty sets.
    pub fn new(
        n_terms: usize,
        n_categories: usize,
        documents: Vec<SparseDocument>,
    ) -> Result<Self> {
        if n_categories == 0 {
            return Err(Error::InvalidData("a dataset needs at least one category".into()));
        }
        for doc in &documents {
            if doc.min_terms() > n_terms {
                return Err(Error::InvalidDocument(format!(
                    "doc {}: term index {} out of range for m={}",
                    doc.doc_id,
                    doc.min_terms() - 1,
                    n_terms
                )));
            }
            if let Some(&l) = doc.labels.iter().next_back() {
                if l >= n_categories {
                    return Err(Error::InvalidDocument(format!(
                        "doc {}: label index {} out of range for p={}",
                        doc.doc_id, l, n_categories
                    )));
                }
            }
        }
        Ok(Self { n_terms, n_categories, documents, category_names: None, term_names: None })
    }

    pub fn n_docs(&self) -> usize {
        self.documents.len()
    }

    pub fn n_terms(&self) -> usize {
        self.n_terms
    }

    pub fn n_categories(&self) -> usize {
        self.n_categories
    }

    pub fn documents(&self) -> &[SparseDocument] {
        &self.documents
    }

    pub fn doc(&self, i: usize) -> &SparseDocument {
        &self.documents[i]
    }

    /// True label sets in document order.
    pub fn label_sets(&self) -> Vec<BTreeSet<usize>> {
        self.documents.iter().map(|d| d.labels.clone()).collect()
    }

    /// Number of documents carrying each category.
    pub fn label_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.n_categories];
        for doc in &self.documents {
            for &l in &doc.labels {
                counts[l] += 1;
            }
        }
        counts
    }

    /// Number of documents carrying both `a` and `b`.
    pub fn cooccurrence(&self, a: usize, b: usize) -> usize {
        self.documents
            .iter()
            .filter(|d| d.labels.contains(&a) && d.labels.contains(&b))
            .count()
    }

    /// Reject corpora unusable for training: empty, or containing a document
    /// with no labels.
    pub fn check_training(&self) -> Result<()> {
        if self.documents.is_empty() {
            return Err(Error::InvalidData("training dataset is empty".into()));
        }
        if let Some(doc) = self.documents.iter().find(|d| d.labels.is_empty()) {
            return Err(Error::InvalidData(format!(
                "training document {} has an empty label set",
                doc.doc_id
            )));
        }
        Ok(())
    }

    /// Replace the document list, keeping dimensions. Used by preprocessing
    /// steps that rewrite features but not labels.
    pub(crate) fn with_documents(&self, n_terms: usize, documents: Vec<SparseDocument>) -> Self {
        Self {
            n_terms,
            n_categories: self.n_categories,
            documents,
            category_names: self.category_names.clone(),
            term_names: None,
        }
    }
}

/// Dense row-major `n x p` matrix of posterior estimates in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreMatrix {
    n_rows: usize,
    n_cols: usize,
    data: Vec<f64>,
}

impl ScoreMatrix {
    pub fn from_flat(n_rows: usize, n_cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n_rows * n_cols {
            return Err(Error::DimensionMismatch(format!(
                "score matrix: {} entries for {}x{}",
                data.len(),
                n_rows,
                n_cols
            )));
        }
        for (i, &v) in data.iter().enumerate() {
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidData(format!(
                    "score matrix entry {i} = {v} outside [0, 1]"
                )));
            }
        }
        Ok(Self { n_rows, n_cols, data })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::DimensionMismatch("ragged score rows".into()));
        }
        Self::from_flat(n_rows, n_cols, rows.into_iter().flatten().collect())
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.n_cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.n_cols..(row + 1) * self.n_cols]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.n_cols)
    }
}

/// The labeling context for one category: the other `p - 1` categories'
/// scores or thresholded labels.
///
/// Component `k` corresponds to category `k` when `k < excluded_category`
/// and to category `k + 1` otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelContext {
    excluded_category: usize,
    values: Vec<f64>,
}

impl LabelContext {
    /// Build a context for category `excluded_category`; `values` must hold
    /// the other `p - 1` entries, each in `[0, 1]`.
    pub fn new(excluded_category: usize, values: Vec<f64>) -> Result<Self> {
        if excluded_category > values.len() {
            return Err(Error::DimensionMismatch(format!(
                "excluded category {} out of range for p={}",
                excluded_category,
                values.len() + 1
            )));
        }
        if let Some(&v) = values.iter().find(|v| !v.is_finite() || !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidData(format!("context value {v} outside [0, 1]")));
        }
        Ok(Self { excluded_category, values })
    }

    /// Drop coordinate `excluded` from a full `p`-vector.
    pub fn from_full(full: &[f64], excluded: usize, map: impl Fn(f64) -> f64) -> Result<Self> {
        if excluded >= full.len() {
            return Err(Error::DimensionMismatch(format!(
                "excluded category {} out of range for p={}",
                excluded,
                full.len()
            )));
        }
        let values = full
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != excluded)
            .map(|(_, &v)| map(v))
            .collect();
        Self::new(excluded, values)
    }

    pub fn excluded_category(&self) -> usize {
        self.excluded_category
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Number of categories `p` implied by this context.
    pub fn n_categories(&self) -> usize {
        self.values.len() + 1
    }

    /// Reinsert the excluded coordinate, reconstructing a full `p`-vector.
    /// Inverse of [`LabelContext::from_full`] with the identity map.
    pub fn insert_excluded(&self, value: f64) -> Vec<f64> {
        let mut full = Vec::with_capacity(self.values.len() + 1);
        full.extend_from_slice(&self.values[..self.excluded_category]);
        full.push(value);
        full.extend_from_slice(&self.values[self.excluded_category..]);
        full
    }
}

/// How the label context is approximated before fusion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Content scores only; label models are ignored.
    Baseline,
    /// Thresholded context: other categories enter as 0/1 decisions.
    M1,
    /// Continuous context: other categories enter as raw probabilities.
    M2,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Baseline => "baseline",
            Mode::M1 => "m1",
            Mode::M2 => "m2",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "baseline" => Ok(Mode::Baseline),
            "m1" => Ok(Mode::M1),
            "m2" => Ok(Mode::M2),
            other => Err(Error::InvalidConfig(format!(
                "unknown mode '{other}' (expected baseline, m1 or m2)"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(ls: &[usize]) -> BTreeSet<usize> {
        ls.iter().copied().collect()
    }

    #[test]
    fn document_rejects_duplicate_term_index() {
        let err = SparseDocument::new(0, vec![(1, 2.0), (1, 3.0)], labels(&[0]));
        assert!(err.is_err());
    }

    #[test]
    fn document_rejects_unsorted_term_index() {
        let err = SparseDocument::new(0, vec![(5, 1.0), (2, 1.0)], labels(&[0]));
        assert!(err.is_err());
    }

    #[test]
    fn document_rejects_negative_and_nonfinite_values() {
        assert!(SparseDocument::new(0, vec![(0, -1.0)], labels(&[0])).is_err());
        assert!(SparseDocument::new(0, vec![(0, f64::NAN)], labels(&[0])).is_err());
        assert!(SparseDocument::new(0, vec![(0, f64::INFINITY)], labels(&[0])).is_err());
    }

    #[test]
    fn dataset_rejects_out_of_range_indices() {
        let doc = SparseDocument::new(0, vec![(3, 1.0)], labels(&[0])).unwrap();
        assert!(Dataset::new(3, 2, vec![doc.clone()]).is_err());
        assert!(Dataset::new(4, 2, vec![doc]).is_ok());

        let doc = SparseDocument::new(0, vec![], labels(&[2])).unwrap();
        assert!(Dataset::new(0, 2, vec![doc]).is_err());
    }

    #[test]
    fn score_matrix_rejects_out_of_range_entries() {
        assert!(ScoreMatrix::from_flat(1, 2, vec![0.0, 1.0]).is_ok());
        assert!(ScoreMatrix::from_flat(1, 2, vec![0.0, 1.5]).is_err());
        assert!(ScoreMatrix::from_flat(1, 2, vec![f64::NAN, 0.5]).is_err());
        assert!(ScoreMatrix::from_flat(1, 1, vec![0.0, 1.0]).is_err());
    }

    #[test]
    fn label_context_roundtrip_is_bijective() {
        let full = [0.1, 0.2, 0.3, 0.4];
        for j in 0..full.len() {
            let ctx = LabelContext::from_full(&full, j, |v| v).unwrap();
            assert_eq!(ctx.values().len(), full.len() - 1);
            assert_eq!(ctx.insert_excluded(full[j]), full.to_vec());
        }
    }

    #[test]
    fn label_context_validates_values() {
        assert!(LabelContext::new(0, vec![0.5, 1.1]).is_err());
        assert!(LabelContext::new(3, vec![0.5, 0.5]).is_err());
    }

    #[test]
    fn mode_parses_case_insensitively() {
        assert_eq!("M1".parse::<Mode>().unwrap(), Mode::M1);
        assert_eq!("baseline".parse::<Mode>().unwrap(), Mode::Baseline);
        assert!("m3".parse::<Mode>().is_err());
    }
}
