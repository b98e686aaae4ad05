//! k-nearest-neighbour classifier with a normalized probabilistic vote.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{Dataset, SparseDocument};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KnnOptions {
    pub k: usize,
    /// Similarity-weighted vote (default); `false` counts neighbours only.
    pub weighted: bool,
}

impl Default for KnnOptions {
    fn default() -> Self {
        Self { k: 30, weighted: true }
    }
}

/// L2-normalized training vectors, shared by the `p` per-category indexes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnStore {
    pub n_terms: usize,
    pub vectors: Vec<Vec<(usize, f64)>>,
}

impl KnnStore {
    /// Normalize every document to unit L2 norm (feature-empty documents
    /// stay all-zero).
    pub fn build(ds: &Dataset) -> Self {
        let vectors = ds
            .documents()
            .iter()
            .map(|doc| {
                let norm = doc.l2_norm();
                if norm > 0.0 {
                    doc.features.iter().map(|&(t, v)| (t, v / norm)).collect()
                } else {
                    doc.features.clone()
                }
            })
            .collect();
        Self { n_terms: ds.n_terms(), vectors }
    }
}

/// Dot product of two sorted sparse vectors.
fn sparse_dot(a: &[(usize, f64)], b: &[(usize, f64)]) -> f64 {
    let mut dot = 0.0;
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                dot += a[i].1 * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    dot
}

/// One-vs-rest k-NN "model": the shared store plus this category's bits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnIndex {
    pub store: Arc<KnnStore>,
    pub category_bits: Vec<bool>,
    pub k: usize,
    pub weighted: bool,
    /// Smoothed class prior, returned when no neighbour has positive
    /// similarity.
    pub fallback_prior: f64,
}

pub fn train_knn(
    store: Arc<KnnStore>,
    ds: &Dataset,
    category: usize,
    opts: &KnnOptions,
) -> Result<KnnIndex> {
    if opts.k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    if opts.k > store.vectors.len() {
        return Err(Error::InvalidParameter(format!(
            "k={} exceeds the {} stored training documents",
            opts.k,
            store.vectors.len()
        )));
    }
    if category >= ds.n_categories() {
        return Err(Error::DimensionMismatch(format!(
            "category {category} out of range for p={}",
            ds.n_categories()
        )));
    }
    let category_bits: Vec<bool> =
        ds.documents().iter().map(|d| d.labels.contains(&category)).collect();
    let n_pos = category_bits.iter().filter(|&&b| b).count();
    let fallback_prior = (n_pos as f64 + 1.0) / (ds.n_docs() as f64 + 2.0);
    Ok(KnnIndex { store, category_bits, k: opts.k, weighted: opts.weighted, fallback_prior })
}

impl KnnIndex {
    /// Similarity-weighted vote over the k nearest neighbours by cosine:
    /// `p = sum_{neighbours in c} sim / sum_{all k} sim`, or the count
    /// fraction in unweighted mode. Falls back to the class prior when the
    /// total similarity is zero. Ties in the ranking break toward the lower
    /// training index.
    pub fn predict_proba(&self, doc: &SparseDocument) -> Result<f64> {
        if doc.min_terms() > self.store.n_terms {
            return Err(Error::DimensionMismatch(format!(
                "term index {} out of range for k-NN store with m={}",
                doc.min_terms() - 1,
                self.store.n_terms
            )));
        }
        let norm = doc.l2_norm();
        let query: Vec<(usize, f64)> = if norm > 0.0 {
            doc.features.iter().map(|&(t, v)| (t, v / norm)).collect()
        } else {
            Vec::new()
        };

        let mut sims: Vec<(f64, usize)> = self
            .store
            .vectors
            .iter()
            .enumerate()
            .map(|(i, v)| (sparse_dot(&query, v), i))
            .collect();
        sims.sort_unstable_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let neighbours = &sims[..self.k];

        let total: f64 = neighbours.iter().map(|&(s, _)| s).sum();
        if total <= 0.0 {
            return Ok(self.fallback_prior);
        }
        if self.weighted {
            let in_class: f64 = neighbours
                .iter()
                .filter(|&&(_, i)| self.category_bits[i])
                .map(|&(s, _)| s)
                .sum();
            Ok(in_class / total)
        } else {
            let in_class = neighbours.iter().filter(|&&(_, i)| self.category_bits[i]).count();
            Ok(in_class as f64 / self.k as f64)
        }
    }
}
