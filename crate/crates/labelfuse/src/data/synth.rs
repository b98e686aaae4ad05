//! Synthetic corpora with injected label dependencies.
//!
//! The generator operationalizes three dependency phenomena: documents mix
//! the topics of all their labels, some label subsets trigger an extra
//! contextual label, and some label pairs never co-occur. Everything is
//! driven by a single seeded stream, so a config reproduces its corpora
//! byte for byte.

use std::collections::BTreeSet;

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha20Rng;
use rand_distr::Gamma;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{Dataset, SparseDocument};

/// "If `trigger` is a subset of the document's labels, add `add_label` with
/// probability `prob`."
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextRule {
    pub trigger: BTreeSet<usize>,
    pub add_label: usize,
    pub prob: f64,
}

/// Full recipe for a pair of train/test corpora.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_train: usize,
    pub n_test: usize,
    /// Number of categories `p`.
    pub n_categories: usize,
    pub vocab_size: usize,
    pub words_per_doc: usize,
    /// Symmetric Dirichlet concentration of the per-label topics. Small
    /// values give sparse, well-separated topics; large values give
    /// near-uniform, confusable ones.
    pub topic_concentration: f64,
    /// Label pairs that never co-occur; when both are drawn, the
    /// higher-indexed one is dropped.
    pub exclusion_pairs: Vec<(usize, usize)>,
    pub context_rules: Vec<ContextRule>,
    /// Independent Bernoulli probability of each label before rules apply.
    pub base_label_probs: Vec<f64>,
    pub seed: u64,
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let p = self.n_categories;
        let fail = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n_train == 0 {
            return fail("n_train must be positive".into());
        }
        if p == 0 {
            return fail("p must be positive".into());
        }
        if self.vocab_size == 0 {
            return fail("vocab_size must be positive".into());
        }
        if self.words_per_doc == 0 {
            return fail("words_per_doc must be positive".into());
        }
        if !(self.topic_concentration.is_finite() && self.topic_concentration > 0.0) {
            return fail("topic_concentration must be positive".into());
        }
        if self.base_label_probs.len() != p {
            return fail(format!(
                "base_label_probs has {} entries for p={}",
                self.base_label_probs.len(),
                p
            ));
        }
        if self.base_label_probs.iter().any(|q| !(0.0..=1.0).contains(q)) {
            return fail("base_label_probs must lie in [0, 1]".into());
        }
        if self.base_label_probs.iter().all(|&q| q <= 0.0) {
            return fail("at least one base label probability must be positive".into());
        }
        for &(a, b) in &self.exclusion_pairs {
            if a == b {
                return fail(format!("exclusion pair ({a}, {b}) must name two categories"));
            }
            if a >= p || b >= p {
                return fail(format!("exclusion pair ({a}, {b}) out of range for p={p}"));
            }
        }
        for rule in &self.context_rules {
            if rule.trigger.contains(&rule.add_label) {
                return fail(format!(
                    "context rule adds label {} contained in its own trigger",
                    rule.add_label
                ));
            }
            if rule.trigger.is_empty() {
                return fail("context rule trigger must be non-empty".into());
            }
            if rule.add_label >= p || rule.trigger.iter().any(|&t| t >= p) {
                return fail("context rule label out of range".into());
            }
            if !(0.0..=1.0).contains(&rule.prob) {
                return fail(format!("context rule probability {} outside [0, 1]", rule.prob));
            }
        }
        Ok(())
    }
}

/// One topic per category: a categorical distribution over the vocabulary
/// drawn from a symmetric Dirichlet.
fn draw_topics(cfg: &SynthConfig, rng: &mut ChaCha20Rng) -> Vec<WeightedIndex<f64>> {
    let gamma = Gamma::new(cfg.topic_concentration, 1.0).expect("validated concentration");
    (0..cfg.n_categories)
        .map(|_| {
            let mut weights: Vec<f64> = (0..cfg.vocab_size).map(|_| gamma.sample(rng)).collect();
            if weights.iter().sum::<f64>() <= 0.0 {
                weights.fill(1.0);
            }
            WeightedIndex::new(&weights).expect("positive weight sum")
        })
        .collect()
}

fn draw_labels(cfg: &SynthConfig, rng: &mut ChaCha20Rng) -> BTreeSet<usize> {
    // initial independent draws, redrawn until non-empty
    let mut labels: BTreeSet<usize> = BTreeSet::new();
    while labels.is_empty() {
        for (j, &q) in cfg.base_label_probs.iter().enumerate() {
            if rng.gen_bool(q) {
                labels.insert(j);
            }
        }
    }
    // exclusions drop the higher-indexed member
    for &(a, b) in &cfg.exclusion_pairs {
        if labels.contains(&a) && labels.contains(&b) {
            labels.remove(&a.max(b));
        }
    }
    // contextualization adds labels probabilistically
    for rule in &cfg.context_rules {
        if rule.trigger.is_subset(&labels) && rng.gen_bool(rule.prob) {
            labels.insert(rule.add_label);
        }
    }
    labels
}

fn draw_document(
    cfg: &SynthConfig,
    topics: &[WeightedIndex<f64>],
    doc_id: usize,
    rng: &mut ChaCha20Rng,
) -> SparseDocument {
    let labels = draw_labels(cfg, rng);
    let label_list: Vec<usize> = labels.iter().copied().collect();
    let mut counts = vec![0.0f64; cfg.vocab_size];
    for _ in 0..cfg.words_per_doc {
        let topic = label_list[rng.gen_range(0..label_list.len())];
        let word = topics[topic].sample(rng);
        counts[word] += 1.0;
    }
    let features: Vec<(usize, f64)> =
        counts.into_iter().enumerate().filter(|&(_, c)| c > 0.0).collect();
    SparseDocument { doc_id, features, labels }
}

/// Generate a train/test pair. Deterministic in the seed: one ChaCha20
/// stream drives topics, labels and words in a fixed order.
pub fn generate_synthetic(cfg: &SynthConfig) -> Result<(Dataset, Dataset)> {
    cfg.validate()?;
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    let topics = draw_topics(cfg, &mut rng);

    let train_docs: Vec<SparseDocument> =
        (0..cfg.n_train).map(|i| draw_document(cfg, &topics, i, &mut rng)).collect();
    let test_docs: Vec<SparseDocument> =
        (0..cfg.n_test).map(|i| draw_document(cfg, &topics, i, &mut rng)).collect();

    let train = Dataset::new(cfg.vocab_size, cfg.n_categories, train_docs)?;
    let test = Dataset::new(cfg.vocab_size, cfg.n_categories, test_docs)?;
    Ok((train, test))
}
