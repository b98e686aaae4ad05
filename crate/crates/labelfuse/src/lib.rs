//! Multilabel classification with probabilistic label-dependency fusion.
//!
//! The usual way to attack a multilabel problem is binary relevance: train
//! one independent probabilistic classifier per category and threshold each
//! output. That ignores how labels interact — some labels contextualize
//! others, some never co-occur. This crate keeps the per-category *content*
//! classifiers but pairs each with a *label* classifier trained on the other
//! categories' label bits, then fuses the two posteriors with the category
//! prior:
//!
//! ```text
//!                    p(c|x) p(c|l) / p(c)
//! p(c|x,l) = -----------------------------------------------------
//!            p(c|x) p(c|l) / p(c) + p(~c|x) p(~c|l) / p(~c)
//! ```
//!
//! At prediction time the true labels of the other categories are unknown,
//! so they are approximated from the content scores — either thresholded at
//! 0.5 (mode M1) or passed through as raw probabilities (mode M2).
//!
//! # Quick start
//!
//! ```
//! use labelfuse::data::{generate_synthetic, ContextRule, SynthConfig};
//! use labelfuse::model::{Pipeline, PipelineSpec};
//! use labelfuse::combine::{binarize, CombinerConfig};
//! use labelfuse::eval::metrics_report;
//!
//! let cfg = SynthConfig {
//!     n_train: 300,
//!     n_test: 100,
//!     n_categories: 4,
//!     vocab_size: 50,
//!     words_per_doc: 20,
//!     topic_concentration: 0.3,
//!     exclusion_pairs: vec![(0, 1)],
//!     context_rules: vec![],
//!     base_label_probs: vec![0.5, 0.5, 0.3, 0.2],
//!     seed: 42,
//! };
//! let (train, test) = generate_synthetic(&cfg).unwrap();
//! let pipeline = Pipeline::fit(&train, &PipelineSpec::default()).unwrap();
//! let (_base, fused) = pipeline.predict(&test).unwrap();
//! let pred = binarize(&fused, &CombinerConfig::default());
//! let report = metrics_report(&test.label_sets(), &pred, &fused, 4).unwrap();
//! assert!(report.macro_f1 > 0.0);
//! ```
//!
//! The `examples/` directory walks through every major capability; the
//! `labelfuse` binary wraps the same library behind `synth`, `train`,
//! `predict`, `evaluate`, `compare` and `experiment` subcommands.

pub mod classifiers;
pub mod combine;
pub mod data;
pub mod error;
pub mod eval;
pub mod labels;
pub mod model;
pub mod runner;
pub mod scores;
pub mod types;

pub use error::{Error, Result};
pub use types::{Dataset, LabelContext, Mode, ScoreMatrix, SparseDocument};
