//! Corpus ingestion, preprocessing and synthesis.

pub mod format;
pub mod preprocess;
pub mod synth;

pub use format::{parse_dataset, read_dataset_file, write_dataset, write_dataset_file};
pub use preprocess::{
    prune_vocabulary, select_features, tfidf_transform, FeatureSelection, FittedPreprocess,
    SelectionMethod, Weighting,
};
pub use synth::{generate_synthetic, ContextRule, SynthConfig};
