//! Thin CLI over the library: parse flags, merge them into a run config,
//! delegate to `labelfuse::runner`.
//!
//! Exit codes: 0 success, 2 configuration error, 3 data error.

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use labelfuse::runner::{
    cmd_compare, cmd_evaluate, cmd_experiment, cmd_predict, cmd_synth, cmd_train,
    parse_context_rules, parse_exclusion_pairs, parse_modes, parse_probs, ExperimentConfig,
    PredictArgs,
};
use labelfuse::{Mode, Result};

#[derive(Parser)]
#[command(
    name = "labelfuse",
    version,
    about = "Multilabel classification with label-dependency fusion"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic train/test corpus with injected label dependencies
    Synth(RunFlags),
    /// Train a model on a dataset file and persist it
    Train(RunFlags),
    /// Score a dataset file with a persisted model
    Predict(PredictFlags),
    /// Evaluate a prediction file against a truth dataset file
    Evaluate {
        /// Truth dataset file
        truth: PathBuf,
        /// Prediction file
        predictions: PathBuf,
    },
    /// Compare two prediction files with sign tests
    Compare {
        /// Truth dataset file
        truth: PathBuf,
        /// Prediction file of system A
        pred_a: PathBuf,
        /// Prediction file of system B
        pred_b: PathBuf,
    },
    /// Full pipeline: data, training, per-mode prediction, evaluation, significance
    Experiment(RunFlags),
}

/// Flags shared by synth/train/experiment. Every flag overrides the config
/// field of the same name; unset flags leave the config (or its default)
/// untouched.
#[derive(Args, Default)]
struct RunFlags {
    /// JSON config file with the same field names as these flags
    #[arg(long)]
    config: Option<PathBuf>,

    #[arg(long)]
    train_path: Option<String>,
    #[arg(long)]
    test_path: Option<String>,

    #[arg(long)]
    n_train: Option<usize>,
    #[arg(long)]
    n_test: Option<usize>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    vocab_size: Option<usize>,
    #[arg(long)]
    words_per_doc: Option<usize>,
    #[arg(long)]
    topic_concentration: Option<f64>,
    /// Exclusion pairs, e.g. "0-1,2-5"
    #[arg(long)]
    exclusion_pairs: Option<String>,
    /// Context rules, e.g. "2+3=>7:0.9;1=>4:0.5"
    #[arg(long)]
    context_rules: Option<String>,
    /// Base label probabilities, e.g. "0.3,0.3,0.2"
    #[arg(long)]
    base_label_probs: Option<String>,

    #[arg(long)]
    min_df: Option<usize>,
    /// none, ig-sum or chi-max
    #[arg(long)]
    feat_sel: Option<String>,
    #[arg(long)]
    feat_k: Option<usize>,
    /// tf or tfidf (default depends on the content classifier)
    #[arg(long)]
    weighting: Option<String>,

    /// nb, knn, svm or logreg
    #[arg(long)]
    content: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    nb_binarize: Option<bool>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    knn_weighted: Option<bool>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long = "C", alias = "c")]
    c: Option<f64>,
    #[arg(long)]
    platt_cv3: Option<bool>,

    /// logreg or svm
    #[arg(long)]
    label_clf: Option<String>,
    /// Mode(s) to run: baseline, m1, m2 (repeatable or comma-separated)
    #[arg(long = "mode")]
    mode: Vec<String>,
    #[arg(long)]
    epsilon_clamp: Option<f64>,
    #[arg(long)]
    force_nonempty: bool,

    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default "out")
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args)]
struct PredictFlags {
    /// Persisted model file (model.json)
    #[arg(long)]
    model: PathBuf,
    /// Dataset file to score
    #[arg(long)]
    data: PathBuf,
    /// Override the model's stored mode: baseline, m1 or m2
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    force_nonempty: bool,
    /// Output directory (default "out")
    #[arg(long)]
    out: Option<String>,
}

impl RunFlags {
    fn into_config(self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_json(&std::fs::read_to_string(path)?)?,
            None => ExperimentConfig::default(),
        };

        macro_rules! set {
            ($field:ident) => {
                if let Some(v) = self.$field {
                    cfg.$field = v;
                }
            };
        }
        macro_rules! set_opt {
            ($field:ident) => {
                if self.$field.is_some() {
                    cfg.$field = self.$field;
                }
            };
        }

        set_opt!(train_path);
        set_opt!(test_path);
        set!(n_train);
        set!(n_test);
        set!(p);
        set!(vocab_size);
        set!(words_per_doc);
        set!(topic_concentration);
        if let Some(s) = &self.exclusion_pairs {
            cfg.exclusion_pairs = parse_exclusion_pairs(s)?;
        }
        if let Some(s) = &self.context_rules {
            cfg.context_rules = parse_context_rules(s)?;
        }
        if let Some(s) = &self.base_label_probs {
            cfg.base_label_probs = Some(parse_probs(s)?);
        }
        set!(min_df);
        if let Some(s) = &self.feat_sel {
            cfg.feat_sel = s.parse()?;
        }
        set!(feat_k);
        if let Some(s) = &self.weighting {
            cfg.weighting = Some(s.parse()?);
        }
        if let Some(s) = &self.content {
            cfg.content = s.parse()?;
        }
        set!(alpha);
        set!(nb_binarize);
        set!(k);
        set!(knn_weighted);
        set!(lambda);
        set!(c);
        set!(platt_cv3);
        if let Some(s) = &self.label_clf {
            cfg.label_clf = s.parse()?;
        }
        if !self.mode.is_empty() {
            let mut modes = Vec::new();
            for m in &self.mode {
                modes.extend(parse_modes(m)?);
            }
            cfg.mode = modes;
        }
        set!(epsilon_clamp);
        if self.force_nonempty {
            cfg.force_nonempty = true;
        }
        set!(seed);
        set_opt!(out);

        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth(flags) => println!("{}", cmd_synth(&flags.into_config()?)?),
        Command::Train(flags) => println!("{}", cmd_train(&flags.into_config()?)?),
        Command::Predict(flags) => {
            let mode = flags.mode.as_deref().map(Mode::from_str).transpose()?;
            let args = PredictArgs {
                model: flags.model,
                data: flags.data,
                mode,
                force_nonempty: flags.force_nonempty,
                out: PathBuf::from(flags.out.as_deref().unwrap_or("out")),
            };
            println!("{}", cmd_predict(&args)?);
        }
        Command::Evaluate { truth, predictions } => {
            print!("{}", cmd_evaluate(&truth, &predictions)?);
        }
        Command::Compare { truth, pred_a, pred_b } => {
            print!("{}", cmd_compare(&truth, &pred_a, &pred_b)?);
        }
        Command::Experiment(flags) => {
            let outcome = cmd_experiment(&flags.into_config()?)?;
            print!("{}", outcome.table);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
