//! The experiment runner behind the CLI subcommands.
//!
//! A single flat [`ExperimentConfig`] describes a run end to end: where the
//! data comes from (files or the synthetic generator), how it is
//! preprocessed, which classifiers are trained, and which context modes are
//! evaluated. Every field can come from a JSON config file and be overridden
//! by a command-line flag of the same name.
//!
//! All output files are rendered in memory first and written by a single
//! writer at the end, so a failing run leaves no partial files.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classifiers::{ContentKind, KnnOptions, NbOptions};
use crate::combine::{binarize, fuse_scores, predict_all, CombinerConfig, DEFAULT_EPSILON};
use crate::data::format::{nth_data_line, read_dataset_file, write_dataset};
use crate::data::{generate_synthetic, ContextRule, SelectionMethod, SynthConfig, Weighting};
use crate::error::{Error, Result};
use crate::eval::{macro_s_test, metrics_report, micro_sign_test, MetricsReport, SignificanceVerdict};
use crate::labels::LabelKind;
use crate::model::{ModelSpec, Pipeline, PipelineSpec};
use crate::scores::{predictions_to_string, read_predictions, scores_to_csv};
use crate::types::{Dataset, Mode, ScoreMatrix};

fn config_err(msg: impl Into<String>) -> Error {
    Error::InvalidConfig(msg.into())
}

/// Feature selection choice as it appears in configs and flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum FeatSel {
    #[default]
    None,
    IgSum,
    ChiMax,
}

impl FeatSel {
    fn to_method(self) -> Option<SelectionMethod> {
        match self {
            FeatSel::None => None,
            FeatSel::IgSum => Some(SelectionMethod::IgSum),
            FeatSel::ChiMax => Some(SelectionMethod::ChiMax),
        }
    }
}

impl std::str::FromStr for FeatSel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(FeatSel::None),
            "ig-sum" | "ig_sum" => Ok(FeatSel::IgSum),
            "chi-max" | "chi_max" => Ok(FeatSel::ChiMax),
            other => Err(config_err(format!(
                "unknown feature selection '{other}' (expected none, ig-sum or chi-max)"
            ))),
        }
    }
}

fn one_or_many<'de, D>(deserializer: D) -> std::result::Result<Vec<Mode>, D::Error>
where
    D: serde::Deserializer<'de>,
{
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(Mode),
        Many(Vec<Mode>),
    }
    Ok(match OneOrMany::deserialize(deserializer)? {
        OneOrMany::One(m) => vec![m],
        OneOrMany::Many(v) => v,
    })
}

fn default_modes() -> Vec<Mode> {
    vec![Mode::Baseline, Mode::M1, Mode::M2]
}

fn default_n_train() -> usize {
    2000
}
fn default_n_test() -> usize {
    1000
}
fn default_p() -> usize {
    8
}
fn default_vocab() -> usize {
    500
}
fn default_words() -> usize {
    40
}
fn default_concentration() -> f64 {
    0.2
}
fn default_min_df() -> usize {
    1
}
fn default_feat_k() -> usize {
    1000
}
fn default_content() -> ContentKind {
    ContentKind::Nb
}
fn default_alpha() -> f64 {
    1.0
}
fn default_k() -> usize {
    30
}
fn default_true() -> bool {
    true
}
fn default_one() -> f64 {
    1.0
}
fn default_label_clf() -> LabelKind {
    LabelKind::Logreg
}
fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}
fn default_seed() -> u64 {
    42
}

/// One flat document describing a whole run. JSON field names match the
/// CLI flag names (`--n-train` sets `n_train`, and so on).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    // data: files take precedence over the synthetic generator
    #[serde(default)]
    pub train_path: Option<String>,
    #[serde(default)]
    pub test_path: Option<String>,

    // synthetic generator
    #[serde(default = "default_n_train")]
    pub n_train: usize,
    #[serde(default = "default_n_test")]
    pub n_test: usize,
    #[serde(default = "default_p")]
    pub p: usize,
    #[serde(default = "default_vocab")]
    pub vocab_size: usize,
    #[serde(default = "default_words")]
    pub words_per_doc: usize,
    #[serde(default = "default_concentration")]
    pub topic_concentration: f64,
    #[serde(default)]
    pub exclusion_pairs: Vec<(usize, usize)>,
    #[serde(default)]
    pub context_rules: Vec<ContextRule>,
    #[serde(default)]
    pub base_label_probs: Option<Vec<f64>>,

    // preprocessing
    #[serde(default = "default_min_df")]
    pub min_df: usize,
    #[serde(default)]
    pub feat_sel: FeatSel,
    #[serde(default = "default_feat_k")]
    pub feat_k: usize,
    #[serde(default)]
    pub weighting: Option<Weighting>,

    // content classifier
    #[serde(default = "default_content")]
    pub content: ContentKind,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub nb_binarize: bool,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_true")]
    pub knn_weighted: bool,
    #[serde(default = "default_one")]
    pub lambda: f64,
    #[serde(default = "default_one", rename = "c", alias = "C")]
    pub c: f64,
    #[serde(default)]
    pub platt_cv3: bool,

    // label classifier and fusion
    #[serde(default = "default_label_clf")]
    pub label_clf: LabelKind,
    #[serde(default = "default_modes", deserialize_with = "one_or_many")]
    pub mode: Vec<Mode>,
    #[serde(default = "default_epsilon")]
    pub epsilon_clamp: f64,
    #[serde(default)]
    pub force_nonempty: bool,

    // run
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("empty config deserializes to defaults")
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| config_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.mode.is_empty() {
            return Err(config_err("at least one mode is required"));
        }
        if !(self.epsilon_clamp > 0.0 && self.epsilon_clamp < 0.5) {
            return Err(config_err(format!(
                "epsilon_clamp {} outside (0, 0.5)",
                self.epsilon_clamp
            )));
        }
        if self.train_path.is_none() {
            self.synth_config()?.validate()?;
        }
        Ok(())
    }

    /// Modes to run, deduplicated but in the configured order.
    pub fn modes(&self) -> Vec<Mode> {
        let mut seen = BTreeSet::new();
        self.mode.iter().copied().filter(|m| seen.insert(*m)).collect()
    }

    pub fn synth_config(&self) -> Result<SynthConfig> {
        let base = self
            .base_label_probs
            .clone()
            .unwrap_or_else(|| vec![0.3; self.p]);
        if base.len() != self.p {
            return Err(config_err(format!(
                "base_label_probs has {} entries for p={}",
                base.len(),
                self.p
            )));
        }
        Ok(SynthConfig {
            n_train: self.n_train,
            n_test: self.n_test,
            n_categories: self.p,
            vocab_size: self.vocab_size,
            words_per_doc: self.words_per_doc,
            topic_concentration: self.topic_concentration,
            exclusion_pairs: self.exclusion_pairs.clone(),
            context_rules: self.context_rules.clone(),
            base_label_probs: base,
            seed: self.seed,
        })
    }

    pub fn pipeline_spec(&self) -> PipelineSpec {
        // a single explicitly requested mode is stored in the model;
        // otherwise the continuous mode is the default
        let stored_mode = match self.modes().as_slice() {
            [only] => *only,
            _ => Mode::M2,
        };
        PipelineSpec {
            min_df: self.min_df,
            selection: self.feat_sel.to_method().map(|m| (m, self.feat_k)),
            weighting: self.weighting,
            model: ModelSpec {
                content: self.content,
                nb: NbOptions { alpha: self.alpha, binarize: self.nb_binarize },
                knn: KnnOptions { k: self.k, weighted: self.knn_weighted },
                lambda: self.lambda,
                c: self.c,
                platt_cv3: self.platt_cv3,
                label_kind: self.label_clf,
                mode: stored_mode,
                epsilon_clamp: self.epsilon_clamp,
            },
        }
    }

    pub fn combiner_config(&self, mode: Mode) -> CombinerConfig {
        CombinerConfig {
            mode,
            epsilon_clamp: self.epsilon_clamp,
            force_nonempty: self.force_nonempty,
            ..CombinerConfig::default()
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        PathBuf::from(self.out.as_deref().unwrap_or("out"))
    }
}

/// `"0-1,2-5"` -> `[(0, 1), (2, 5)]`.
pub fn parse_exclusion_pairs(s: &str) -> Result<Vec<(usize, usize)>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|pair| {
            let (a, b) = pair
                .split_once('-')
                .ok_or_else(|| config_err(format!("bad exclusion pair '{pair}' (want A-B)")))?;
            Ok((
                a.trim().parse().map_err(|_| config_err(format!("bad category '{a}'")))?,
                b.trim().parse().map_err(|_| config_err(format!("bad category '{b}'")))?,
            ))
        })
        .collect()
}

/// `"2+3=>7:0.9;1=>4:0.5"` -> two context rules.
pub fn parse_context_rules(s: &str) -> Result<Vec<ContextRule>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(';')
        .map(|rule| {
            let (trigger, rest) = rule
                .split_once("=>")
                .ok_or_else(|| config_err(format!("bad context rule '{rule}' (want T+T=>L:Q)")))?;
            let (label, prob) = rest
                .split_once(':')
                .ok_or_else(|| config_err(format!("bad context rule '{rule}' (missing :prob)")))?;
            let trigger: BTreeSet<usize> = trigger
                .split('+')
                .map(|t| t.trim().parse().map_err(|_| config_err(format!("bad category '{t}'"))))
                .collect::<Result<_>>()?;
            Ok(ContextRule {
                trigger,
                add_label: label
                    .trim()
                    .parse()
                    .map_err(|_| config_err(format!("bad category '{label}'")))?,
                prob: prob
                    .trim()
                    .parse()
                    .map_err(|_| config_err(format!("bad probability '{prob}'")))?,
            })
        })
        .collect()
}

/// `"0.3,0.2,0.5"` -> probabilities.
pub fn parse_probs(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| t.trim().parse().map_err(|_| config_err(format!("bad probability '{t}'"))))
        .collect()
}

/// `"baseline,m2"` or a single mode name.
pub fn parse_modes(s: &str) -> Result<Vec<Mode>> {
    s.split(',').map(|t| t.trim().parse()).collect()
}

// ---------------------------------------------------------------------------
// commands
// ---------------------------------------------------------------------------

struct OutputSink {
    files: Vec<(PathBuf, String)>,
}

impl OutputSink {
    fn new() -> Self {
        Self { files: Vec::new() }
    }

    fn add(&mut self, path: PathBuf, content: String) {
        self.files.push((path, content));
    }

    /// Write everything at once; nothing touches the disk before this.
    fn flush(self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for (path, content) in self.files {
            std::fs::write(path, content)?;
        }
        Ok(())
    }
}

fn marginal_summary(ds: &Dataset) -> String {
    let n = ds.n_docs() as f64;
    ds.label_counts()
        .iter()
        .enumerate()
        .map(|(j, &c)| format!("  label {j}: {:.4}", c as f64 / n))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Generate a synthetic corpus pair and write `train.txt` / `test.txt`.
/// Returns the printed summary.
pub fn cmd_synth(cfg: &ExperimentConfig) -> Result<String> {
    cfg.validate()?;
    let synth = cfg.synth_config()?;
    let (train, test) = generate_synthetic(&synth)?;
    let dir = cfg.out_dir();

    let mut sink = OutputSink::new();
    sink.add(dir.join("train.txt"), write_dataset(&train));
    sink.add(dir.join("test.txt"), write_dataset(&test));
    sink.flush(&dir)?;

    let mut summary = format!(
        "synthesized train n={} test n={} m={} p={} (seed {})\ntrain label marginals:\n{}",
        train.n_docs(),
        test.n_docs(),
        train.n_terms(),
        train.n_categories(),
        synth.seed,
        marginal_summary(&train),
    );
    for &(a, b) in &synth.exclusion_pairs {
        let _ = write!(
            summary,
            "\nexclusion ({a}, {b}): {} train co-occurrences",
            train.cooccurrence(a, b)
        );
    }
    let _ = write!(summary, "\nwrote {}/train.txt and test.txt", dir.display());
    Ok(summary)
}

/// Fit a pipeline on `train_path` and persist it as `model.json`.
pub fn cmd_train(cfg: &ExperimentConfig) -> Result<String> {
    cfg.validate()?;
    let train_path = cfg
        .train_path
        .as_deref()
        .ok_or_else(|| config_err("train requires train_path (--train-path FILE)"))?;
    let train = read_dataset_file(train_path, None, false)?;
    let pipeline = Pipeline::fit(&train, &cfg.pipeline_spec())?;
    let dir = cfg.out_dir();

    let mut sink = OutputSink::new();
    sink.add(dir.join("model.json"), pipeline.to_json()?);
    sink.flush(&dir)?;
    Ok(format!(
        "trained {} + {} on {} docs (m={} after preprocessing, p={}), mode {}\nwrote {}/model.json",
        cfg.content,
        cfg.label_clf,
        train.n_docs(),
        pipeline.preprocess.output_terms,
        pipeline.model.n_categories(),
        pipeline.model.mode,
        dir.display()
    ))
}

/// Arguments of the `predict` subcommand.
#[derive(Debug, Clone)]
pub struct PredictArgs {
    pub model: PathBuf,
    pub data: PathBuf,
    pub mode: Option<Mode>,
    pub force_nonempty: bool,
    pub out: PathBuf,
}

/// Score a dataset with a persisted model; writes `scores.csv` and
/// `predictions.txt`.
pub fn cmd_predict(args: &PredictArgs) -> Result<String> {
    let mut pipeline = Pipeline::load(&args.model)?;
    if let Some(mode) = args.mode {
        pipeline.model = pipeline.model.with_mode(mode);
    }
    let data = read_dataset_file(&args.data, None, true)?;
    let (_base, fused) = pipeline.predict(&data)?;
    let combiner = CombinerConfig {
        mode: pipeline.model.mode,
        epsilon_clamp: pipeline.model.epsilon_clamp,
        force_nonempty: args.force_nonempty,
        ..CombinerConfig::default()
    };
    let pred_sets = binarize(&fused, &combiner);

    let mut sink = OutputSink::new();
    sink.add(args.out.join("scores.csv"), scores_to_csv(&fused));
    sink.add(args.out.join("predictions.txt"), predictions_to_string(&pred_sets, &fused)?);
    sink.flush(&args.out)?;
    Ok(format!(
        "predicted {} docs in mode {}\nwrote {}/scores.csv and predictions.txt",
        data.n_docs(),
        pipeline.model.mode,
        args.out.display()
    ))
}

fn load_truth(path: &Path) -> Result<(Dataset, String)> {
    let text = std::fs::read_to_string(path)?;
    let ds = crate::data::parse_dataset(&text, None, true)?;
    Ok((ds, text))
}

fn truth_sets_for_eval(
    truth: &Dataset,
    raw_text: &str,
    p: usize,
) -> Result<Vec<BTreeSet<usize>>> {
    if truth.n_categories() > p {
        return Err(Error::DimensionMismatch(format!(
            "truth declares p={} but predictions carry only {} scores",
            truth.n_categories(),
            p
        )));
    }
    let sets = truth.label_sets();
    if let Some(i) = sets.iter().position(BTreeSet::is_empty) {
        let line = nth_data_line(raw_text, i).unwrap_or(0);
        return Err(Error::InvalidData(format!(
            "truth line {line}: empty label set; one-error is undefined"
        )));
    }
    Ok(sets)
}

/// Evaluate a prediction file against a truth dataset file; returns the
/// report as pretty JSON.
pub fn cmd_evaluate(truth_path: &Path, pred_path: &Path) -> Result<String> {
    let (truth, raw) = load_truth(truth_path)?;
    let (pred_sets, scores) = read_predictions(pred_path)?;
    if scores.n_rows() != truth.n_docs() {
        return Err(Error::DimensionMismatch(format!(
            "{} truth rows vs {} prediction rows",
            truth.n_docs(),
            scores.n_rows()
        )));
    }
    let p = scores.n_cols();
    let true_sets = truth_sets_for_eval(&truth, &raw, p)?;
    let report = metrics_report(&true_sets, &pred_sets, &scores, p)?;
    Ok(format!("{}\n", serde_json::to_string_pretty(&report)?))
}

/// Both significance verdicts for a pair of systems.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub micro_sign_test: SignificanceVerdict,
    pub macro_s_test: SignificanceVerdict,
}

/// Compare two prediction files against the same truth; returns the two
/// verdicts as pretty JSON.
pub fn cmd_compare(truth_path: &Path, pred_a: &Path, pred_b: &Path) -> Result<String> {
    let (truth, raw) = load_truth(truth_path)?;
    let (sets_a, scores_a) = read_predictions(pred_a)?;
    let (sets_b, scores_b) = read_predictions(pred_b)?;
    if scores_a.n_rows() != truth.n_docs() || scores_b.n_rows() != truth.n_docs() {
        return Err(Error::DimensionMismatch(format!(
            "row counts differ: truth={}, A={}, B={}",
            truth.n_docs(),
            scores_a.n_rows(),
            scores_b.n_rows()
        )));
    }
    if scores_a.n_cols() != scores_b.n_cols() {
        return Err(Error::DimensionMismatch(format!(
            "A carries {} scores per row, B carries {}",
            scores_a.n_cols(),
            scores_b.n_cols()
        )));
    }
    let p = scores_a.n_cols();
    let true_sets = truth_sets_for_eval(&truth, &raw, p)?;

    let micro = micro_sign_test(&sets_a, &sets_b, &true_sets, p)?;
    let ct_a = crate::eval::contingency(&true_sets, &sets_a, p)?;
    let ct_b = crate::eval::contingency(&true_sets, &sets_b, p)?;
    let (_, _, f1_a) = crate::eval::f1_scores(&ct_a);
    let (_, _, f1_b) = crate::eval::f1_scores(&ct_b);
    let macro_ = macro_s_test(&f1_a, &f1_b)?;

    let report = CompareReport { micro_sign_test: micro, macro_s_test: macro_ };
    Ok(format!("{}\n", serde_json::to_string_pretty(&report)?))
}

/// One fused-system-vs-baseline comparison inside an experiment report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonEntry {
    pub system: String,
    pub reference: String,
    pub micro_sign_test: SignificanceVerdict,
    pub macro_s_test: SignificanceVerdict,
}

/// The content of `metrics.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub modes: BTreeMap<String, MetricsReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub significance: Vec<ComparisonEntry>,
}

/// In-memory result of `cmd_experiment`, as written to disk.
#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub report: ExperimentReport,
    pub metrics_json: String,
    pub table: String,
}

fn delta_pct(system: f64, baseline: f64) -> String {
    if baseline == 0.0 {
        "n/a".to_string()
    } else {
        format!("{:+.2}%", 100.0 * (system - baseline) / baseline)
    }
}

fn system_name(cfg: &ExperimentConfig, mode: Mode) -> String {
    let content = cfg.content.to_string().to_uppercase();
    match mode {
        Mode::Baseline => content,
        m => format!("{}+{}+{}", content, cfg.label_clf.to_string().to_uppercase(), m.to_string().to_uppercase()),
    }
}

fn render_table(
    cfg: &ExperimentConfig,
    rows: &[(Mode, MetricsReport)],
    significance: &[ComparisonEntry],
) -> String {
    let mut table = String::new();
    let _ = writeln!(
        table,
        "{:<22} {:>9} {:>9} {:>7} {:>9} {:>9} {:>7}",
        "model", "micro_F1", "delta%", "s-test", "macro_F1", "delta%", "S-test"
    );
    let baseline = rows.iter().find(|(m, _)| *m == Mode::Baseline).map(|(_, r)| r.clone());
    for (mode, report) in rows {
        let name = system_name(cfg, *mode);
        let (micro_delta, macro_delta, s_micro, s_macro) = match (*mode, &baseline) {
            (Mode::Baseline, _) | (_, None) => {
                ("--".to_string(), "--".to_string(), "--".to_string(), "--".to_string())
            }
            (_, Some(base)) => {
                let entry = significance.iter().find(|e| e.system == mode.to_string());
                (
                    delta_pct(report.micro_f1, base.micro_f1),
                    delta_pct(report.macro_f1, base.macro_f1),
                    entry.map_or("--".into(), |e| e.micro_sign_test.symbol.ascii().to_string()),
                    entry.map_or("--".into(), |e| e.macro_s_test.symbol.ascii().to_string()),
                )
            }
        };
        let _ = writeln!(
            table,
            "{:<22} {:>9.5} {:>9} {:>7} {:>9.5} {:>9} {:>7}",
            name, report.micro_f1, micro_delta, s_micro, report.macro_f1, macro_delta, s_macro
        );
    }
    table
}

/// Run the whole grid: resolve data, train once, predict and evaluate per
/// mode, compare fused modes against the baseline, and write `metrics.json`,
/// per-mode score/prediction files and a human-readable `report.txt`.
pub fn cmd_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let (train, test) = match (&cfg.train_path, &cfg.test_path) {
        (Some(train_path), Some(test_path)) => (
            read_dataset_file(train_path, None, false)?,
            read_dataset_file(test_path, None, false)?,
        ),
        (Some(_), None) => {
            return Err(config_err("experiment with train_path also needs test_path"))
        }
        (None, _) => {
            let synth = cfg.synth_config()?;
            if synth.n_test == 0 {
                return Err(config_err("experiment needs n_test >= 1"));
            }
            generate_synthetic(&synth)?
        }
    };

    let pipeline = Pipeline::fit(&train, &cfg.pipeline_spec())?;
    let prepared_test = pipeline.preprocess.apply(&test)?;
    let true_sets = test.label_sets();
    let p = test.n_categories();

    // content scores once; fusion re-reads them per mode
    let (base_scores, _) =
        predict_all(&pipeline.model.with_mode(Mode::Baseline), &prepared_test)?;

    let modes = cfg.modes();
    let mut rows: Vec<(Mode, MetricsReport)> = Vec::new();
    let mut mode_scores: Vec<(Mode, ScoreMatrix, Vec<BTreeSet<usize>>)> = Vec::new();
    for &mode in &modes {
        let scores = match mode {
            Mode::Baseline => base_scores.clone(),
            m => fuse_scores(&pipeline.model.with_mode(m), &base_scores)?,
        };
        let pred_sets = binarize(&scores, &cfg.combiner_config(mode));
        let report = metrics_report(&true_sets, &pred_sets, &scores, p)?;
        rows.push((mode, report));
        mode_scores.push((mode, scores, pred_sets));
    }

    let baseline_row = mode_scores.iter().find(|(m, _, _)| *m == Mode::Baseline);
    let mut significance = Vec::new();
    if let Some((_, _, baseline_sets)) = baseline_row {
        let baseline_f1 = &rows
            .iter()
            .find(|(m, _)| *m == Mode::Baseline)
            .expect("baseline row exists")
            .1
            .per_category_f1;
        for (mode, _, pred_sets) in &mode_scores {
            if *mode == Mode::Baseline {
                continue;
            }
            let report = &rows.iter().find(|(m, _)| m == mode).expect("row exists").1;
            significance.push(ComparisonEntry {
                system: mode.to_string(),
                reference: Mode::Baseline.to_string(),
                micro_sign_test: micro_sign_test(pred_sets, baseline_sets, &true_sets, p)?,
                macro_s_test: macro_s_test(&report.per_category_f1, baseline_f1)?,
            });
        }
    }

    // the config echo omits the output directory so that reruns into
    // different directories stay byte-identical
    let mut echo = cfg.clone();
    echo.out = None;
    let report = ExperimentReport {
        config: echo,
        modes: rows.iter().map(|(m, r)| (m.to_string(), r.clone())).collect(),
        significance: significance.clone(),
    };
    let metrics_json = format!("{}\n", serde_json::to_string_pretty(&report)?);
    let table = render_table(cfg, &rows, &significance);

    let dir = cfg.out_dir();
    let mut sink = OutputSink::new();
    sink.add(dir.join("metrics.json"), metrics_json.clone());
    sink.add(dir.join("report.txt"), table.clone());
    for (mode, scores, pred_sets) in &mode_scores {
        sink.add(dir.join(format!("scores_{mode}.csv")), scores_to_csv(scores));
        sink.add(
            dir.join(format!("predictions_{mode}.txt")),
            predictions_to_string(pred_sets, scores)?,
        );
    }
    sink.flush(&dir)?;

    Ok(ExperimentOutcome { report, metrics_json, table })
}
