//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
//!
//! Run with `cargo test -p labelfuse --test acceptance -- --nocapture` to see
//! the per-criterion lines.

use std::collections::BTreeSet;
use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha20Rng;

use labelfuse::classifiers::{platt_targets, train_nb, NbOptions};
use labelfuse::combine::{binarize, combine_posterior, fuse_scores, predict_all, CombinerConfig};
use labelfuse::data::{generate_synthetic, parse_dataset, ContextRule, SynthConfig};
use labelfuse::eval::{binomial_tail, metrics_report};
use labelfuse::labels::{LabelKind, LabelModel};
use labelfuse::model::{ModelSpec, Pipeline, PipelineSpec, TrainedModel};
use labelfuse::runner::{cmd_experiment, ExperimentConfig};
use labelfuse::types::{Dataset, Mode, ScoreMatrix, SparseDocument};

const EPS: f64 = 1e-6;

fn check(criterion: &str, ok: bool, detail: &str) {
    println!("ACCEPTANCE {criterion}: {} ({detail})", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {criterion} failed: {detail}");
}

/// Criterion 1: identity collapse of the fusion rule on 1e5 random pairs.
#[test]
fn criterion_01_identity_collapse() {
    let start = Instant::now();
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..100_000 {
        let p_cx: f64 = rng.gen();
        let prior: f64 = rng.gen_range(EPS..1.0 - EPS);
        let out = combine_posterior(p_cx, prior, prior, EPS);
        worst = worst.max((out - p_cx.clamp(EPS, 1.0 - EPS)).abs());
    }
    let elapsed = start.elapsed();
    check(
        "1 (identity collapse)",
        worst <= 1e-12 && elapsed.as_secs_f64() < 1.0,
        &format!("max |out - p_cx| = {worst:.2e}, {:.3}s", elapsed.as_secs_f64()),
    );
}

/// Criterion 2: complement consistency and strict monotonicity on 1e5
/// random triples.
#[test]
fn criterion_02_complement_and_monotonicity() {
    let start = Instant::now();
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    let mut monotone = true;
    for _ in 0..100_000 {
        let p: f64 = rng.gen();
        let q: f64 = rng.gen();
        let r: f64 = rng.gen();
        let a = combine_posterior(p, q, r, EPS);
        let b = combine_posterior(1.0 - p, 1.0 - q, 1.0 - r, EPS);
        worst = worst.max((a + b - 1.0).abs());

        // strict increase in p_cx and p_cl away from the clamp plateau
        let p0: f64 = rng.gen_range(0.001..0.99);
        let q0: f64 = rng.gen_range(0.001..0.99);
        let r0: f64 = rng.gen_range(0.01..0.99);
        let step = 1e-4;
        if combine_posterior(p0 + step, q0, r0, EPS) <= combine_posterior(p0, q0, r0, EPS) {
            monotone = false;
        }
        if combine_posterior(p0, q0 + step, r0, EPS) <= combine_posterior(p0, q0, r0, EPS) {
            monotone = false;
        }
    }
    let elapsed = start.elapsed();
    check(
        "2 (complement + monotonicity)",
        worst <= 1e-12 && monotone && elapsed.as_secs_f64() < 2.0,
        &format!("max |sum - 1| = {worst:.2e}, monotone = {monotone}, {:.3}s", elapsed.as_secs_f64()),
    );
}

/// A 100-doc, 5-category random dataset with labels independent of content.
fn random_dataset() -> Dataset {
    let mut rng = ChaCha20Rng::seed_from_u64(33);
    let m = 40;
    let p = 5;
    let docs: Vec<SparseDocument> = (0..100)
        .map(|i| {
            let mut labels: BTreeSet<usize> = BTreeSet::new();
            while labels.is_empty() {
                for j in 0..p {
                    if rng.gen_bool(0.35) {
                        labels.insert(j);
                    }
                }
            }
            let mut counts = vec![0.0; m];
            for _ in 0..10 {
                counts[rng.gen_range(0..m)] += 1.0;
            }
            let features = counts.into_iter().enumerate().filter(|&(_, c)| c > 0.0).collect();
            SparseDocument::new(i, features, labels).unwrap()
        })
        .collect();
    Dataset::new(m, p, docs).unwrap()
}

/// Criterion 3: uninformative label models make M1 and M2 collapse onto the
/// baseline.
#[test]
fn criterion_03_uninformative_collapse() {
    let ds = random_dataset();
    let p = ds.n_categories();
    let nb = ModelSpec::default();
    let mut model = TrainedModel::fit(&ds, &nb).unwrap();
    // uninformative: zero-weight label models and flat priors
    model.priors = vec![0.5; p];
    for j in 0..p {
        model.labels[j] = LabelModel {
            kind: LabelKind::Logreg,
            excluded_category: j,
            linear: labelfuse::classifiers::LinearModel::new(vec![0.0; p - 1], 0.0, None)
                .unwrap(),
        };
    }

    let (base, _) = predict_all(&model.with_mode(Mode::Baseline), &ds).unwrap();
    // the collapse identity is only exact away from the clamp plateau
    let interior = base
        .rows()
        .flat_map(|r| r.iter())
        .all(|&s| (1e-5..=1.0 - 1e-5).contains(&s));
    assert!(interior, "base scores strayed into the clamp region");

    let mut worst = 0.0f64;
    for mode in [Mode::Baseline, Mode::M1, Mode::M2] {
        let fused = fuse_scores(&model.with_mode(mode), &base).unwrap();
        for i in 0..base.n_rows() {
            for j in 0..p {
                worst = worst.max((fused.get(i, j) - base.get(i, j)).abs());
            }
        }
    }
    check(
        "3 (uninformative collapse)",
        worst <= 1e-12,
        &format!("max |fused - base| over baseline/m1/m2 = {worst:.2e}"),
    );
}

/// The pinned direction-of-effect corpus: one hard exclusion pair and one
/// contextualization rule over 8 categories.
fn effect_config(seed: u64) -> SynthConfig {
    SynthConfig {
        n_train: 2000,
        n_test: 1000,
        n_categories: 8,
        vocab_size: 500,
        words_per_doc: 30,
        topic_concentration: 0.2,
        exclusion_pairs: vec![(0, 1)],
        context_rules: vec![ContextRule {
            trigger: [2, 3].into_iter().collect(),
            add_label: 7,
            prob: 0.9,
        }],
        base_label_probs: vec![0.5, 0.5, 0.25, 0.25, 0.4, 0.35, 0.3, 0.0],
        seed,
    }
}

const EFFECT_SEEDS: [u64; 5] = [101, 202, 303, 404, 505];

fn macro_f1_per_mode(cfg: &SynthConfig) -> (f64, f64, f64) {
    let (train, test) = generate_synthetic(cfg).unwrap();
    let spec = PipelineSpec {
        model: ModelSpec { content: labelfuse::classifiers::ContentKind::Nb, ..ModelSpec::default() },
        ..PipelineSpec::default()
    };
    let pipeline = Pipeline::fit(&train, &spec).unwrap();
    let prepared = pipeline.preprocess.apply(&test).unwrap();
    let (base, _) = predict_all(&pipeline.model.with_mode(Mode::Baseline), &prepared).unwrap();
    let truth = test.label_sets();
    let mut out = [0.0f64; 3];
    for (slot, mode) in [Mode::Baseline, Mode::M1, Mode::M2].into_iter().enumerate() {
        let scores = fuse_scores(&pipeline.model.with_mode(mode), &base).unwrap();
        let pred = binarize(&scores, &CombinerConfig::default());
        let report = metrics_report(&truth, &pred, &scores, 8).unwrap();
        out[slot] = report.macro_f1;
    }
    (out[0], out[1], out[2])
}

/// Criteria 4 and 5: NB + LOGREG + M2 beats the baseline macro F1 by at
/// least 0.02 absolute in at least 4 of 5 seeds, and M2's mean macro F1 is
/// at least M1's.
#[test]
fn criterion_04_05_direction_of_effect() {
    let start = Instant::now();
    let mut wins = 0;
    let mut mean_m1 = 0.0;
    let mut mean_m2 = 0.0;
    let mut detail = String::new();
    for seed in EFFECT_SEEDS {
        let (b, m1, m2) = macro_f1_per_mode(&effect_config(seed));
        if m2 >= b + 0.02 {
            wins += 1;
        }
        mean_m1 += m1 / 5.0;
        mean_m2 += m2 / 5.0;
        detail.push_str(&format!("[seed {seed}: base {b:.4} m2 {m2:.4}] "));
    }
    let elapsed = start.elapsed();
    check(
        "4 (M2 macro F1 >= baseline + 0.02 in >= 4/5 seeds)",
        wins >= 4 && elapsed.as_secs_f64() < 60.0,
        &format!("{wins}/5 wins, {:.1}s; {detail}", elapsed.as_secs_f64()),
    );
    check(
        "5 (mean macro F1 of M2 >= M1)",
        mean_m2 >= mean_m1,
        &format!("mean m1 = {mean_m1:.4}, mean m2 = {mean_m2:.4}"),
    );
}

/// Brute-force recount oracle: per-measure recomputation from first
/// principles on flattened bit matrices.
mod oracle {
    use std::collections::BTreeSet;

    pub fn bits(sets: &[BTreeSet<usize>], p: usize) -> Vec<Vec<bool>> {
        sets.iter().map(|s| (0..p).map(|j| s.contains(&j)).collect()).collect()
    }

    pub fn micro_f1(truth: &[Vec<bool>], pred: &[Vec<bool>]) -> f64 {
        let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
        for (t, q) in truth.iter().zip(pred) {
            for (&tb, &qb) in t.iter().zip(q) {
                match (tb, qb) {
                    (true, true) => tp += 1,
                    (false, true) => fp += 1,
                    (true, false) => fn_ += 1,
                    _ => {}
                }
            }
        }
        if 2 * tp + fp + fn_ == 0 {
            1.0
        } else {
            2.0 * tp as f64 / (2 * tp + fp + fn_) as f64
        }
    }

    pub fn macro_f1(truth: &[Vec<bool>], pred: &[Vec<bool>], p: usize) -> f64 {
        let mut total = 0.0;
        for j in 0..p {
            let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
            for (t, q) in truth.iter().zip(pred) {
                match (t[j], q[j]) {
                    (true, true) => tp += 1,
                    (false, true) => fp += 1,
                    (true, false) => fn_ += 1,
                    _ => {}
                }
            }
            total += if 2 * tp + fp + fn_ == 0 {
                1.0
            } else {
                2.0 * tp as f64 / (2 * tp + fp + fn_) as f64
            };
        }
        total / p as f64
    }

    pub fn hamming(truth: &[Vec<bool>], pred: &[Vec<bool>], p: usize) -> f64 {
        let mut total = 0usize;
        for (t, q) in truth.iter().zip(pred) {
            total += t.iter().zip(q).filter(|(a, b)| a != b).count();
        }
        total as f64 / (p * truth.len()) as f64
    }

    pub fn subset01(truth: &[Vec<bool>], pred: &[Vec<bool>]) -> f64 {
        truth.iter().zip(pred).filter(|(t, q)| t != q).count() as f64 / truth.len() as f64
    }

    pub fn one_error(truth: &[Vec<bool>], scores: &[Vec<f64>]) -> f64 {
        let mut errs = 0usize;
        for (t, row) in truth.iter().zip(scores) {
            let mut top = 0;
            for (j, &s) in row.iter().enumerate() {
                if s > row[top] {
                    top = j;
                }
            }
            if !t[top] {
                errs += 1;
            }
        }
        errs as f64 / truth.len() as f64
    }
}

/// Criterion 6: every measure matches an independent brute-force recount on
/// 200 random tiny instances.
#[test]
fn criterion_06_metric_oracles() {
    let mut rng = ChaCha20Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let n = rng.gen_range(1..=10);
        let p = rng.gen_range(1..=4);
        let random_sets = |rng: &mut ChaCha20Rng, nonempty: bool| -> Vec<BTreeSet<usize>> {
            (0..n)
                .map(|_| {
                    let mut s: BTreeSet<usize> = BTreeSet::new();
                    loop {
                        for j in 0..p {
                            if rng.gen_bool(0.4) {
                                s.insert(j);
                            }
                        }
                        if !nonempty || !s.is_empty() {
                            break;
                        }
                    }
                    s
                })
                .collect()
        };
        let truth = random_sets(&mut rng, true);
        let pred = random_sets(&mut rng, false);
        let score_rows: Vec<Vec<f64>> =
            (0..n).map(|_| (0..p).map(|_| rng.gen::<f64>()).collect()).collect();
        let scores = ScoreMatrix::from_rows(score_rows.clone()).unwrap();

        let report = metrics_report(&truth, &pred, &scores, p).unwrap();
        let tb = oracle::bits(&truth, p);
        let qb = oracle::bits(&pred, p);
        worst = worst.max((report.micro_f1 - oracle::micro_f1(&tb, &qb)).abs());
        worst = worst.max((report.macro_f1 - oracle::macro_f1(&tb, &qb, p)).abs());
        worst = worst.max((report.hamming_loss - oracle::hamming(&tb, &qb, p)).abs());
        worst = worst.max((report.subset_01_loss - oracle::subset01(&tb, &qb)).abs());
        worst = worst.max((report.one_error - oracle::one_error(&tb, &score_rows)).abs());
    }
    check("6 (metric oracles)", worst <= 1e-12, &format!("max deviation = {worst:.2e}"));
}

/// Criterion 7: exact binomial tails match direct summation for all n <= 30,
/// and the worked values reproduce exactly.
#[test]
fn criterion_07_binomial_tails() {
    // independent oracle: Pascal's triangle in exact integer arithmetic
    let mut worst = 0.0f64;
    let mut row: Vec<u128> = vec![1];
    for n in 0..=30usize {
        for k in 0..=n + 1 {
            let sum: u128 = row.iter().skip(k).sum();
            let want = sum as f64 / 2f64.powi(n as i32);
            let got = binomial_tail(n, k);
            worst = worst.max((got - want).abs());
        }
        let mut next = vec![1u128];
        for w in row.windows(2) {
            next.push(w[0] + w[1]);
        }
        next.push(1);
        row = next;
    }
    let exact = binomial_tail(10, 9) == 11.0 / 1024.0 && binomial_tail(5, 5) == 1.0 / 32.0;
    check(
        "7 (binomial tails)",
        worst == 0.0 && exact,
        &format!("max deviation = {worst:.2e}, worked values exact = {exact}"),
    );
}

/// Criterion 8: logistic regression reaches a small gradient and its
/// analytic gradient matches central finite differences.
#[test]
fn criterion_08_logreg_gradient() {
    use labelfuse::classifiers::train_logreg;
    use labelfuse::classifiers::logreg::{logreg_gradient, logreg_loss};

    let mut rng = ChaCha20Rng::seed_from_u64(8);
    let mut worst_norm = 0.0f64;
    let mut worst_fd = 0.0f64;
    for _ in 0..50 {
        let n = rng.gen_range(4..20);
        let m = rng.gen_range(1..5);
        let lambda = rng.gen_range(0.01..5.0);
        let rows: Vec<Vec<(usize, f64)>> = (0..n)
            .map(|_| {
                (0..m)
                    .filter_map(|j| {
                        if rng.gen_bool(0.7) {
                            Some((j, rng.gen_range(-2.0..2.0)))
                        } else {
                            None
                        }
                    })
                    .collect()
            })
            .collect();
        let targets: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
        let refs: Vec<&[(usize, f64)]> = rows.iter().map(Vec::as_slice).collect();

        let model = train_logreg(&refs, m, &targets, lambda).unwrap();
        let grad = logreg_gradient(&refs, &targets, lambda, &model.weights, model.bias);
        let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        worst_norm = worst_norm.max(norm);

        // finite differences at a random (not optimal) point
        let w0: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b0: f64 = rng.gen_range(-1.0..1.0);
        let g = logreg_gradient(&refs, &targets, lambda, &w0, b0);
        let h = 1e-6;
        for i in 0..=m {
            let mut wp = w0.clone();
            let mut wm = w0.clone();
            let (bp, bm) = if i < m {
                wp[i] += h;
                wm[i] -= h;
                (b0, b0)
            } else {
                (b0 + h, b0 - h)
            };
            let fd = (logreg_loss(&refs, &targets, lambda, &wp, bp)
                - logreg_loss(&refs, &targets, lambda, &wm, bm))
                / (2.0 * h);
            worst_fd = worst_fd.max((fd - g[i]).abs() / (1.0 + fd.abs()));
        }
    }
    check(
        "8 (logreg gradient)",
        worst_norm <= 1e-5 && worst_fd <= 1e-5,
        &format!("max grad norm = {worst_norm:.2e}, max fd deviation = {worst_fd:.2e}"),
    );
}

/// Criterion 9: the hand-computed NB posterior and Platt targets reproduce.
#[test]
fn criterion_09_nb_and_platt_hand_values() {
    let ds = parse_dataset("0 0:2 1:1\n1 1:2\n", Some((2, 2)), false).unwrap();
    let model = train_nb(&ds, 0, &NbOptions::default()).unwrap();
    let doc = SparseDocument::new(0, vec![(0, 1.0)], BTreeSet::new()).unwrap();
    let posterior = model.predict_proba(&doc).unwrap();
    let nb_ok = (posterior - 0.3 / 0.425).abs() <= 1e-9;

    let (hi, lo) = platt_targets(3, 1);
    let platt_ok = hi == 4.0 / 5.0 && lo == 1.0 / 3.0;
    check(
        "9 (NB + Platt hand values)",
        nb_ok && platt_ok,
        &format!("NB posterior = {posterior:.10} (want 0.7058823529...), targets = ({hi}, {lo})"),
    );
}

/// Criterion 10: the experiment command is bit-reproducible.
#[test]
fn criterion_10_experiment_determinism() {
    let dir1 = tempfile::tempdir().unwrap();
    let dir2 = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::default();
    cfg.n_train = 300;
    cfg.n_test = 120;
    cfg.p = 4;
    cfg.vocab_size = 60;
    cfg.words_per_doc = 20;
    cfg.exclusion_pairs = vec![(0, 1)];
    cfg.base_label_probs = Some(vec![0.5, 0.5, 0.3, 0.2]);
    cfg.seed = 77;

    cfg.out = Some(dir1.path().to_string_lossy().into_owned());
    cmd_experiment(&cfg).unwrap();
    cfg.out = Some(dir2.path().to_string_lossy().into_owned());
    cmd_experiment(&cfg).unwrap();

    let mut all_equal = true;
    let mut checked = 0;
    for name in [
        "metrics.json",
        "report.txt",
        "scores_baseline.csv",
        "scores_m1.csv",
        "scores_m2.csv",
        "predictions_baseline.txt",
        "predictions_m1.txt",
        "predictions_m2.txt",
    ] {
        let a = std::fs::read(dir1.path().join(name)).unwrap();
        let b = std::fs::read(dir2.path().join(name)).unwrap();
        if a != b {
            all_equal = false;
        }
        checked += 1;
    }
    check(
        "10 (experiment determinism)",
        all_equal && checked == 8,
        &format!("{checked} files compared byte-for-byte"),
    );
}
