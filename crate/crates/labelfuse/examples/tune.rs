// scratch harness for picking the direction-of-effect corpus knobs
use labelfuse::combine::{binarize, fuse_scores, predict_all, CombinerConfig};
use labelfuse::data::{generate_synthetic, ContextRule, SynthConfig};
use labelfuse::eval::metrics_report;
use labelfuse::model::{ModelSpec, Pipeline, PipelineSpec};
use labelfuse::types::Mode;

fn run(cfg: &SynthConfig, lambda: f64) -> (f64, f64, f64, f64, f64, f64, f64) {
    let (train, test) = generate_synthetic(cfg).unwrap();
    let spec = PipelineSpec {
        model: ModelSpec { lambda, ..ModelSpec::default() },
        ..PipelineSpec::default()
    };
    let pipeline = Pipeline::fit(&train, &spec).unwrap();
    let prepared = pipeline.preprocess.apply(&test).unwrap();
    let (base, _) = predict_all(&pipeline.model.with_mode(Mode::Baseline), &prepared).unwrap();
    let truth = test.label_sets();
    let p = test.n_categories();
    let mut macros = Vec::new();
    let mut cat7 = Vec::new();
    let mut cat1 = Vec::new();
    for mode in [Mode::Baseline, Mode::M1, Mode::M2] {
        let scores = fuse_scores(&pipeline.model.with_mode(mode), &base).unwrap();
        let pred = binarize(&scores, &CombinerConfig::default());
        let r = metrics_report(&truth, &pred, &scores, p).unwrap();
        macros.push(r.macro_f1);
        cat7.push(r.per_category_f1[7]);
        cat1.push(r.per_category_f1[1]);
    }
    (macros[0], macros[1], macros[2], cat7[0], cat7[2], cat1[0], cat1[2])
}

fn main() {
    let seeds = [101u64, 202, 303, 404, 505];
    let prob_sets: Vec<(&str, Vec<f64>)> = vec![
        ("A", vec![0.7, 0.3, 0.35, 0.35, 0.2, 0.2, 0.15, 0.0]),
        ("B", vec![0.65, 0.35, 0.4, 0.4, 0.25, 0.2, 0.15, 0.0]),
    ];
    for (pname, probs) in &prob_sets {
        for (conc, w) in [(0.2, 25), (0.2, 30), (0.3, 30)] {
            for lambda in [0.3, 1.0] {
                let mut wins = 0;
                let (mut sb, mut s1, mut s2, mut c7b, mut c7f, mut c1b, mut c1f) =
                    (0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
                let mut min_delta = f64::INFINITY;
                for &seed in &seeds {
                    let cfg = SynthConfig {
                        n_train: 2000, n_test: 1000, n_categories: 8, vocab_size: 500,
                        words_per_doc: w, topic_concentration: conc,
                        exclusion_pairs: vec![(0, 1)],
                        context_rules: vec![ContextRule {
                            trigger: [2, 3].into_iter().collect(), add_label: 7, prob: 0.9,
                        }],
                        base_label_probs: probs.clone(),
                        seed,
                    };
                    let (b, m1, m2, cb, cf, xb, xf) = run(&cfg, lambda);
                    if m2 - b >= 0.02 { wins += 1; }
                    min_delta = min_delta.min(m2 - b);
                    sb += b; s1 += m1; s2 += m2; c7b += cb; c7f += cf; c1b += xb; c1f += xf;
                }
                println!(
                    "{pname} conc {conc} w {w} lam {lambda}: wins {wins}/5 min_d {min_delta:+.4} base {:.4} m1 {:.4} m2 {:.4} | f1(7) {:.3}->{:.3} f1(1) {:.3}->{:.3}",
                    sb / 5.0, s1 / 5.0, s2 / 5.0, c7b / 5.0, c7f / 5.0, c1b / 5.0, c1f / 5.0
                );
            }
        }
    }
}
