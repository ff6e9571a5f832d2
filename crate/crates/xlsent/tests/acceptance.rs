//! Acceptance suite: one test per criterion, each printing a pass/fail
//! line. Every tolerance is pinned in code. The synthetic-task criteria
//! share one fixed configuration (seed 149, polarity strength 0.575,
//! sentiment-axis reflection on) built by `xlsent::synthetic`.

use std::time::{Duration, Instant};

use xlsent::analysis;
use xlsent::blse::{self, BlseParams, InitMode, Side, Spaces, TrainConfig, TrainData};
use xlsent::corpus::{Corpus, LabeledSentence, TargetedInstance};
use xlsent::embeddings::{EmbeddingSpace, OovPolicy};
use xlsent::eval;
use xlsent::lexicon::BilingualLexicon;
use xlsent::linalg::{cosine, finite_difference_gradient, relative_error, Matrix};
use xlsent::mapping;
use xlsent::synthetic::{rotation_task, targeted_task, RotationTask, TargetedTask, TaskConfig};
use xlsent::targeted::{self, TargetedParams, Variant};

const TASK_SEED: u64 = 149;
const POLARITY_STRENGTH: f64 = 0.575;

fn report(criterion: &str, pass: bool, detail: &str) {
    println!(
        "[acceptance] {criterion}: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "{criterion} failed: {detail}");
}

fn task_config() -> TaskConfig {
    TaskConfig {
        polarity_strength: POLARITY_STRENGTH,
        reflect_sentiment_axis: true,
        seed: TASK_SEED,
        ..TaskConfig::default()
    }
}

fn train_config() -> TrainConfig {
    TrainConfig {
        alpha: 0.3,
        epochs: 200,
        batch_size: 20,
        learning_rate: 0.001,
        seed: TASK_SEED,
        dev_eval_every: 200,
        ..TrainConfig::default()
    }
}

fn sentence_task() -> RotationTask {
    rotation_task(&task_config())
}

fn side_f1(params: &BlseParams, space: &EmbeddingSpace, corpus: &Corpus, side: Side) -> f64 {
    let gold = corpus.gold_labels();
    let pred: Vec<usize> = corpus
        .instances
        .iter()
        .map(|i| blse::predict(params, space, &i.tokens, side, OovPolicy::Skip).unwrap())
        .collect();
    eval::macro_f1(&gold, &pred, corpus.schema.arity()).unwrap()
}

fn train_data<'a>(task: &'a RotationTask) -> (Spaces<'a>, TrainData<'a>) {
    (
        Spaces {
            source: &task.source,
            target: &task.target,
        },
        TrainData {
            corpus: &task.train_corpus,
            lexicon_train: Some(&task.lexicon_train),
            lexicon_dev: Some(&task.lexicon_dev),
            dev_source: None,
            dev_target: None,
        },
    )
}

// ---------------------------------------------------------------------------

/// Random fixtures for the gradient checks: a small embedding space, a
/// labeled batch, and resolved lexicon pairs at d = d' = h = 8, o = 3.
struct GradFixture {
    space: EmbeddingSpace,
    batch: Vec<LabeledSentence>,
    pairs: Vec<(Vec<f64>, Vec<f64>)>,
    alpha: f64,
}

fn grad_fixture(seed: u64) -> GradFixture {
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = 8;
    let vocab = 12;
    let tokens: Vec<String> = (0..vocab).map(|i| format!("t{i}")).collect();
    let rows: Vec<Vec<f64>> = (0..vocab)
        .map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let space =
        EmbeddingSpace::from_parts(tokens.clone(), Matrix::from_rows(&rows).unwrap()).unwrap();
    let batch: Vec<LabeledSentence> = (0..4)
        .map(|_| {
            let len = rng.random_range(1..5);
            LabeledSentence {
                tokens: (0..len)
                    .map(|_| tokens[rng.random_range(0..vocab)].clone())
                    .collect(),
                label: rng.random_range(0..3),
            }
        })
        .collect();
    let pairs: Vec<(Vec<f64>, Vec<f64>)> = (0..5)
        .map(|_| {
            (
                rows[rng.random_range(0..vocab)].clone(),
                rows[rng.random_range(0..vocab)].clone(),
            )
        })
        .collect();
    let alpha = rng.random_range(0.15..0.85);
    GradFixture {
        space,
        batch,
        pairs,
        alpha,
    }
}

#[test]
fn criterion_01_gradient_correctness() {
    let start = Instant::now();
    let tol = 1e-4;
    let h = 1e-5;
    let mut worst: f64 = 0.0;

    for seed in 0..10u64 {
        let fx = grad_fixture(seed);
        let params = BlseParams::init(8, 8, 8, 3, seed + 500, InitMode::Uniform).unwrap();

        // Joint loss of the full model.
        let g = blse::gradients(
            &params,
            fx.alpha,
            &fx.space,
            &fx.batch,
            &fx.pairs,
            OovPolicy::Skip,
        )
        .unwrap();
        for (name, analytic, select) in [("M", &g.m, 0usize), ("M'", &g.mprime, 1), ("P", &g.p, 2)]
        {
            let at = match select {
                0 => &params.m,
                1 => &params.mprime,
                _ => &params.p,
            };
            let fd = finite_difference_gradient(
                |x| {
                    let mut q = params.clone();
                    match select {
                        0 => q.m = x.clone(),
                        1 => q.mprime = x.clone(),
                        _ => q.p = x.clone(),
                    }
                    blse::joint_loss(
                        &q,
                        fx.alpha,
                        &fx.space,
                        &fx.batch,
                        &fx.pairs,
                        OovPolicy::Skip,
                    )
                    .map(|l| l.joint)
                },
                at,
                h,
            )
            .unwrap();
            let err = relative_error(analytic, &fd);
            assert!(err < tol, "full joint {name} at seed {seed}: {err}");
            worst = worst.max(err);
        }

        // Shared-matrix ablation.
        let g = blse::gradients_no_mprime(
            &params,
            fx.alpha,
            &fx.space,
            &fx.batch,
            &fx.pairs,
            OovPolicy::Skip,
        )
        .unwrap();
        for (name, analytic, is_m) in [("M", &g.m, true), ("P", &g.p, false)] {
            let at = if is_m { &params.m } else { &params.p };
            let fd = finite_difference_gradient(
                |x| {
                    let mut q = params.clone();
                    if is_m {
                        q.m = x.clone();
                    } else {
                        q.p = x.clone();
                    }
                    blse::joint_loss_no_mprime(
                        &q,
                        fx.alpha,
                        &fx.space,
                        &fx.batch,
                        &fx.pairs,
                        OovPolicy::Skip,
                    )
                    .map(|l| l.joint)
                },
                at,
                h,
            )
            .unwrap();
            let err = relative_error(analytic, &fd);
            assert!(err < tol, "no-M' {name} at seed {seed}: {err}");
            worst = worst.max(err);
        }

        // No-projection ablation: M, M' are d x o.
        let np = BlseParams::init(8, 8, 3, 3, seed + 900, InitMode::Uniform).unwrap();
        let (m, mprime) = (np.m.clone(), np.mprime.clone());
        let (gm, gmprime) = blse::gradients_no_projection(
            &m,
            &mprime,
            fx.alpha,
            &fx.space,
            &fx.batch,
            &fx.pairs,
            OovPolicy::Skip,
        )
        .unwrap();
        for (name, analytic, is_m) in [("M", &gm, true), ("M'", &gmprime, false)] {
            let at = if is_m { &m } else { &mprime };
            let fd = finite_difference_gradient(
                |x| {
                    let (a, b) = if is_m { (x, &mprime) } else { (&m, x) };
                    blse::joint_loss_no_projection(
                        a,
                        b,
                        fx.alpha,
                        &fx.space,
                        &fx.batch,
                        &fx.pairs,
                        OovPolicy::Skip,
                    )
                    .map(|l| l.joint)
                },
                at,
                h,
            )
            .unwrap();
            let err = relative_error(analytic, &fd);
            assert!(err < tol, "no-projection {name} at seed {seed}: {err}");
            worst = worst.max(err);
        }

        // Targeted SPLIT loss.
        let tparams = {
            use rand::prelude::*;
            use rand_chacha::ChaCha8Rng;
            let mut rng = ChaCha8Rng::seed_from_u64(seed + 1300);
            let data: Vec<f64> = (0..24 * 3).map(|_| rng.random_range(-0.3..0.3)).collect();
            TargetedParams {
                base: params.clone(),
                tclf: Matrix::from_vec(24, 3, data).unwrap(),
                variant: Variant::Split,
                shared_target: vec![0.0; 8],
            }
        };
        let tbatch: Vec<TargetedInstance> = fx
            .batch
            .iter()
            .filter(|s| !s.tokens.is_empty())
            .map(|s| {
                let end = s.tokens.len().min(2);
                TargetedInstance::targeted(s.tokens.clone(), (0, end), s.label).unwrap()
            })
            .collect();
        let g = targeted::targeted_gradients(
            &tparams,
            fx.alpha,
            &fx.space,
            &tbatch,
            &fx.pairs,
            OovPolicy::Skip,
        )
        .unwrap();
        for (name, analytic, select) in [
            ("M", &g.m, 0usize),
            ("M'", &g.mprime, 1),
            ("Tclf", &g.tclf, 2),
        ] {
            let at = match select {
                0 => &tparams.base.m,
                1 => &tparams.base.mprime,
                _ => &tparams.tclf,
            };
            let fd = finite_difference_gradient(
                |x| {
                    let mut q = tparams.clone();
                    match select {
                        0 => q.base.m = x.clone(),
                        1 => q.base.mprime = x.clone(),
                        _ => q.tclf = x.clone(),
                    }
                    targeted::targeted_joint_loss(
                        &q,
                        fx.alpha,
                        &fx.space,
                        &tbatch,
                        &fx.pairs,
                        OovPolicy::Skip,
                    )
                    .map(|l| l.joint)
                },
                at,
                h,
            )
            .unwrap();
            let err = relative_error(analytic, &fd);
            assert!(err < tol, "targeted SPLIT {name} at seed {seed}: {err}");
            worst = worst.max(err);
        }
    }

    let elapsed = start.elapsed();
    report(
        "criterion 1 (gradient correctness)",
        worst < tol && elapsed < Duration::from_secs(5),
        &format!("worst relative error {worst:.2e}, elapsed {elapsed:?}"),
    );
}

#[test]
fn criterion_02_structural_alpha_extremes() {
    let start = Instant::now();
    let task = rotation_task(&TaskConfig {
        vocab: 40,
        polar_per_class: 8,
        lexicon_train: 20,
        lexicon_dev: 10,
        sentences: 40,
        heldout: 10,
        dim: 8,
        ..task_config()
    });
    let (spaces, data) = train_data(&task);
    let config = TrainConfig {
        epochs: 5,
        batch_size: 8,
        ..train_config()
    };
    let init = BlseParams::init(8, 8, 8, 2, config.seed, InitMode::Uniform).unwrap();

    let (p1, _) = blse::train(
        &TrainConfig {
            alpha: 1.0,
            ..config.clone()
        },
        spaces,
        data,
    )
    .unwrap();
    let mprime_frozen = p1.mprime == init.mprime;
    let m_moved = p1.m != init.m;

    let (p0, _) = blse::train(
        &TrainConfig {
            alpha: 0.0,
            ..config.clone()
        },
        spaces,
        data,
    )
    .unwrap();
    let p_frozen = p0.p == init.p;
    let mprime_moved = p0.mprime != init.mprime;

    let elapsed = start.elapsed();
    report(
        "criterion 2 (alpha extremes freeze parameters)",
        mprime_frozen && m_moved && p_frozen && mprime_moved && elapsed < Duration::from_secs(2),
        &format!(
            "alpha=1 M' bit-identical: {mprime_frozen}, alpha=0 P bit-identical: {p_frozen}, elapsed {elapsed:?}"
        ),
    );
}

#[test]
fn criterion_03_synthetic_rotation_recovery() {
    let start = Instant::now();
    let task = sentence_task();
    let (spaces, data) = train_data(&task);
    let (params, history) = blse::train(&train_config(), spaces, data).unwrap();
    let dev_cosine = history.last().unwrap().dev_pair_cosine.unwrap();
    let target_f1 = side_f1(&params, &task.target, &task.dev_target, Side::Target);
    let elapsed = start.elapsed();
    report(
        "criterion 3 (synthetic rotation recovery)",
        dev_cosine >= 0.90 && target_f1 >= 0.90 && elapsed < Duration::from_secs(30),
        &format!(
            "dev pair cosine {dev_cosine:.3}, target macro F1 {target_f1:.3}, elapsed {elapsed:?}"
        ),
    );
}

#[test]
fn criterion_04_no_mprime_cannot_transfer() {
    let start = Instant::now();
    let task = sentence_task();
    let (spaces, data) = train_data(&task);
    let (params, _) = blse::train_no_mprime(&train_config(), spaces, data).unwrap();
    let source_f1 = side_f1(&params, &task.source, &task.dev_source, Side::Source);
    let target_f1 = side_f1(&params, &task.target, &task.dev_target, Side::Target);
    let chance = 0.5;
    let elapsed = start.elapsed();
    report(
        "criterion 4 (shared-matrix ablation fails on target)",
        source_f1 >= 0.90 && target_f1 <= chance + 0.15 && elapsed < Duration::from_secs(30),
        &format!("source F1 {source_f1:.3}, target F1 {target_f1:.3} vs chance+0.15 = 0.65, elapsed {elapsed:?}"),
    );
}

#[test]
fn criterion_05_no_projection_inferior() {
    let task = sentence_task();
    let (spaces, data) = train_data(&task);
    let (full, _) = blse::train(&train_config(), spaces, data).unwrap();
    let (noproj, _) = blse::train_no_projection(&train_config(), spaces, data).unwrap();
    let full_f1 = side_f1(&full, &task.target, &task.dev_target, Side::Target);
    let noproj_f1 = side_f1(&noproj, &task.target, &task.dev_target, Side::Target);
    report(
        "criterion 5 (no-projection trails the full model)",
        noproj_f1 <= full_f1 - 0.05,
        &format!(
            "full target F1 {full_f1:.3}, no-projection {noproj_f1:.3}, gap {:.3}",
            full_f1 - noproj_f1
        ),
    );
}

#[test]
fn criterion_06_mapping_and_csls() {
    let start = Instant::now();
    let task = sentence_task();

    // Least-squares fit recovers the generating rotation.
    let (fitted, _) =
        mapping::fit_mapping(&task.source, &task.target, &task.lexicon_train).unwrap();
    let mut diff = fitted.w.clone();
    diff.add_scaled(&task.rotation, -1.0).unwrap();
    let w_err = diff.frobenius_norm() / task.rotation.frobenius_norm();

    // CSLS retrieval at k = 10 finds the held-out translations.
    let src = task.source.normalize_rows();
    let trg = task.target.normalize_rows();
    let mut rows = Vec::new();
    let mut gold = Vec::new();
    for (s, t) in task.lexicon_dev.pairs() {
        rows.push(fitted.project(src.lookup(s).unwrap()).unwrap());
        gold.push(trg.tokens().iter().position(|x| x == t).unwrap());
    }
    let queries = Matrix::from_rows(&rows).unwrap();
    let rankings = mapping::csls_retrieve(&queries, trg.matrix(), 10, Some(1)).unwrap();
    let p_at_1 = mapping::precision_at_one(&rankings, &gold).unwrap();

    // CSLS agrees with the brute-force oracle exactly on a v = 30 instance.
    let small_q = Matrix::from_rows(
        &(0..30)
            .map(|i| {
                let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(i);
                (0..6)
                    .map(|_| rand::Rng::random_range(&mut rng, -1.0..1.0))
                    .collect::<Vec<f64>>()
            })
            .collect::<Vec<_>>(),
    )
    .unwrap();
    let small_c = Matrix::from_rows(
        &(100..130)
            .map(|i| {
                let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(i);
                (0..6)
                    .map(|_| rand::Rng::random_range(&mut rng, -1.0..1.0))
                    .collect::<Vec<f64>>()
            })
            .collect::<Vec<_>>(),
    )
    .unwrap();
    let k = 4;
    let fast = mapping::csls_retrieve(&small_q, &small_c, k, None).unwrap();
    let knn_oracle = |v: &[f64], m: &Matrix| {
        let mut sims: Vec<f64> = (0..m.rows())
            .map(|i| cosine(v, m.row(i)).unwrap())
            .collect();
        sims.sort_by(|a, b| b.partial_cmp(a).unwrap());
        sims[..k].iter().sum::<f64>() / k as f64
    };
    let mut oracle_matches = true;
    for (q, ranking) in fast.iter().enumerate() {
        let rt = knn_oracle(small_q.row(q), &small_c);
        let mut scored: Vec<(usize, f64)> = (0..small_c.rows())
            .map(|c| {
                let rs = knn_oracle(small_c.row(c), &small_q);
                (
                    c,
                    2.0 * cosine(small_q.row(q), small_c.row(c)).unwrap() - rt - rs,
                )
            })
            .collect();
        scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        let want: Vec<usize> = scored.iter().map(|(c, _)| *c).collect();
        let got: Vec<usize> = ranking.iter().map(|(c, _)| *c).collect();
        oracle_matches &= want == got;
    }

    let elapsed = start.elapsed();
    report(
        "criterion 6 (mapping recovery and CSLS retrieval)",
        w_err < 0.05 && p_at_1 >= 0.95 && oracle_matches && elapsed < Duration::from_secs(10),
        &format!(
            "relative mapping error {w_err:.4}, P@1 {p_at_1:.3}, oracle match {oracle_matches}, elapsed {elapsed:?}"
        ),
    );
}

#[test]
fn criterion_07_targeted_split_task() {
    let start = Instant::now();
    let task: TargetedTask = targeted_task(&task_config());
    let spaces = Spaces {
        source: &task.source,
        target: &task.target,
    };
    let data = TrainData {
        corpus: &task.train_corpus,
        lexicon_train: Some(&task.lexicon_train),
        lexicon_dev: Some(&task.lexicon_dev),
        dev_source: None,
        dev_target: None,
    };
    let (split, _) =
        targeted::train_targeted(&train_config(), spaces, data, Variant::Split).unwrap();
    let (sent, _) = targeted::train_targeted(&train_config(), spaces, data, Variant::Sent).unwrap();

    let gold = task.dev_target.gold_labels();
    let split_pred: Vec<usize> = task
        .dev_target
        .instances
        .iter()
        .map(|i| {
            targeted::predict_targeted(&split, &task.target, i, Side::Target, OovPolicy::Skip)
                .unwrap()
        })
        .collect();
    let sent_pred = targeted::sent_baseline(
        &sent.base,
        &task.target,
        &task.dev_target.instances,
        Side::Target,
        OovPolicy::Skip,
    )
    .unwrap();

    let split_f1 = eval::macro_f1(&gold, &split_pred, 2).unwrap();
    let conflict_idx: Vec<usize> = task
        .dev_conflicts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c)
        .map(|(i, _)| i)
        .collect();
    let subset_f1 = |pred: &[usize]| {
        let g: Vec<usize> = conflict_idx.iter().map(|&i| gold[i]).collect();
        let p: Vec<usize> = conflict_idx.iter().map(|&i| pred[i]).collect();
        eval::macro_f1(&g, &p, 2).unwrap()
    };
    let split_conflict = subset_f1(&split_pred);
    let sent_conflict = subset_f1(&sent_pred);

    let elapsed = start.elapsed();
    report(
        "criterion 7 (targeted SPLIT beats the sentence assumption)",
        split_f1 >= 0.85 && split_conflict > sent_conflict && elapsed < Duration::from_secs(60),
        &format!(
            "SPLIT target F1 {split_f1:.3}; conflicting subset ({} instances): SPLIT {split_conflict:.3} vs Sent {sent_conflict:.3}; elapsed {elapsed:?}"
        , conflict_idx.len()),
    );
}

#[test]
fn criterion_08_metrics_and_statistics() {
    // evaluate: hand-computed fixtures, exact.
    let r = eval::evaluate(&[1, 1, 0], &[1, 0, 0], 2).unwrap();
    let fixtures_exact = (r.per_class["0"].f1 - 2.0 / 3.0).abs() < 1e-15
        && (r.per_class["1"].f1 - 2.0 / 3.0).abs() < 1e-15
        && (r.macro_f1 - 2.0 / 3.0).abs() < 1e-15;
    let gold = vec![0, 0, 1, 1];
    let one_class = eval::evaluate(&gold, &[1, 1, 1, 1], 2).unwrap();
    let degenerate_exact = (one_class.macro_f1 - 1.0 / 3.0).abs() < 1e-15;
    let perfect = eval::evaluate(&gold, &gold, 2).unwrap().macro_f1 == 1.0;

    // approx_randomization matches the exhaustive 2^12 oracle within 0.02.
    let gold12: Vec<usize> = (0..12).map(|i| i % 2).collect();
    let a = gold12.clone();
    let b: Vec<usize> = gold12.iter().map(|&g| 1 - g).collect();
    let exact = eval::exact_randomization(&gold12, &a, &b, 2).unwrap();
    let approx = eval::approx_randomization(&gold12, &a, &b, 2, 10_000, 7).unwrap();
    let randomization_close = (approx - exact).abs() <= 0.02;

    // Symmetrized KL hand instance at smoothing 1e-9.
    let p: std::collections::HashMap<String, f64> =
        [("a".to_string(), 0.8), ("b".to_string(), 0.2)].into();
    let q: std::collections::HashMap<String, f64> =
        [("a".to_string(), 0.2), ("b".to_string(), 0.8)].into();
    let js = analysis::js_divergence(&p, &q, 1e-9).unwrap();
    let js_close = (js - 0.6 * 4.0f64.ln()).abs() < 1e-3 && (js - 0.8318).abs() < 1e-3;

    // Pearson fixtures exact to 1e-12.
    let xs = [1.0, 2.0, 3.0, 4.0];
    let linear: Vec<f64> = xs.iter().map(|x| 2.0 * x + 1.0).collect();
    let negated: Vec<f64> = xs.iter().map(|x| -x).collect();
    let pearson_exact = (analysis::pearson_r(&xs, &linear).unwrap() - 1.0).abs() < 1e-12
        && (analysis::pearson_r(&xs, &negated).unwrap() + 1.0).abs() < 1e-12
        && (analysis::pearson_r(&xs, &[2.0, 1.0, 4.0, 3.0]).unwrap() - 0.6).abs() < 1e-12;

    report(
        "criterion 8 (metrics and statistics fixtures)",
        fixtures_exact
            && degenerate_exact
            && perfect
            && randomization_close
            && js_close
            && pearson_exact,
        &format!(
            "macro F1 fixtures ok, |approx - exact| = {:.4}, JS {js:.4} vs 0.8318, Pearson ok",
            (approx - exact).abs()
        ),
    );
}

#[test]
fn criterion_09_barista() {
    let lex = BilingualLexicon::new(
        "l",
        vec![
            ("good".into(), "bueno".into()),
            ("bad".into(), "malo".into()),
        ],
    )
    .unwrap();
    let src = vec!["good bad neutral good".to_string()];
    let trg = vec!["bueno malo cosa".to_string()];

    let unchanged = mapping::barista_corpus(&src, &trg, &lex, 0.0, 5).unwrap();
    let identity = unchanged
        == vec![
            "good bad neutral good".to_string(),
            "bueno malo cosa".to_string(),
        ];

    let replaced = mapping::barista_corpus(&src, &trg, &lex, 1.0, 5).unwrap();
    let total = replaced
        == vec![
            "bueno malo neutral bueno".to_string(),
            "good bad cosa".to_string(),
        ];

    let many = vec!["tok ".repeat(10_000).trim().to_string()];
    let kot_lex = BilingualLexicon::new("k", vec![("tok".into(), "kot".into())]).unwrap();
    let out = mapping::barista_corpus(&many, &[], &kot_lex, 0.5, 99).unwrap();
    let tokens: Vec<&str> = out[0].split_whitespace().collect();
    let count_conserved = tokens.len() == 10_000;
    let fraction = tokens.iter().filter(|&&t| t == "kot").count() as f64 / 10_000.0;
    let concentrated = (0.45..=0.55).contains(&fraction);

    report(
        "criterion 9 (pseudo-bilingual corpus generation)",
        identity && total && count_conserved && concentrated,
        &format!("p=0 identity {identity}, p=1 total {total}, p=0.5 fraction {fraction:.3}, tokens conserved {count_conserved}"),
    );
}

#[test]
fn criterion_10_synonym_antonym_geometry() {
    let task = sentence_task();
    let (spaces, data) = train_data(&task);
    let (params, _) = blse::train(&train_config(), spaces, data).unwrap();

    let (within_src, cross_src) = analysis::synonym_antonym_separation(
        &params,
        &task.source,
        &task.positive_words,
        &task.negative_words,
        Side::Source,
    )
    .unwrap();
    let (within_tgt, cross_tgt) = analysis::synonym_antonym_separation(
        &params,
        &task.target,
        &task.positive_words,
        &task.negative_words,
        Side::Target,
    )
    .unwrap();

    report(
        "criterion 10 (synonym/antonym separation in both languages)",
        within_src > cross_src && within_tgt > cross_tgt,
        &format!(
            "source within {within_src:.3} vs cross {cross_src:.3}; target within {within_tgt:.3} vs cross {cross_tgt:.3}"
        ),
    );
}
