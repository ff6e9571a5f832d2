//! Synthetic bilingual tasks with a known ground truth: a source space of
//! random unit vectors, a target space that is an orthogonal rotation of
//! it plus noise, an identity lexicon, and sentiment corpora built from
//! designated polar words. Training on these tasks has a verifiable
//! outcome (the rotation is recoverable, the polar words are separable),
//! which is what the examples and the acceptance tests check.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Corpus, LabelSchema, TargetedInstance};
use crate::embeddings::EmbeddingSpace;
use crate::lexicon::BilingualLexicon;
use crate::linalg::{dot, row_vec_mul, Matrix};

/// Knobs for the synthetic generators.
#[derive(Debug, Clone)]
pub struct TaskConfig {
    pub vocab: usize,
    pub dim: usize,
    /// Designated positive and negative words, this many per class.
    pub polar_per_class: usize,
    pub lexicon_train: usize,
    pub lexicon_dev: usize,
    pub sentences: usize,
    /// Must be odd so majority polarity is never tied.
    pub sentence_len: usize,
    pub heldout: usize,
    /// Standard deviation of the additive Gaussian noise on the rotated
    /// target vectors.
    pub noise: f64,
    /// How far polar words are pushed along the sentiment direction
    /// before renormalization.
    pub polarity_strength: f64,
    /// Fraction of targeted instances whose context polarity contradicts
    /// the target polarity.
    pub conflict_rate: f64,
    /// Compose the rotation with a reflection of the sentiment axis, so
    /// the two languages' polarity directions are anti-aligned. A single
    /// shared projection matrix cannot serve both languages then, which
    /// is the regime the shared-matrix ablation probes.
    pub reflect_sentiment_axis: bool,
    pub seed: u64,
}

impl Default for TaskConfig {
    fn default() -> Self {
        TaskConfig {
            vocab: 200,
            dim: 16,
            polar_per_class: 20,
            lexicon_train: 150,
            lexicon_dev: 50,
            sentences: 400,
            sentence_len: 5,
            heldout: 100,
            noise: 0.01,
            polarity_strength: 1.0,
            conflict_rate: 0.3,
            reflect_sentiment_axis: false,
            seed: 2024,
        }
    }
}

/// A sentence-level rotation-recovery task.
pub struct RotationTask {
    pub source: EmbeddingSpace,
    pub target: EmbeddingSpace,
    /// The orthogonal matrix the target space was built with.
    pub rotation: Matrix,
    pub lexicon_train: BilingualLexicon,
    pub lexicon_dev: BilingualLexicon,
    pub train_corpus: Corpus,
    pub dev_source: Corpus,
    pub dev_target: Corpus,
    pub positive_words: Vec<String>,
    pub negative_words: Vec<String>,
}

/// A target-level task extending the rotation task with per-sentence
/// target spans whose polarity can contradict the context.
pub struct TargetedTask {
    pub source: EmbeddingSpace,
    pub target: EmbeddingSpace,
    pub lexicon_train: BilingualLexicon,
    pub lexicon_dev: BilingualLexicon,
    pub train_corpus: Corpus,
    pub dev_source: Corpus,
    pub dev_target: Corpus,
    /// Per dev-target instance: does its context contradict the target?
    pub dev_conflicts: Vec<bool>,
}

struct SpaceSetup {
    source: EmbeddingSpace,
    target: EmbeddingSpace,
    rotation: Matrix,
    lexicon_train: BilingualLexicon,
    lexicon_dev: BilingualLexicon,
    positive_words: Vec<String>,
    negative_words: Vec<String>,
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; one draw per call keeps the stream simple.
    let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| standard_normal(rng)).collect();
        let n = dot(&v, &v).sqrt();
        if n > 1e-9 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

fn random_orthogonal(rng: &mut ChaCha8Rng, dim: usize) -> Matrix {
    let basis = complete_basis(rng, dim, &[]);
    Matrix::from_rows(&basis).expect("square by construction")
}

/// Gram-Schmidt completion of `fixed` rows to a full orthonormal basis.
fn complete_basis(rng: &mut ChaCha8Rng, dim: usize, fixed: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = fixed.to_vec();
    while basis.len() < dim {
        let mut v = random_unit(rng, dim);
        for b in &basis {
            let proj = dot(&v, b);
            for (x, y) in v.iter_mut().zip(b) {
                *x -= proj * y;
            }
        }
        let n = dot(&v, &v).sqrt();
        if n > 1e-6 {
            basis.push(v.into_iter().map(|x| x / n).collect());
        }
    }
    basis
}

/// Orthogonal matrix sending `axis` to `-axis` and acting as a random
/// rotation on the orthogonal complement: `Q = Bᵀ D B` with `B` an
/// orthonormal basis whose first row is the axis and
/// `D = diag(-1, G)` for a random orthogonal `G`.
fn reflected_rotation(rng: &mut ChaCha8Rng, axis: &[f64]) -> Matrix {
    let dim = axis.len();
    let basis_rows = complete_basis(rng, dim, &[axis.to_vec()]);
    let basis = Matrix::from_rows(&basis_rows).expect("square by construction");
    let g = random_orthogonal(rng, dim - 1);
    let mut block = Matrix::zeros(dim, dim);
    block.set(0, 0, -1.0);
    for r in 0..dim - 1 {
        for c in 0..dim - 1 {
            block.set(r + 1, c + 1, g.get(r, c));
        }
    }
    basis
        .transpose()
        .matmul(&block)
        .and_then(|m| m.matmul(&basis))
        .expect("dims agree by construction")
}

fn build_spaces(config: &TaskConfig, rng: &mut ChaCha8Rng) -> SpaceSetup {
    assert!(
        config.vocab >= 2 * config.polar_per_class,
        "vocabulary too small for the polar word sets"
    );
    assert!(
        config.lexicon_train + config.lexicon_dev <= config.vocab,
        "lexicon larger than the vocabulary"
    );
    let d = config.dim;
    let sentiment_axis = random_unit(rng, d);

    let tokens: Vec<String> = (0..config.vocab).map(|i| format!("w{i:03}")).collect();
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(config.vocab);
    for i in 0..config.vocab {
        let base = random_unit(rng, d);
        let polarity = if i < config.polar_per_class {
            1.0
        } else if i < 2 * config.polar_per_class {
            -1.0
        } else {
            0.0
        };
        let mut v: Vec<f64> = base
            .iter()
            .zip(&sentiment_axis)
            .map(|(b, u)| b + polarity * config.polarity_strength * u)
            .collect();
        let n = dot(&v, &v).sqrt();
        for x in &mut v {
            *x /= n;
        }
        rows.push(v);
    }

    let rotation = if config.reflect_sentiment_axis {
        reflected_rotation(rng, &sentiment_axis)
    } else {
        random_orthogonal(rng, d)
    };
    let target_rows: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| {
            row_vec_mul(r, &rotation)
                .expect("dims agree")
                .into_iter()
                .map(|x| x + config.noise * standard_normal(rng))
                .collect()
        })
        .collect();

    let source = EmbeddingSpace::from_parts(tokens.clone(), Matrix::from_rows(&rows).unwrap())
        .expect("unique synthetic tokens");
    let target =
        EmbeddingSpace::from_parts(tokens.clone(), Matrix::from_rows(&target_rows).unwrap())
            .expect("unique synthetic tokens");

    let mut indices: Vec<usize> = (0..config.vocab).collect();
    indices.shuffle(rng);
    let pick = |idx: &[usize]| {
        BilingualLexicon::new(
            "identity",
            idx.iter()
                .map(|&i| (tokens[i].clone(), tokens[i].clone()))
                .collect(),
        )
        .expect("non-empty by construction")
    };
    let lexicon_train = pick(&indices[..config.lexicon_train]);
    let lexicon_dev =
        pick(&indices[config.lexicon_train..config.lexicon_train + config.lexicon_dev]);

    SpaceSetup {
        source,
        target,
        rotation,
        lexicon_train,
        lexicon_dev,
        positive_words: tokens[..config.polar_per_class].to_vec(),
        negative_words: tokens[config.polar_per_class..2 * config.polar_per_class].to_vec(),
    }
}

fn majority_sentence(
    rng: &mut ChaCha8Rng,
    positive: &[String],
    negative: &[String],
    len: usize,
) -> (Vec<String>, usize) {
    let mut tokens = Vec::with_capacity(len);
    let mut positive_count = 0usize;
    for _ in 0..len {
        if rng.random::<bool>() {
            tokens.push(positive[rng.random_range(0..positive.len())].clone());
            positive_count += 1;
        } else {
            tokens.push(negative[rng.random_range(0..negative.len())].clone());
        }
    }
    let label = if 2 * positive_count > len { 1 } else { 0 };
    (tokens, label)
}

/// Builds the sentence-level rotation task: majority-polarity sentences
/// over the designated polar words, labeled `negative`/`positive`.
pub fn rotation_task(config: &TaskConfig) -> RotationTask {
    assert!(config.sentence_len % 2 == 1, "sentence length must be odd");
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let setup = build_spaces(config, &mut rng);
    let schema = LabelSchema::binary();

    let mut make_corpus = |count: usize| {
        let instances = (0..count)
            .map(|_| {
                let (tokens, label) = majority_sentence(
                    &mut rng,
                    &setup.positive_words,
                    &setup.negative_words,
                    config.sentence_len,
                );
                TargetedInstance::sentence(tokens, label).expect("non-empty sentence")
            })
            .collect();
        Corpus {
            schema: schema.clone(),
            instances,
        }
    };
    let train_corpus = make_corpus(config.sentences);
    let dev_source = make_corpus(config.heldout);
    let dev_target = make_corpus(config.heldout);

    RotationTask {
        source: setup.source,
        target: setup.target,
        rotation: setup.rotation,
        lexicon_train: setup.lexicon_train,
        lexicon_dev: setup.lexicon_dev,
        train_corpus,
        dev_source,
        dev_target,
        positive_words: setup.positive_words,
        negative_words: setup.negative_words,
    }
}

/// Builds the targeted task: each instance has a one-word target span
/// whose polarity defines the label, flanked by context words that agree
/// with it except in a `conflict_rate` fraction of instances.
pub fn targeted_task(config: &TaskConfig) -> TargetedTask {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let setup = build_spaces(config, &mut rng);
    let schema = LabelSchema::binary();

    let mut make = |count: usize, sid_prefix: &str| -> (Vec<TargetedInstance>, Vec<bool>) {
        let mut instances = Vec::with_capacity(count);
        let mut conflicts = Vec::with_capacity(count);
        for i in 0..count {
            let target_positive = rng.random::<bool>();
            let conflict = rng.random::<f64>() < config.conflict_rate;
            let context_positive = if conflict {
                !target_positive
            } else {
                target_positive
            };
            let pick = |rng: &mut ChaCha8Rng, positive: bool| {
                let set = if positive {
                    &setup.positive_words
                } else {
                    &setup.negative_words
                };
                set[rng.random_range(0..set.len())].clone()
            };
            let tokens = vec![
                pick(&mut rng, context_positive),
                pick(&mut rng, context_positive),
                pick(&mut rng, target_positive),
                pick(&mut rng, context_positive),
                pick(&mut rng, context_positive),
            ];
            let label = usize::from(target_positive);
            let inst = TargetedInstance::targeted(tokens, (2, 3), label)
                .expect("span is always valid")
                .with_sid(format!("{sid_prefix}{i}"));
            instances.push(inst);
            conflicts.push(conflict);
        }
        (instances, conflicts)
    };

    let (train_instances, _) = make(config.sentences, "tr");
    let (dev_source_instances, _) = make(config.heldout, "ds");
    let (dev_target_instances, dev_conflicts) = make(config.heldout, "dt");

    TargetedTask {
        source: setup.source,
        target: setup.target,
        lexicon_train: setup.lexicon_train,
        lexicon_dev: setup.lexicon_dev,
        train_corpus: Corpus {
            schema: schema.clone(),
            instances: train_instances,
        },
        dev_source: Corpus {
            schema: schema.clone(),
            instances: dev_source_instances,
        },
        dev_target: Corpus {
            schema,
            instances: dev_target_instances,
        },
        dev_conflicts,
    }
}
