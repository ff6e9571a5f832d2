//! The jointly trained bilingual sentiment embedding model: projection
//! matrices `M` and `M'`, sentiment head `P`, the joint loss combining
//! cross-entropy with translation-pair mean squared error, analytic
//! gradients, the ADAM training loop, and the two ablation variants
//! (shared projection matrix; direct projection to the label space).

use std::io::{BufRead, Write};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Corpus, LabeledSentence};
use crate::embeddings::{EmbeddingSpace, OovPolicy};
use crate::error::{Error, Result};
use crate::eval;
use crate::lexicon::BilingualLexicon;
use crate::linalg::{adam_step, cosine, dot, row_vec_mul, AdamState, Matrix};

/// Which language side a vector comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Source,
    Target,
}

/// Which model produced a set of parameters. The forward pass is uniform
/// across kinds (`softmax(a · M_side · P)`): the shared-matrix ablation
/// stores `M` in both slots and the no-projection ablation stores an
/// identity head.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Sentence,
    NoMprime,
    NoProjection,
}

/// Parameter initialization scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitMode {
    /// Entries uniform in ±1/√fan_in.
    #[default]
    Uniform,
    /// Identity projection matrices (requires square `M`, `M'`); the head
    /// is still sampled.
    Identity,
}

/// The trainable state: source projection `M` (d×h), target projection
/// `M'` (d'×h) and sentiment head `P` (h×o).
#[derive(Debug, Clone, PartialEq)]
pub struct BlseParams {
    pub kind: ModelKind,
    pub m: Matrix,
    pub mprime: Matrix,
    pub p: Matrix,
}

impl BlseParams {
    pub fn d(&self) -> usize {
        self.m.rows()
    }

    pub fn dprime(&self) -> usize {
        self.mprime.rows()
    }

    pub fn h(&self) -> usize {
        self.m.cols()
    }

    pub fn o(&self) -> usize {
        self.p.cols()
    }

    /// Fresh parameters, deterministic under `seed`.
    pub fn init(
        d: usize,
        dprime: usize,
        h: usize,
        o: usize,
        seed: u64,
        mode: InitMode,
    ) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::init_with_rng(d, dprime, h, o, &mut rng, mode)
    }

    pub(crate) fn init_with_rng(
        d: usize,
        dprime: usize,
        h: usize,
        o: usize,
        rng: &mut ChaCha8Rng,
        mode: InitMode,
    ) -> Result<Self> {
        if d == 0 || dprime == 0 || h == 0 || o == 0 {
            return Err(Error::Argument("all dimensions must be >= 1".into()));
        }
        let m = match mode {
            InitMode::Uniform => uniform_matrix(rng, d, h),
            InitMode::Identity => {
                if d != h {
                    return Err(Error::Argument(format!(
                        "identity init needs square M, got {d}x{h}"
                    )));
                }
                Matrix::identity(d)
            }
        };
        let mprime = match mode {
            InitMode::Uniform => uniform_matrix(rng, dprime, h),
            InitMode::Identity => {
                if dprime != h {
                    return Err(Error::Argument(format!(
                        "identity init needs square M', got {dprime}x{h}"
                    )));
                }
                Matrix::identity(dprime)
            }
        };
        let p = uniform_matrix(rng, h, o);
        Ok(BlseParams {
            kind: ModelKind::Sentence,
            m,
            mprime,
            p,
        })
    }

    pub fn projection(&self, side: Side) -> &Matrix {
        match side {
            Side::Source => &self.m,
            Side::Target => &self.mprime,
        }
    }
}

fn uniform_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    let bound = 1.0 / (rows as f64).sqrt();
    let data: Vec<f64> = (0..rows * cols)
        .map(|_| rng.random_range(-bound..bound))
        .collect();
    Matrix::from_vec(rows, cols, data).expect("sizes agree by construction")
}

/// `z = a · M` for a source vector.
pub fn project_source(params: &BlseParams, a: &[f64]) -> Result<Vec<f64>> {
    row_vec_mul(a, &params.m)
}

/// `ẑ = a · M'` for a target vector.
pub fn project_target(params: &BlseParams, a: &[f64]) -> Result<Vec<f64>> {
    row_vec_mul(a, &params.mprime)
}

pub fn project(params: &BlseParams, side: Side, a: &[f64]) -> Result<Vec<f64>> {
    row_vec_mul(a, params.projection(side))
}

/// Resolved (source vector, target vector) translation pairs.
pub type VectorPairs = Vec<(Vec<f64>, Vec<f64>)>;

/// Looks up embedding vectors for every lexicon pair resolvable in both
/// vocabularies. Returns the resolved pairs and a count of skipped ones.
pub fn resolve_pairs(
    lexicon: &BilingualLexicon,
    source: &EmbeddingSpace,
    target: &EmbeddingSpace,
) -> (VectorPairs, usize) {
    let mut resolved = Vec::new();
    let mut skipped = 0usize;
    for (s, t) in lexicon.pairs() {
        match (source.lookup(s), target.lookup(t)) {
            (Some(sv), Some(tv)) => resolved.push((sv.to_vec(), tv.to_vec())),
            _ => skipped += 1,
        }
    }
    (resolved, skipped)
}

/// Mean squared Euclidean distance between the projections of translation
/// pairs: `(1/n) Σ ‖s·M − t·M'‖²`.
pub fn projection_loss(params: &BlseParams, pairs: &[(Vec<f64>, Vec<f64>)]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::Argument(
            "projection loss over an empty pair list".into(),
        ));
    }
    let mut total = 0.0;
    for (s, t) in pairs {
        let zs = row_vec_mul(s, &params.m)?;
        let zt = row_vec_mul(t, &params.mprime)?;
        total += zs
            .iter()
            .zip(&zt)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>();
    }
    Ok(total / pairs.len() as f64)
}

/// Class probabilities for a sentence: `softmax(average · M_side · P)`.
/// The boolean flags sentences with no in-vocabulary token, which come
/// out uniform.
pub fn sentiment_forward(
    params: &BlseParams,
    space: &EmbeddingSpace,
    tokens: &[String],
    side: Side,
    policy: OovPolicy,
) -> Result<(Vec<f64>, bool)> {
    let avg = space.average(tokens, policy);
    let z = project(params, side, &avg)?;
    let logits = row_vec_mul(&z, &params.p)?;
    let probs = crate::linalg::stable_softmax(&logits)?;
    Ok((probs, space.all_oov(tokens)))
}

/// Mean negative log-likelihood of the gold labels, computed through
/// log-sum-exp so saturated logits stay finite.
pub fn sentiment_loss(
    params: &BlseParams,
    space: &EmbeddingSpace,
    batch: &[LabeledSentence],
    side: Side,
    policy: OovPolicy,
) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::Argument("sentiment loss over an empty batch".into()));
    }
    let feats = resolve_sentences(space, batch, policy)?;
    ce_loss(&feats, params.projection(side), &params.p)
}

/// The three components of the joint objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointLoss {
    /// `α·H + (1−α)·MSE`
    pub joint: f64,
    /// Sentiment cross-entropy term.
    pub sentiment: f64,
    /// Projection mean-squared-error term.
    pub projection: f64,
}

/// `J = α·H + (1−α)·MSE` over a sentiment batch and a lexicon batch.
pub fn joint_loss(
    params: &BlseParams,
    alpha: f64,
    space: &EmbeddingSpace,
    batch: &[LabeledSentence],
    pairs: &[(Vec<f64>, Vec<f64>)],
    policy: OovPolicy,
) -> Result<JointLoss> {
    check_alpha(alpha)?;
    let h = sentiment_loss(params, space, batch, Side::Source, policy)?;
    let mse = projection_loss(params, pairs)?;
    Ok(JointLoss {
        joint: alpha * h + (1.0 - alpha) * mse,
        sentiment: h,
        projection: mse,
    })
}

/// Analytic gradients of the joint loss for `M`, `M'` and `P`.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub m: Matrix,
    pub mprime: Matrix,
    pub p: Matrix,
}

/// Backpropagation through averaging, the linear projections, softmax
/// cross-entropy, and the pair distance term.
pub fn gradients(
    params: &BlseParams,
    alpha: f64,
    space: &EmbeddingSpace,
    batch: &[LabeledSentence],
    pairs: &[(Vec<f64>, Vec<f64>)],
    policy: OovPolicy,
) -> Result<Gradients> {
    check_alpha(alpha)?;
    if batch.is_empty() || pairs.is_empty() {
        return Err(Error::Argument("gradients need non-empty batches".into()));
    }
    let feats = resolve_sentences(space, batch, policy)?;
    let mut gm = Matrix::zeros(params.m.rows(), params.m.cols());
    let mut gmprime = Matrix::zeros(params.mprime.rows(), params.mprime.cols());
    let mut gp = Matrix::zeros(params.p.rows(), params.p.cols());
    if alpha > 0.0 {
        ce_grads(&feats, &params.m, &params.p, &mut gm, &mut gp, alpha)?;
    }
    if alpha < 1.0 {
        mse_grads(
            pairs,
            &params.m,
            &params.mprime,
            &mut gm,
            &mut gmprime,
            1.0 - alpha,
        )?;
    }
    Ok(Gradients {
        m: gm,
        mprime: gmprime,
        p: gp,
    })
}

/// Label with the highest probability; exact ties resolve to the lowest
/// label index.
pub fn predict(
    params: &BlseParams,
    space: &EmbeddingSpace,
    tokens: &[String],
    side: Side,
    policy: OovPolicy,
) -> Result<usize> {
    let (probs, _) = sentiment_forward(params, space, tokens, side, policy)?;
    Ok(argmax(&probs))
}

pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Argument(format!(
            "alpha must lie in [0,1], got {alpha}"
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Core math over resolved feature vectors.

pub(crate) struct SentenceFeatures {
    pub avg: Vec<f64>,
    pub label: usize,
    pub flagged: bool,
}

pub(crate) fn resolve_sentences(
    space: &EmbeddingSpace,
    batch: &[LabeledSentence],
    policy: OovPolicy,
) -> Result<Vec<SentenceFeatures>> {
    batch
        .iter()
        .map(|s| {
            if s.tokens.is_empty() {
                return Err(Error::Argument("sentence with no tokens".into()));
            }
            Ok(SentenceFeatures {
                avg: space.average(&s.tokens, policy),
                label: s.label,
                flagged: space.all_oov(&s.tokens),
            })
        })
        .collect()
}

/// `log Σ exp(l_i)` with max subtraction.
fn log_sum_exp(logits: &[f64]) -> f64 {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    max + logits.iter().map(|&l| (l - max).exp()).sum::<f64>().ln()
}

fn ce_loss(feats: &[SentenceFeatures], proj: &Matrix, head: &Matrix) -> Result<f64> {
    let mut total = 0.0;
    for f in feats {
        let z = row_vec_mul(&f.avg, proj)?;
        let logits = row_vec_mul(&z, head)?;
        if f.label >= logits.len() {
            return Err(Error::Argument(format!(
                "label {} outside {} classes",
                f.label,
                logits.len()
            )));
        }
        total += log_sum_exp(&logits) - logits[f.label];
    }
    Ok(total / feats.len() as f64)
}

/// Adds `weight`-scaled cross-entropy gradients for the projection and the
/// head; returns the unweighted mean loss.
fn ce_grads(
    feats: &[SentenceFeatures],
    proj: &Matrix,
    head: &Matrix,
    gproj: &mut Matrix,
    ghead: &mut Matrix,
    weight: f64,
) -> Result<f64> {
    let n = feats.len() as f64;
    let mut total = 0.0;
    let scale = weight / n;
    for f in feats {
        let z = row_vec_mul(&f.avg, proj)?;
        let logits = row_vec_mul(&z, head)?;
        if f.label >= logits.len() {
            return Err(Error::Argument(format!(
                "label {} outside {} classes",
                f.label,
                logits.len()
            )));
        }
        total += log_sum_exp(&logits) - logits[f.label];
        let probs = crate::linalg::stable_softmax(&logits)?;
        let mut delta = probs;
        delta[f.label] -= 1.0;
        // dH/dP += zᵀ δ ; dH/dz = δ Pᵀ ; dH/dM += aᵀ (δ Pᵀ)
        ghead.add_scaled_outer(&z, &delta, scale);
        let gz: Vec<f64> = (0..head.rows()).map(|r| dot(head.row(r), &delta)).collect();
        gproj.add_scaled_outer(&f.avg, &gz, scale);
    }
    Ok(total / n)
}

/// Adds `weight`-scaled gradients of the mean squared pair distance;
/// returns the unweighted loss.
pub(crate) fn mse_grads(
    pairs: &[(Vec<f64>, Vec<f64>)],
    m: &Matrix,
    mprime: &Matrix,
    gm: &mut Matrix,
    gmprime: &mut Matrix,
    weight: f64,
) -> Result<f64> {
    let n = pairs.len() as f64;
    let scale = 2.0 * weight / n;
    let mut total = 0.0;
    for (s, t) in pairs {
        let zs = row_vec_mul(s, m)?;
        let zt = row_vec_mul(t, mprime)?;
        let e: Vec<f64> = zs.iter().zip(&zt).map(|(a, b)| a - b).collect();
        total += e.iter().map(|v| v * v).sum::<f64>();
        gm.add_scaled_outer(s, &e, scale);
        gmprime.add_scaled_outer(t, &e, -scale);
    }
    Ok(total / n)
}

/// Shared-matrix squared distance `‖(s−t)·M‖²` used by the no-M' ablation.
fn shared_mse_grads(
    diffs: &[Vec<f64>],
    m: &Matrix,
    gm: Option<&mut Matrix>,
    weight: f64,
) -> Result<f64> {
    let n = diffs.len() as f64;
    let scale = 2.0 * weight / n;
    let mut total = 0.0;
    let mut gm = gm;
    for u in diffs {
        let e = row_vec_mul(u, m)?;
        total += e.iter().map(|v| v * v).sum::<f64>();
        if let Some(g) = gm.as_deref_mut() {
            g.add_scaled_outer(u, &e, scale);
        }
    }
    Ok(total / n)
}

/// Mean (non-squared) Euclidean distance `(1/n) Σ ‖s·M − t·M'‖` used by the
/// no-projection ablation. Pairs whose projections coincide exactly are
/// excluded from the gradient (the norm is not differentiable there).
fn norm_penalty_grads(
    pairs: &[(Vec<f64>, Vec<f64>)],
    m: &Matrix,
    mprime: &Matrix,
    grads: Option<(&mut Matrix, &mut Matrix)>,
    weight: f64,
) -> Result<f64> {
    let n = pairs.len() as f64;
    let scale = weight / n;
    let mut total = 0.0;
    let mut grads = grads;
    for (s, t) in pairs {
        let zs = row_vec_mul(s, m)?;
        let zt = row_vec_mul(t, mprime)?;
        let e: Vec<f64> = zs.iter().zip(&zt).map(|(a, b)| a - b).collect();
        let norm = e.iter().map(|v| v * v).sum::<f64>().sqrt();
        total += norm;
        if norm > 0.0 {
            if let Some((gm, gmprime)) = grads.as_mut() {
                let unit: Vec<f64> = e.iter().map(|v| v / norm).collect();
                gm.add_scaled_outer(s, &unit, scale);
                gmprime.add_scaled_outer(t, &unit, -scale);
            }
        }
    }
    Ok(total / n)
}

// ---------------------------------------------------------------------------
// Ablation losses exposed for gradient checking.

/// Joint loss of the shared-matrix ablation: sentiment through `M`, and
/// `(1/n) Σ ‖s·M − t·M‖²` tying both languages through the same matrix.
pub fn joint_loss_no_mprime(
    params: &BlseParams,
    alpha: f64,
    space: &EmbeddingSpace,
    batch: &[LabeledSentence],
    pairs: &[(Vec<f64>, Vec<f64>)],
    policy: OovPolicy,
) -> Result<JointLoss> {
    check_alpha(alpha)?;
    let feats = resolve_sentences(space, batch, policy)?;
    let h = ce_loss(&feats, &params.m, &params.p)?;
    let diffs: Vec<Vec<f64>> = pairs
        .iter()
        .map(|(s, t)| s.iter().zip(t).map(|(a, b)| a - b).collect())
        .collect();
    let mse = shared_mse_grads(&diffs, &params.m, None, 0.0)?;
    Ok(JointLoss {
        joint: alpha * h + (1.0 - alpha) * mse,
        sentiment: h,
        projection: mse,
    })
}

/// Gradients of [`joint_loss_no_mprime`] for `M` and `P`.
pub fn gradients_no_mprime(
    params: &BlseParams,
    alpha: f64,
    space: &EmbeddingSpace,
    batch: &[LabeledSentence],
    pairs: &[(Vec<f64>, Vec<f64>)],
    policy: OovPolicy,
) -> Result<Gradients> {
    check_alpha(alpha)?;
    let feats = resolve_sentences(space, batch, policy)?;
    let mut gm = Matrix::zeros(params.m.rows(), params.m.cols());
    let gmprime = Matrix::zeros(params.mprime.rows(), params.mprime.cols());
    let mut gp = Matrix::zeros(params.p.rows(), params.p.cols());
    if alpha > 0.0 {
        ce_grads(&feats, &params.m, &params.p, &mut gm, &mut gp, alpha)?;
    }
    if alpha < 1.0 {
        let diffs: Vec<Vec<f64>> = pairs
            .iter()
            .map(|(s, t)| s.iter().zip(t).map(|(a, b)| a - b).collect())
            .collect();
        shared_mse_grads(&diffs, &params.m, Some(&mut gm), 1.0 - alpha)?;
    }
    Ok(Gradients {
        m: gm,
        mprime: gmprime,
        p: gp,
    })
}

/// Joint loss of the no-projection ablation: `M: d×o` classifies directly
/// and the alignment term is the batch-averaged Euclidean norm
/// `(1/n) Σ ‖M·s − M'·t‖` (not squared).
pub fn joint_loss_no_projection(
    m: &Matrix,
    mprime: &Matrix,
    alpha: f64,
    space: &EmbeddingSpace,
    batch: &[LabeledSentence],
    pairs: &[(Vec<f64>, Vec<f64>)],
    policy: OovPolicy,
) -> Result<JointLoss> {
    check_alpha(alpha)?;
    let feats = resolve_sentences(space, batch, policy)?;
    let identity = Matrix::identity(m.cols());
    let h = ce_loss(&feats, m, &identity)?;
    let penalty = norm_penalty_grads(pairs, m, mprime, None, 0.0)?;
    Ok(JointLoss {
        joint: alpha * h + (1.0 - alpha) * penalty,
        sentiment: h,
        projection: penalty,
    })
}

/// Gradients of [`joint_loss_no_projection`] for `M` and `M'`.
pub fn gradients_no_projection(
    m: &Matrix,
    mprime: &Matrix,
    alpha: f64,
    space: &EmbeddingSpace,
    batch: &[LabeledSentence],
    pairs: &[(Vec<f64>, Vec<f64>)],
    policy: OovPolicy,
) -> Result<(Matrix, Matrix)> {
    check_alpha(alpha)?;
    let feats = resolve_sentences(space, batch, policy)?;
    let mut gm = Matrix::zeros(m.rows(), m.cols());
    let mut gmprime = Matrix::zeros(mprime.rows(), mprime.cols());
    if alpha > 0.0 {
        let identity = Matrix::identity(m.cols());
        let mut ghead = Matrix::zeros(m.cols(), m.cols());
        ce_grads(&feats, m, &identity, &mut gm, &mut ghead, alpha)?;
    }
    if alpha < 1.0 {
        norm_penalty_grads(pairs, m, mprime, Some((&mut gm, &mut gmprime)), 1.0 - alpha)?;
    }
    Ok((gm, gmprime))
}

// ---------------------------------------------------------------------------
// Training.

/// Hyperparameters for the training loop. The defaults follow the
/// reference profile: 300 epochs, learning rate 0.001, alpha 0.3.
#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub alpha: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
    /// Evaluate dev macro F1 every this many epochs.
    pub dev_eval_every: usize,
    /// Joint space width `h`; defaults to the source dimension.
    pub joint_dim: Option<usize>,
    pub init: InitMode,
    pub oov_policy: OovPolicy,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            alpha: 0.3,
            epochs: 300,
            batch_size: 20,
            learning_rate: 0.001,
            seed: 1,
            dev_eval_every: 1,
            joint_dim: None,
            init: InitMode::Uniform,
            oov_policy: OovPolicy::Skip,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        if self.epochs == 0 {
            return Err(Error::Argument("epochs must be >= 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Argument("batch size must be >= 1".into()));
        }
        if self.learning_rate <= 0.0 {
            return Err(Error::Argument("learning rate must be positive".into()));
        }
        if self.dev_eval_every == 0 {
            return Err(Error::Argument("dev-eval-every must be >= 1".into()));
        }
        Ok(())
    }
}

/// The two embedding spaces a bilingual model is trained over.
#[derive(Clone, Copy)]
pub struct Spaces<'a> {
    pub source: &'a EmbeddingSpace,
    pub target: &'a EmbeddingSpace,
}

impl<'a> Spaces<'a> {
    pub fn side(&self, side: Side) -> &'a EmbeddingSpace {
        match side {
            Side::Source => self.source,
            Side::Target => self.target,
        }
    }
}

/// Training inputs: the labeled source corpus, the lexicon partition, and
/// optional development corpora for per-epoch macro F1.
#[derive(Clone, Copy)]
pub struct TrainData<'a> {
    pub corpus: &'a Corpus,
    /// `None` runs sentiment-only training (the zero-pair point of the
    /// lexicon-size study).
    pub lexicon_train: Option<&'a BilingualLexicon>,
    pub lexicon_dev: Option<&'a BilingualLexicon>,
    pub dev_source: Option<&'a Corpus>,
    pub dev_target: Option<&'a Corpus>,
}

/// One row of the per-epoch training log.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub sentiment_loss: f64,
    pub projection_loss: Option<f64>,
    pub joint_loss: f64,
    pub dev_pair_cosine: Option<f64>,
    pub src_f1: Option<f64>,
    pub tgt_f1: Option<f64>,
}

/// Per-epoch records; exactly one per training epoch.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainHistory {
    pub records: Vec<EpochRecord>,
}

impl TrainHistory {
    pub fn last(&self) -> Option<&EpochRecord> {
        self.records.last()
    }

    /// Writes `epoch,H,MSE,J,dev_pair_cosine,src_f1,tgt_f1`; absent values
    /// are empty fields.
    pub fn write_csv<W: Write>(&self, writer: &mut W) -> Result<()> {
        writeln!(writer, "epoch,H,MSE,J,dev_pair_cosine,src_f1,tgt_f1")?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.records {
            writeln!(
                writer,
                "{},{},{},{},{},{},{}",
                r.epoch,
                r.sentiment_loss,
                opt(r.projection_loss),
                r.joint_loss,
                opt(r.dev_pair_cosine),
                opt(r.src_f1),
                opt(r.tgt_f1),
            )?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(reader: R) -> Result<Self> {
        let mut records = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            if lineno == 0 {
                if line.trim() != "epoch,H,MSE,J,dev_pair_cosine,src_f1,tgt_f1" {
                    return Err(Error::format_at(1, "unexpected history header"));
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 7 {
                return Err(Error::format_at(lineno + 1, "expected 7 fields"));
            }
            let parse = |s: &str| -> Result<f64> {
                s.parse()
                    .map_err(|_| Error::format_at(lineno + 1, format!("bad number {s:?}")))
            };
            let parse_opt = |s: &str| -> Result<Option<f64>> {
                if s.is_empty() {
                    Ok(None)
                } else {
                    parse(s).map(Some)
                }
            };
            records.push(EpochRecord {
                epoch: fields[0]
                    .parse()
                    .map_err(|_| Error::format_at(lineno + 1, "bad epoch"))?,
                sentiment_loss: parse(fields[1])?,
                projection_loss: parse_opt(fields[2])?,
                joint_loss: parse(fields[3])?,
                dev_pair_cosine: parse_opt(fields[4])?,
                src_f1: parse_opt(fields[5])?,
                tgt_f1: parse_opt(fields[6])?,
            });
        }
        Ok(TrainHistory { records })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TrainMode {
    Full,
    NoMprime,
    NoProjection,
}

/// Trains the full model. Per epoch the sentiment data is reshuffled
/// (seeded) and each sentiment batch is paired with the next lexicon
/// batch, cycling round-robin; one ADAM step runs per paired batch.
pub fn train(
    config: &TrainConfig,
    spaces: Spaces<'_>,
    data: TrainData<'_>,
) -> Result<(BlseParams, TrainHistory)> {
    train_impl(config, spaces, data, TrainMode::Full)
}

/// Ablation sharing one projection matrix for both languages; the target
/// side is classified through `M` as well.
pub fn train_no_mprime(
    config: &TrainConfig,
    spaces: Spaces<'_>,
    data: TrainData<'_>,
) -> Result<(BlseParams, TrainHistory)> {
    train_impl(config, spaces, data, TrainMode::NoMprime)
}

/// Ablation projecting straight to the label space (`M: d×o`, `M': d'×o`,
/// no separate head) with a non-squared distance penalty.
pub fn train_no_projection(
    config: &TrainConfig,
    spaces: Spaces<'_>,
    data: TrainData<'_>,
) -> Result<(BlseParams, TrainHistory)> {
    train_impl(config, spaces, data, TrainMode::NoProjection)
}

fn train_impl(
    config: &TrainConfig,
    spaces: Spaces<'_>,
    data: TrainData<'_>,
    mode: TrainMode,
) -> Result<(BlseParams, TrainHistory)> {
    config.validate()?;
    if data.corpus.instances.is_empty() {
        return Err(Error::Argument("training corpus is empty".into()));
    }
    let d = spaces.source.dim();
    let dprime = spaces.target.dim();
    let o = data.corpus.schema.arity();
    let h = match mode {
        TrainMode::NoProjection => o,
        _ => config.joint_dim.unwrap_or(d),
    };

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let init = BlseParams::init_with_rng(d, dprime, h, o, &mut rng, config.init)?;
    let mut m = init.m;
    let mut mprime = init.mprime;
    let mut p = match mode {
        TrainMode::NoProjection => Matrix::identity(o),
        _ => init.p,
    };

    // Embeddings are frozen, so phrase averages never change: resolve once.
    let sentences: Vec<LabeledSentence> = data.corpus.instances.iter().map(Into::into).collect();
    let feats = resolve_sentences(spaces.source, &sentences, config.oov_policy)?;
    for f in &feats {
        if f.label >= o {
            return Err(Error::Argument(format!(
                "label {} outside schema arity {o}",
                f.label
            )));
        }
    }

    let train_pairs = match data.lexicon_train {
        Some(lex) => {
            let (pairs, skipped) = resolve_pairs(lex, spaces.source, spaces.target);
            if skipped > 0 {
                log::warn!("skipped {skipped} unresolvable training lexicon pairs");
            }
            if pairs.is_empty() {
                return Err(Error::Training(
                    "no training lexicon pair is resolvable in both vocabularies".into(),
                ));
            }
            pairs
        }
        None => Vec::new(),
    };
    let dev_pairs = match data.lexicon_dev {
        Some(lex) => resolve_pairs(lex, spaces.source, spaces.target).0,
        None => Vec::new(),
    };

    let dev_src = data
        .dev_source
        .map(|c| resolve_dev(spaces.source, c, config.oov_policy))
        .transpose()?;
    let dev_trg = data
        .dev_target
        .map(|c| resolve_dev(spaces.target, c, config.oov_policy))
        .transpose()?;

    let mut adam_m = AdamState::new(m.rows(), m.cols(), config.learning_rate);
    let mut adam_mprime = AdamState::new(mprime.rows(), mprime.cols(), config.learning_rate);
    let mut adam_p = AdamState::new(p.rows(), p.cols(), config.learning_rate);

    let alpha = config.alpha;
    let mut order: Vec<usize> = (0..feats.len()).collect();
    let mut lex_cursor = 0usize;
    let mut history = TrainHistory::default();

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let mut sum_h = 0.0;
        let mut sum_mse = 0.0;
        let mut sum_j = 0.0;
        let mut batches = 0usize;

        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<&SentenceFeatures> = chunk.iter().map(|&i| &feats[i]).collect();
            let lex_batch = next_lexicon_batch(&train_pairs, &mut lex_cursor, config.batch_size);

            let mut gm = Matrix::zeros(m.rows(), m.cols());
            let mut gmprime = Matrix::zeros(mprime.rows(), mprime.cols());
            let mut gp = Matrix::zeros(p.rows(), p.cols());

            let batch_owned: Vec<SentenceFeatures> = batch
                .iter()
                .map(|f| SentenceFeatures {
                    avg: f.avg.clone(),
                    label: f.label,
                    flagged: f.flagged,
                })
                .collect();

            let h_loss = if alpha > 0.0 {
                ce_grads(&batch_owned, &m, &p, &mut gm, &mut gp, alpha)?
            } else {
                ce_loss(&batch_owned, &m, &p)?
            };

            let mse_loss = if lex_batch.is_empty() {
                None
            } else if alpha < 1.0 {
                Some(match mode {
                    TrainMode::Full => {
                        mse_grads(&lex_batch, &m, &mprime, &mut gm, &mut gmprime, 1.0 - alpha)?
                    }
                    TrainMode::NoMprime => {
                        let diffs: Vec<Vec<f64>> = lex_batch
                            .iter()
                            .map(|(s, t)| s.iter().zip(t.iter()).map(|(a, b)| a - b).collect())
                            .collect();
                        shared_mse_grads(&diffs, &m, Some(&mut gm), 1.0 - alpha)?
                    }
                    TrainMode::NoProjection => norm_penalty_grads(
                        &lex_batch,
                        &m,
                        &mprime,
                        Some((&mut gm, &mut gmprime)),
                        1.0 - alpha,
                    )?,
                })
            } else {
                Some(match mode {
                    TrainMode::Full => {
                        mse_grads(&lex_batch, &m, &mprime, &mut gm, &mut gmprime, 0.0)?
                    }
                    TrainMode::NoMprime => {
                        let diffs: Vec<Vec<f64>> = lex_batch
                            .iter()
                            .map(|(s, t)| s.iter().zip(t.iter()).map(|(a, b)| a - b).collect())
                            .collect();
                        shared_mse_grads(&diffs, &m, None, 0.0)?
                    }
                    TrainMode::NoProjection => {
                        norm_penalty_grads(&lex_batch, &m, &mprime, None, 0.0)?
                    }
                })
            };

            adam_step(&mut m, &gm, &mut adam_m)?;
            if mode == TrainMode::Full || mode == TrainMode::NoProjection {
                adam_step(&mut mprime, &gmprime, &mut adam_mprime)?;
            }
            if mode != TrainMode::NoProjection {
                adam_step(&mut p, &gp, &mut adam_p)?;
            }

            let mse_value = mse_loss.unwrap_or(0.0);
            sum_h += h_loss;
            sum_mse += mse_value;
            sum_j += alpha * h_loss + (1.0 - alpha) * mse_value;
            batches += 1;
        }

        if epoch == 1 && feats.iter().all(|f| f.flagged) {
            return Err(Error::Training(
                "every training instance is out of vocabulary".into(),
            ));
        }

        let nb = batches as f64;
        let eval_now = epoch % config.dev_eval_every == 0 || epoch == config.epochs;
        let target_proj = match mode {
            TrainMode::NoMprime => &m,
            _ => &mprime,
        };
        let dev_cosine = mean_pair_cosine(&dev_pairs, &m, target_proj);
        let src_f1 = match (&dev_src, eval_now) {
            (Some(dev), true) => Some(dev_macro_f1(dev, &m, &p, o)),
            _ => None,
        };
        let tgt_f1 = match (&dev_trg, eval_now) {
            (Some(dev), true) => Some(dev_macro_f1(dev, target_proj, &p, o)),
            _ => None,
        };
        history.records.push(EpochRecord {
            epoch,
            sentiment_loss: sum_h / nb,
            projection_loss: if train_pairs.is_empty() {
                None
            } else {
                Some(sum_mse / nb)
            },
            joint_loss: sum_j / nb,
            dev_pair_cosine: dev_cosine,
            src_f1,
            tgt_f1,
        });
    }

    let params = match mode {
        TrainMode::Full => BlseParams {
            kind: ModelKind::Sentence,
            m,
            mprime,
            p,
        },
        TrainMode::NoMprime => {
            let shared = m.clone();
            BlseParams {
                kind: ModelKind::NoMprime,
                m,
                mprime: shared,
                p,
            }
        }
        TrainMode::NoProjection => BlseParams {
            kind: ModelKind::NoProjection,
            m,
            mprime,
            p,
        },
    };
    Ok((params, history))
}

fn next_lexicon_batch(
    pairs: &[(Vec<f64>, Vec<f64>)],
    cursor: &mut usize,
    size: usize,
) -> Vec<(Vec<f64>, Vec<f64>)> {
    if pairs.is_empty() {
        return Vec::new();
    }
    let mut batch = Vec::with_capacity(size.min(pairs.len()));
    for _ in 0..size.min(pairs.len()) {
        batch.push(pairs[*cursor].clone());
        *cursor = (*cursor + 1) % pairs.len();
    }
    batch
}

struct DevSet {
    feats: Vec<SentenceFeatures>,
    gold: Vec<usize>,
}

fn resolve_dev(space: &EmbeddingSpace, corpus: &Corpus, policy: OovPolicy) -> Result<DevSet> {
    let sentences: Vec<LabeledSentence> = corpus.instances.iter().map(Into::into).collect();
    let feats = resolve_sentences(space, &sentences, policy)?;
    let gold = feats.iter().map(|f| f.label).collect();
    Ok(DevSet { feats, gold })
}

fn dev_macro_f1(dev: &DevSet, proj: &Matrix, head: &Matrix, o: usize) -> f64 {
    let pred: Vec<usize> = dev
        .feats
        .iter()
        .map(|f| {
            let z = row_vec_mul(&f.avg, proj).expect("dims fixed at resolve time");
            let logits = row_vec_mul(&z, head).expect("dims fixed at resolve time");
            argmax(&logits)
        })
        .collect();
    eval::evaluate(&dev.gold, &pred, o)
        .map(|r| r.macro_f1)
        .unwrap_or(0.0)
}

fn mean_pair_cosine(pairs: &[(Vec<f64>, Vec<f64>)], m: &Matrix, mprime: &Matrix) -> Option<f64> {
    if pairs.is_empty() {
        return None;
    }
    let mut total = 0.0;
    let mut count = 0usize;
    for (s, t) in pairs {
        let zs = row_vec_mul(s, m).ok()?;
        let zt = row_vec_mul(t, mprime).ok()?;
        if let Ok(c) = cosine(&zs, &zt) {
            total += c;
            count += 1;
        }
    }
    if count == 0 {
        None
    } else {
        Some(total / count as f64)
    }
}
