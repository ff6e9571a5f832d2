//! Target-level classifiers on top of the bilingual projections: the
//! SPLIT architecture (left context, target, and right context averaged
//! and projected separately, then concatenated for classification), its
//! Target-only and Context-only simplifications, and the sentence-polarity
//! baseline.

use std::collections::HashMap;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::blse::{
    self, argmax, mse_grads, resolve_pairs, BlseParams, JointLoss, Side, Spaces, TrainConfig,
    TrainData, TrainHistory,
};
use crate::corpus::TargetedInstance;
use crate::embeddings::{EmbeddingSpace, OovPolicy};
use crate::error::{Error, Result};
use crate::eval;
use crate::linalg::{adam_step, cosine, dot, row_vec_mul, stable_softmax, AdamState, Matrix};

/// Which targeted architecture a parameter set implements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// Left/target/right averaged, projected, concatenated.
    Split,
    /// Whole-sentence polarity assigned to every target.
    Sent,
    /// Context thirds zeroed before classification.
    TargetOnly,
    /// The target third replaced by one learned shared vector.
    ContextOnly,
}

impl Variant {
    pub fn as_str(&self) -> &'static str {
        match self {
            Variant::Split => "split",
            Variant::Sent => "sent",
            Variant::TargetOnly => "target_only",
            Variant::ContextOnly => "context_only",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "split" => Ok(Variant::Split),
            "sent" => Ok(Variant::Sent),
            "target_only" => Ok(Variant::TargetOnly),
            "context_only" => Ok(Variant::ContextOnly),
            other => Err(Error::Argument(format!("unknown variant {other:?}"))),
        }
    }
}

/// SPLIT parameters: the shared projection pair from the sentence model
/// plus a `(3h)×o` classification head. Context-only additionally learns
/// one shared target vector (source-space, projected through `M`).
#[derive(Debug, Clone, PartialEq)]
pub struct TargetedParams {
    pub base: BlseParams,
    pub tclf: Matrix,
    pub variant: Variant,
    pub shared_target: Vec<f64>,
}

impl TargetedParams {
    pub fn h(&self) -> usize {
        self.base.h()
    }

    pub fn o(&self) -> usize {
        self.tclf.cols()
    }
}

struct TargetedFeatures {
    left: Vec<f64>,
    target: Vec<f64>,
    right: Vec<f64>,
    label: usize,
    flagged: bool,
}

fn resolve_targeted(
    space: &EmbeddingSpace,
    instances: &[TargetedInstance],
    policy: OovPolicy,
) -> Result<Vec<TargetedFeatures>> {
    instances
        .iter()
        .map(|inst| {
            let (l, t, r) = inst.split_at_target()?;
            Ok(TargetedFeatures {
                left: space.average(l, policy),
                target: space.average(t, policy),
                right: space.average(r, policy),
                label: inst.label,
                flagged: space.all_oov(&inst.tokens),
            })
        })
        .collect()
}

fn concat_projected(
    params: &TargetedParams,
    feats: &TargetedFeatures,
    side: Side,
) -> Result<Vec<f64>> {
    let proj = params.base.projection(side);
    let h = params.h();
    let mut c = Vec::with_capacity(3 * h);
    match params.variant {
        Variant::Split | Variant::Sent => {
            c.extend(row_vec_mul(&feats.left, proj)?);
            c.extend(row_vec_mul(&feats.target, proj)?);
            c.extend(row_vec_mul(&feats.right, proj)?);
        }
        Variant::TargetOnly => {
            c.extend(std::iter::repeat_n(0.0, h));
            c.extend(row_vec_mul(&feats.target, proj)?);
            c.extend(std::iter::repeat_n(0.0, h));
        }
        Variant::ContextOnly => {
            c.extend(row_vec_mul(&feats.left, proj)?);
            // The shared target representation lives in the source space
            // and always projects through M, so it is one vector for both
            // languages.
            c.extend(row_vec_mul(&params.shared_target, &params.base.m)?);
            c.extend(row_vec_mul(&feats.right, proj)?);
        }
    }
    Ok(c)
}

/// Class probabilities of the full SPLIT computation, regardless of the
/// parameter set's variant tag. Empty contexts contribute zero vectors.
pub fn targeted_forward(
    params: &TargetedParams,
    space: &EmbeddingSpace,
    instance: &TargetedInstance,
    side: Side,
    policy: OovPolicy,
) -> Result<(Vec<f64>, bool)> {
    let split = TargetedParams {
        variant: Variant::Split,
        ..params.clone()
    };
    forward_with_variant(&split, space, instance, side, policy)
}

/// Class probabilities under the parameter set's own variant.
pub fn variant_forward(
    params: &TargetedParams,
    space: &EmbeddingSpace,
    instance: &TargetedInstance,
    side: Side,
    policy: OovPolicy,
) -> Result<(Vec<f64>, bool)> {
    match params.variant {
        Variant::Sent => {
            blse::sentiment_forward(&params.base, space, &instance.tokens, side, policy)
        }
        _ => forward_with_variant(params, space, instance, side, policy),
    }
}

fn forward_with_variant(
    params: &TargetedParams,
    space: &EmbeddingSpace,
    instance: &TargetedInstance,
    side: Side,
    policy: OovPolicy,
) -> Result<(Vec<f64>, bool)> {
    let feats = resolve_targeted(space, std::slice::from_ref(instance), policy)?
        .pop()
        .expect("one instance resolves to one feature row");
    let c = concat_projected(params, &feats, side)?;
    let logits = row_vec_mul(&c, &params.tclf)?;
    Ok((stable_softmax(&logits)?, feats.flagged))
}

/// Predicted label under the variant forward; ties break to the lowest
/// label index.
pub fn predict_targeted(
    params: &TargetedParams,
    space: &EmbeddingSpace,
    instance: &TargetedInstance,
    side: Side,
    policy: OovPolicy,
) -> Result<usize> {
    let (probs, _) = variant_forward(params, space, instance, side, policy)?;
    Ok(argmax(&probs))
}

/// Classifies each sentence once with the sentence-level predictor and
/// assigns that label to every target in it. Instances must carry
/// sentence ids; output order follows input order.
pub fn sent_baseline(
    params: &BlseParams,
    space: &EmbeddingSpace,
    instances: &[TargetedInstance],
    side: Side,
    policy: OovPolicy,
) -> Result<Vec<usize>> {
    let mut by_sid: HashMap<&str, usize> = HashMap::new();
    let mut labels = Vec::with_capacity(instances.len());
    for inst in instances {
        let sid = inst.sid.as_deref().ok_or_else(|| {
            Error::Argument("sentence baseline needs a sentence id on every instance".into())
        })?;
        let label = match by_sid.get(sid) {
            Some(&l) => l,
            None => {
                let l = blse::predict(params, space, &inst.tokens, side, policy)?;
                by_sid.insert(sid, l);
                l
            }
        };
        labels.push(label);
    }
    Ok(labels)
}

/// Gradients of the targeted joint loss.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetedGradients {
    pub m: Matrix,
    pub mprime: Matrix,
    pub tclf: Matrix,
    pub shared_target: Vec<f64>,
}

/// `J = α·H + (1−α)·MSE` where `H` flows through the variant's forward on
/// the source side and `MSE` is the translation-pair term of the sentence
/// model.
pub fn targeted_joint_loss(
    params: &TargetedParams,
    alpha: f64,
    space: &EmbeddingSpace,
    batch: &[TargetedInstance],
    pairs: &[(Vec<f64>, Vec<f64>)],
    policy: OovPolicy,
) -> Result<JointLoss> {
    if batch.is_empty() || pairs.is_empty() {
        return Err(Error::Argument("joint loss needs non-empty batches".into()));
    }
    let feats = resolve_targeted(space, batch, policy)?;
    let h = targeted_ce(params, &feats, None)?;
    let mse = blse::projection_loss(&params.base, pairs)?;
    Ok(JointLoss {
        joint: alpha * h + (1.0 - alpha) * mse,
        sentiment: h,
        projection: mse,
    })
}

/// Analytic gradients matching [`targeted_joint_loss`].
pub fn targeted_gradients(
    params: &TargetedParams,
    alpha: f64,
    space: &EmbeddingSpace,
    batch: &[TargetedInstance],
    pairs: &[(Vec<f64>, Vec<f64>)],
    policy: OovPolicy,
) -> Result<TargetedGradients> {
    if batch.is_empty() || pairs.is_empty() {
        return Err(Error::Argument("gradients need non-empty batches".into()));
    }
    let feats = resolve_targeted(space, batch, policy)?;
    let mut grads = TargetedGradients {
        m: Matrix::zeros(params.base.m.rows(), params.base.m.cols()),
        mprime: Matrix::zeros(params.base.mprime.rows(), params.base.mprime.cols()),
        tclf: Matrix::zeros(params.tclf.rows(), params.tclf.cols()),
        shared_target: vec![0.0; params.shared_target.len()],
    };
    if alpha > 0.0 {
        targeted_ce(params, &feats, Some((&mut grads, alpha)))?;
    }
    if alpha < 1.0 {
        mse_grads(
            pairs,
            &params.base.m,
            &params.base.mprime,
            &mut grads.m,
            &mut grads.mprime,
            1.0 - alpha,
        )?;
    }
    Ok(grads)
}

/// Mean cross-entropy through the variant forward on the source side,
/// optionally accumulating `weight`-scaled gradients.
fn targeted_ce(
    params: &TargetedParams,
    feats: &[TargetedFeatures],
    mut grads: Option<(&mut TargetedGradients, f64)>,
) -> Result<f64> {
    let n = feats.len() as f64;
    let h = params.h();
    let mut total = 0.0;
    for f in feats {
        let c = concat_projected(params, f, Side::Source)?;
        let logits = row_vec_mul(&c, &params.tclf)?;
        if f.label >= logits.len() {
            return Err(Error::Argument(format!(
                "label {} outside {} classes",
                f.label,
                logits.len()
            )));
        }
        let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + logits.iter().map(|&l| (l - max).exp()).sum::<f64>().ln();
        total += lse - logits[f.label];

        if let Some((g, weight)) = grads.as_mut() {
            let scale = *weight / n;
            let mut delta = stable_softmax(&logits)?;
            delta[f.label] -= 1.0;
            g.tclf.add_scaled_outer(&c, &delta, scale);
            let gc: Vec<f64> = (0..params.tclf.rows())
                .map(|r| dot(params.tclf.row(r), &delta))
                .collect();
            let (gl, gt, gr) = (&gc[..h], &gc[h..2 * h], &gc[2 * h..]);
            match params.variant {
                Variant::Split | Variant::Sent => {
                    g.m.add_scaled_outer(&f.left, gl, scale);
                    g.m.add_scaled_outer(&f.target, gt, scale);
                    g.m.add_scaled_outer(&f.right, gr, scale);
                }
                Variant::TargetOnly => {
                    g.m.add_scaled_outer(&f.target, gt, scale);
                }
                Variant::ContextOnly => {
                    g.m.add_scaled_outer(&f.left, gl, scale);
                    g.m.add_scaled_outer(&f.right, gr, scale);
                    g.m.add_scaled_outer(&params.shared_target, gt, scale);
                    for (j, gs) in g.shared_target.iter_mut().enumerate() {
                        *gs += scale * dot(params.base.m.row(j), gt);
                    }
                }
            }
        }
    }
    Ok(total / n)
}

/// Trains a targeted model with the same pairing scheme as the sentence
/// trainer: shuffled sentiment batches, lexicon batches cycled
/// round-robin, one ADAM step per pair.
pub fn train_targeted(
    config: &TrainConfig,
    spaces: Spaces<'_>,
    data: TrainData<'_>,
    variant: Variant,
) -> Result<(TargetedParams, TrainHistory)> {
    if variant == Variant::Sent {
        // The baseline is the sentence-level model over full token
        // sequences; spans play no role during training.
        let (base, history) = blse::train(config, spaces, data)?;
        let h = base.h();
        let d = base.d();
        let o = base.o();
        return Ok((
            TargetedParams {
                base,
                tclf: Matrix::zeros(3 * h, o),
                variant,
                shared_target: vec![0.0; d],
            },
            history,
        ));
    }

    config_checks(config)?;
    if data.corpus.instances.is_empty() {
        return Err(Error::Argument("training corpus is empty".into()));
    }
    let d = spaces.source.dim();
    let dprime = spaces.target.dim();
    let o = data.corpus.schema.arity();
    let h = config.joint_dim.unwrap_or(d);

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let base = BlseParams::init_with_rng(d, dprime, h, o, &mut rng, config.init)?;
    let tclf = {
        let bound = 1.0 / (3.0 * h as f64).sqrt();
        let data: Vec<f64> = (0..3 * h * o)
            .map(|_| rng.random_range(-bound..bound))
            .collect();
        Matrix::from_vec(3 * h, o, data).expect("sizes agree")
    };
    let mut params = TargetedParams {
        base,
        tclf,
        variant,
        shared_target: vec![0.0; d],
    };

    let feats = resolve_targeted(spaces.source, &data.corpus.instances, config.oov_policy)?;
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
        .map(|c| resolve_targeted(spaces.source, &c.instances, config.oov_policy))
        .transpose()?;
    let dev_src_gold: Option<Vec<usize>> = data.dev_source.map(|c| c.gold_labels());
    let dev_trg = data
        .dev_target
        .map(|c| resolve_targeted(spaces.target, &c.instances, config.oov_policy))
        .transpose()?;
    let dev_trg_gold: Option<Vec<usize>> = data.dev_target.map(|c| c.gold_labels());

    let lr = config.learning_rate;
    let mut adam_m = AdamState::new(d, h, lr);
    let mut adam_mprime = AdamState::new(dprime, h, lr);
    let mut adam_tclf = AdamState::new(3 * h, o, lr);
    let mut adam_shared = AdamState::new(d, 1, lr);

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
            let batch: Vec<TargetedFeatures> = chunk
                .iter()
                .map(|&i| TargetedFeatures {
                    left: feats[i].left.clone(),
                    target: feats[i].target.clone(),
                    right: feats[i].right.clone(),
                    label: feats[i].label,
                    flagged: feats[i].flagged,
                })
                .collect();
            let lex_batch = next_batch(&train_pairs, &mut lex_cursor, config.batch_size);

            let mut grads = TargetedGradients {
                m: Matrix::zeros(d, h),
                mprime: Matrix::zeros(dprime, h),
                tclf: Matrix::zeros(3 * h, o),
                shared_target: vec![0.0; d],
            };
            let h_loss = if alpha > 0.0 {
                targeted_ce(&params, &batch, Some((&mut grads, alpha)))?
            } else {
                targeted_ce(&params, &batch, None)?
            };
            let mse_loss = if lex_batch.is_empty() {
                None
            } else {
                let weight = 1.0 - alpha;
                Some(mse_grads(
                    &lex_batch,
                    &params.base.m,
                    &params.base.mprime,
                    &mut grads.m,
                    &mut grads.mprime,
                    weight,
                )?)
            };

            adam_step(&mut params.base.m, &grads.m, &mut adam_m)?;
            adam_step(&mut params.base.mprime, &grads.mprime, &mut adam_mprime)?;
            adam_step(&mut params.tclf, &grads.tclf, &mut adam_tclf)?;
            if variant == Variant::ContextOnly {
                let mut shared = Matrix::from_vec(d, 1, params.shared_target.clone())?;
                let gshared = Matrix::from_vec(d, 1, grads.shared_target.clone())?;
                adam_step(&mut shared, &gshared, &mut adam_shared)?;
                params.shared_target = shared.data().to_vec();
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
        let dev_cosine = mean_dev_cosine(&dev_pairs, &params.base);
        let src_f1 = match (&dev_src, &dev_src_gold, eval_now) {
            (Some(feats), Some(gold), true) => Some(dev_f1(&params, feats, gold, Side::Source, o)?),
            _ => None,
        };
        let tgt_f1 = match (&dev_trg, &dev_trg_gold, eval_now) {
            (Some(feats), Some(gold), true) => Some(dev_f1(&params, feats, gold, Side::Target, o)?),
            _ => None,
        };
        history.records.push(blse::EpochRecord {
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

    Ok((params, history))
}

fn config_checks(config: &TrainConfig) -> Result<()> {
    if !(0.0..=1.0).contains(&config.alpha) {
        return Err(Error::Argument(format!(
            "alpha must lie in [0,1], got {}",
            config.alpha
        )));
    }
    if config.epochs == 0 || config.batch_size == 0 || config.dev_eval_every == 0 {
        return Err(Error::Argument(
            "epochs, batch size and dev-eval-every must be >= 1".into(),
        ));
    }
    if config.learning_rate <= 0.0 {
        return Err(Error::Argument("learning rate must be positive".into()));
    }
    Ok(())
}

fn next_batch(
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

fn dev_f1(
    params: &TargetedParams,
    feats: &[TargetedFeatures],
    gold: &[usize],
    side: Side,
    o: usize,
) -> Result<f64> {
    let mut pred = Vec::with_capacity(feats.len());
    for f in feats {
        let c = concat_projected(params, f, side)?;
        let logits = row_vec_mul(&c, &params.tclf)?;
        pred.push(argmax(&logits));
    }
    Ok(eval::macro_f1(gold, &pred, o).unwrap_or(0.0))
}

fn mean_dev_cosine(pairs: &[(Vec<f64>, Vec<f64>)], base: &BlseParams) -> Option<f64> {
    if pairs.is_empty() {
        return None;
    }
    let mut total = 0.0;
    let mut count = 0usize;
    for (s, t) in pairs {
        let zs = row_vec_mul(s, &base.m).ok()?;
        let zt = row_vec_mul(t, &base.mprime).ok()?;
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blse::InitMode;
    use crate::corpus::{Corpus, LabelSchema};
    use crate::lexicon::BilingualLexicon;
    use crate::linalg::{finite_difference_gradient, relative_error};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn toks(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn space() -> EmbeddingSpace {
        let tokens = vec![
            "good".to_string(),
            "bad".to_string(),
            "it".to_string(),
            "was".to_string(),
        ];
        let matrix = Matrix::from_rows(&[
            vec![0.9, 0.1],
            vec![-0.7, 0.4],
            vec![0.05, -0.3],
            vec![0.2, 0.8],
        ])
        .unwrap();
        EmbeddingSpace::from_parts(tokens, matrix).unwrap()
    }

    fn params(seed: u64, variant: Variant) -> TargetedParams {
        let base = BlseParams::init(2, 2, 2, 2, seed, InitMode::Uniform).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 100);
        let data: Vec<f64> = (0..12).map(|_| rng.random_range(-0.4..0.4)).collect();
        TargetedParams {
            base,
            tclf: Matrix::from_vec(6, 2, data).unwrap(),
            variant,
            shared_target: vec![0.1, -0.2],
        }
    }

    fn inst(tokens: &[&str], span: (usize, usize), label: usize) -> TargetedInstance {
        TargetedInstance::targeted(toks(tokens), span, label).unwrap()
    }

    #[test]
    fn leading_target_zeroes_left_third() {
        let p = params(1, Variant::Split);
        let i = inst(&["good", "it", "was"], (0, 1), 1);
        let feats = resolve_targeted(&space(), &[i], OovPolicy::Skip).unwrap();
        let c = concat_projected(&p, &feats[0], Side::Source).unwrap();
        assert_eq!(&c[..2], &[0.0, 0.0]);
    }

    #[test]
    fn zero_head_gives_uniform() {
        let mut p = params(2, Variant::Split);
        p.tclf = Matrix::zeros(6, 2);
        let i = inst(&["it", "good", "was"], (1, 2), 1);
        let (probs, _) = targeted_forward(&p, &space(), &i, Side::Source, OovPolicy::Skip).unwrap();
        assert_relative_eq!(probs[0], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn forward_matches_manual_composition() {
        let p = params(3, Variant::Split);
        let s = space();
        let i = inst(&["it", "was", "good", "bad"], (2, 3), 1);
        let (probs, _) = targeted_forward(&p, &s, &i, Side::Source, OovPolicy::Skip).unwrap();

        let (l, t, r) = i.split_at_target().unwrap();
        let mut c = Vec::new();
        c.extend(row_vec_mul(&s.average(l, OovPolicy::Skip), &p.base.m).unwrap());
        c.extend(row_vec_mul(&s.average(t, OovPolicy::Skip), &p.base.m).unwrap());
        c.extend(row_vec_mul(&s.average(r, OovPolicy::Skip), &p.base.m).unwrap());
        let logits = row_vec_mul(&c, &p.tclf).unwrap();
        let want = stable_softmax(&logits).unwrap();
        for (a, b) in probs.iter().zip(&want) {
            assert_relative_eq!(a, b, epsilon = 1e-14);
        }
    }

    #[test]
    fn target_only_ignores_context() {
        let p = params(4, Variant::TargetOnly);
        let s = space();
        let a = inst(&["it", "good", "was"], (1, 2), 1);
        let b = inst(&["bad", "good", "bad"], (1, 2), 1);
        let (pa, _) = variant_forward(&p, &s, &a, Side::Source, OovPolicy::Skip).unwrap();
        let (pb, _) = variant_forward(&p, &s, &b, Side::Source, OovPolicy::Skip).unwrap();
        for (x, y) in pa.iter().zip(&pb) {
            assert_relative_eq!(x, y, epsilon = 1e-14);
        }
    }

    #[test]
    fn context_only_ignores_target() {
        let p = params(5, Variant::ContextOnly);
        let s = space();
        let a = inst(&["it", "good", "was"], (1, 2), 1);
        let b = inst(&["it", "bad", "was"], (1, 2), 1);
        let (pa, _) = variant_forward(&p, &s, &a, Side::Source, OovPolicy::Skip).unwrap();
        let (pb, _) = variant_forward(&p, &s, &b, Side::Source, OovPolicy::Skip).unwrap();
        for (x, y) in pa.iter().zip(&pb) {
            assert_relative_eq!(x, y, epsilon = 1e-14);
        }
    }

    #[test]
    fn split_variant_reduces_to_targeted_forward() {
        let p = params(6, Variant::Split);
        let s = space();
        let i = inst(&["it", "good", "was"], (1, 2), 1);
        let (a, _) = variant_forward(&p, &s, &i, Side::Source, OovPolicy::Skip).unwrap();
        let (b, _) = targeted_forward(&p, &s, &i, Side::Source, OovPolicy::Skip).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sent_baseline_uniform_per_sentence() {
        let base = BlseParams::init(2, 2, 2, 2, 7, InitMode::Uniform).unwrap();
        let s = space();
        let mk = |span, sid: &str| inst(&["good", "bad", "it"], span, 0).with_sid(sid);
        let instances = vec![
            mk((0, 1), "s1"),
            mk((1, 2), "s1"),
            mk((2, 3), "s1"),
            inst(&["bad", "was"], (0, 1), 0).with_sid("s2"),
        ];
        let labels = sent_baseline(&base, &s, &instances, Side::Source, OovPolicy::Skip).unwrap();
        assert_eq!(labels[0], labels[1]);
        assert_eq!(labels[1], labels[2]);
        let single = blse::predict(
            &base,
            &s,
            &instances[3].tokens,
            Side::Source,
            OovPolicy::Skip,
        )
        .unwrap();
        assert_eq!(labels[3], single);
    }

    #[test]
    fn sent_baseline_requires_sids() {
        let base = BlseParams::init(2, 2, 2, 2, 8, InitMode::Uniform).unwrap();
        let instances = vec![inst(&["good"], (0, 1), 0)];
        assert!(matches!(
            sent_baseline(&base, &space(), &instances, Side::Source, OovPolicy::Skip),
            Err(Error::Argument(_))
        ));
    }

    fn demo_batch() -> Vec<TargetedInstance> {
        vec![
            inst(&["it", "good", "was"], (1, 2), 1),
            inst(&["bad", "it"], (0, 1), 0),
            inst(&["was", "bad", "good"], (1, 3), 0),
        ]
    }

    fn demo_pairs() -> Vec<(Vec<f64>, Vec<f64>)> {
        vec![
            (vec![0.9, 0.1], vec![-0.7, 0.4]),
            (vec![0.05, -0.3], vec![0.2, 0.8]),
        ]
    }

    #[test]
    fn gradients_match_finite_differences_all_variants() {
        let s = space();
        let batch = demo_batch();
        let pairs = demo_pairs();
        let alpha = 0.45;
        for variant in [Variant::Split, Variant::TargetOnly, Variant::ContextOnly] {
            let p = params(9, variant);
            let g = targeted_gradients(&p, alpha, &s, &batch, &pairs, OovPolicy::Skip).unwrap();

            let fd = |select: &dyn Fn(&mut TargetedParams) -> &mut Matrix, at: &Matrix| {
                let loss = |x: &Matrix| {
                    let mut q = p.clone();
                    *select(&mut q) = x.clone();
                    targeted_joint_loss(&q, alpha, &s, &batch, &pairs, OovPolicy::Skip)
                        .map(|l| l.joint)
                };
                finite_difference_gradient(loss, at, 1e-5).unwrap()
            };
            let fd_m = fd(&|q| &mut q.base.m, &p.base.m);
            assert!(relative_error(&g.m, &fd_m) < 1e-6, "{variant:?} M");
            let fd_mp = fd(&|q| &mut q.base.mprime, &p.base.mprime);
            assert!(relative_error(&g.mprime, &fd_mp) < 1e-6, "{variant:?} M'");
            let fd_t = fd(&|q| &mut q.tclf, &p.tclf);
            assert!(relative_error(&g.tclf, &fd_t) < 1e-6, "{variant:?} Tclf");

            if variant == Variant::ContextOnly {
                let loss = |x: &Matrix| {
                    let mut q = p.clone();
                    q.shared_target = x.data().to_vec();
                    targeted_joint_loss(&q, alpha, &s, &batch, &pairs, OovPolicy::Skip)
                        .map(|l| l.joint)
                };
                let at = Matrix::from_vec(2, 1, p.shared_target.clone()).unwrap();
                let fd_s = finite_difference_gradient(loss, &at, 1e-5).unwrap();
                let gs = Matrix::from_vec(2, 1, g.shared_target.clone()).unwrap();
                assert!(relative_error(&gs, &fd_s) < 1e-6, "shared vector");
            }
        }
    }

    fn targeted_corpus() -> Corpus {
        Corpus {
            schema: LabelSchema::binary(),
            instances: demo_batch(),
        }
    }

    fn lexicon() -> BilingualLexicon {
        BilingualLexicon::new(
            "l",
            vec![
                ("good".into(), "good".into()),
                ("bad".into(), "bad".into()),
                ("it".into(), "it".into()),
            ],
        )
        .unwrap()
    }

    #[test]
    fn train_alpha_one_freezes_mprime() {
        let s = space();
        let corpus = targeted_corpus();
        let lex = lexicon();
        let config = TrainConfig {
            alpha: 1.0,
            epochs: 3,
            batch_size: 2,
            learning_rate: 0.01,
            seed: 11,
            ..TrainConfig::default()
        };
        let init = BlseParams::init(2, 2, 2, 2, 11, InitMode::Uniform).unwrap();
        let (p, history) = train_targeted(
            &config,
            Spaces {
                source: &s,
                target: &s,
            },
            TrainData {
                corpus: &corpus,
                lexicon_train: Some(&lex),
                lexicon_dev: None,
                dev_source: None,
                dev_target: None,
            },
            Variant::Split,
        )
        .unwrap();
        assert_eq!(p.base.mprime, init.mprime);
        assert_eq!(history.records.len(), 3);
    }

    #[test]
    fn train_is_deterministic() {
        let s = space();
        let corpus = targeted_corpus();
        let lex = lexicon();
        let config = TrainConfig {
            alpha: 0.4,
            epochs: 4,
            batch_size: 2,
            learning_rate: 0.01,
            seed: 12,
            ..TrainConfig::default()
        };
        let run = || {
            train_targeted(
                &config,
                Spaces {
                    source: &s,
                    target: &s,
                },
                TrainData {
                    corpus: &corpus,
                    lexicon_train: Some(&lex),
                    lexicon_dev: Some(&lex),
                    dev_source: Some(&corpus),
                    dev_target: Some(&corpus),
                },
                Variant::Split,
            )
            .unwrap()
        };
        let (pa, ha) = run();
        let (pb, hb) = run();
        assert_eq!(pa, pb);
        assert_eq!(ha, hb);
    }

    proptest! {
        #[test]
        fn forward_invariant_to_within_segment_permutation(seed in 0u64..40) {
            use rand::seq::SliceRandom;
            let p = params(13, Variant::Split);
            let s = space();
            let tokens = ["it", "was", "good", "bad", "it", "was"];
            let base = inst(&tokens, (2, 4), 1);
            let (want, _) =
                targeted_forward(&p, &s, &base, Side::Source, OovPolicy::Skip).unwrap();

            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut left: Vec<String> = toks(&tokens[..2]);
            let mut target: Vec<String> = toks(&tokens[2..4]);
            let mut right: Vec<String> = toks(&tokens[4..]);
            left.shuffle(&mut rng);
            target.shuffle(&mut rng);
            right.shuffle(&mut rng);
            let mut shuffled = left;
            shuffled.extend(target);
            shuffled.extend(right);
            let permuted = TargetedInstance::targeted(shuffled, (2, 4), 1).unwrap();
            let (got, _) =
                targeted_forward(&p, &s, &permuted, Side::Source, OovPolicy::Skip).unwrap();
            for (a, b) in want.iter().zip(&got) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn target_only_depends_only_on_target(seed in 0u64..40) {
            let p = params(14, Variant::TargetOnly);
            let s = space();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let vocab = ["good", "bad", "it", "was"];
            let pick = |rng: &mut ChaCha8Rng| vocab[rng.random_range(0..vocab.len())];
            let context_a = [pick(&mut rng), pick(&mut rng)];
            let context_b = [pick(&mut rng), pick(&mut rng)];
            let a = inst(&[context_a[0], "good", context_a[1]], (1, 2), 1);
            let b = inst(&[context_b[0], "good", context_b[1]], (1, 2), 1);
            let (pa, _) = variant_forward(&p, &s, &a, Side::Source, OovPolicy::Skip).unwrap();
            let (pb, _) = variant_forward(&p, &s, &b, Side::Source, OovPolicy::Skip).unwrap();
            for (x, y) in pa.iter().zip(&pb) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }
    }
}
