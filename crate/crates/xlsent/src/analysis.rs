//! Diagnostic analyses: translation-pair cosine, sentiment synonym and
//! antonym geometry, n-gram language similarity, smoothed symmetrized-KL
//! domain divergence, Pearson correlation, and projected-vector export.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;

use serde::Serialize;

use crate::blse::{BlseParams, Side};
use crate::embeddings::{write_word2vec, EmbeddingSpace};
use crate::error::{Error, Result};
use crate::lexicon::BilingualLexicon;
use crate::linalg::cosine;
use crate::mapping::MappingMatrix;

/// Anything that maps source and target vectors into one comparison space.
/// The joint model projects both sides; a fitted mapping projects the
/// source into the target space and leaves target vectors as they are.
pub trait PairProjector {
    fn project_side(&self, side: Side, v: &[f64]) -> Result<Vec<f64>>;
}

impl PairProjector for BlseParams {
    fn project_side(&self, side: Side, v: &[f64]) -> Result<Vec<f64>> {
        crate::blse::project(self, side, v)
    }
}

impl PairProjector for MappingMatrix {
    fn project_side(&self, side: Side, v: &[f64]) -> Result<Vec<f64>> {
        match side {
            Side::Source => self.project(v),
            Side::Target => Ok(v.to_vec()),
        }
    }
}

/// Mean cosine between the projected sides of every resolvable lexicon
/// pair. Returns the mean and the number of skipped pairs.
pub fn pair_cosine<P: PairProjector>(
    projector: &P,
    source: &EmbeddingSpace,
    target: &EmbeddingSpace,
    lexicon: &BilingualLexicon,
) -> Result<(f64, usize)> {
    let mut total = 0.0;
    let mut count = 0usize;
    let mut skipped = 0usize;
    for (s, t) in lexicon.pairs() {
        match (source.lookup(s), target.lookup(t)) {
            (Some(sv), Some(tv)) => {
                let zs = projector.project_side(Side::Source, sv)?;
                let zt = projector.project_side(Side::Target, tv)?;
                total += cosine(&zs, &zt)?;
                count += 1;
            }
            _ => skipped += 1,
        }
    }
    if count == 0 {
        return Err(Error::Argument(
            "no lexicon pair is resolvable in both vocabularies".into(),
        ));
    }
    Ok((total / count as f64, skipped))
}

/// Mean pairwise cosine inside the polarity sets (pooled) versus across
/// them, measured on projected vectors.
pub fn synonym_antonym_separation(
    params: &BlseParams,
    space: &EmbeddingSpace,
    positive: &[String],
    negative: &[String],
    side: Side,
) -> Result<(f64, f64)> {
    let project_all = |tokens: &[String]| -> Result<Vec<Vec<f64>>> {
        let vecs = tokens
            .iter()
            .filter_map(|t| space.lookup(t))
            .map(|v| params.project_side(side, v))
            .collect::<Result<Vec<_>>>()?;
        if vecs.is_empty() {
            return Err(Error::Argument(
                "no token of the polarity set is in the vocabulary".into(),
            ));
        }
        Ok(vecs)
    };
    let pos = project_all(positive)?;
    let neg = project_all(negative)?;

    let mut within = 0.0;
    let mut within_count = 0usize;
    for set in [&pos, &neg] {
        for i in 0..set.len() {
            for j in (i + 1)..set.len() {
                within += cosine(&set[i], &set[j])?;
                within_count += 1;
            }
        }
    }
    let mut cross = 0.0;
    let mut cross_count = 0usize;
    for p in &pos {
        for n in &neg {
            cross += cosine(p, n)?;
            cross_count += 1;
        }
    }
    if within_count == 0 || cross_count == 0 {
        return Err(Error::Argument(
            "polarity sets too small for pairwise cosines".into(),
        ));
    }
    Ok((within / within_count as f64, cross / cross_count as f64))
}

/// A normalized n-gram frequency profile over an arbitrary symbol stream
/// (POS tags, characters, words).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NgramProfile {
    pub n: usize,
    pub counts: BTreeMap<String, usize>,
    pub normalized: BTreeMap<String, f64>,
}

/// Sliding-window n-grams of a symbol sequence, joined with `\u{1}` so
/// multi-character symbols cannot collide, with counts normalized to
/// probabilities.
pub fn ngram_profile<S: AsRef<str>>(symbols: &[S], n: usize) -> Result<NgramProfile> {
    if n == 0 {
        return Err(Error::Argument("gram order must be >= 1".into()));
    }
    if symbols.len() < n {
        return Err(Error::Argument(format!(
            "sequence of {} symbols is shorter than n = {n}",
            symbols.len()
        )));
    }
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for window in symbols.windows(n) {
        let key = window
            .iter()
            .map(AsRef::as_ref)
            .collect::<Vec<_>>()
            .join("\u{1}");
        *counts.entry(key).or_default() += 1;
    }
    let total: usize = counts.values().sum();
    let normalized = counts
        .iter()
        .map(|(k, &c)| (k.clone(), c as f64 / total as f64))
        .collect();
    Ok(NgramProfile {
        n,
        counts,
        normalized,
    })
}

/// Character n-gram profile of a text (whitespace kept as a symbol).
pub fn char_ngram_profile(text: &str, n: usize) -> Result<NgramProfile> {
    let symbols: Vec<String> = text.chars().map(|c| c.to_string()).collect();
    ngram_profile(&symbols, n)
}

/// Cosine between the concatenations of each language's POS-tag profile
/// and character profile, over the union of keys (absent key counts 0).
/// Lands in [0, 1] because all inputs are non-negative.
pub fn language_similarity(
    a_pos: &NgramProfile,
    a_char: &NgramProfile,
    b_pos: &NgramProfile,
    b_char: &NgramProfile,
) -> Result<f64> {
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for (a, b) in [(a_pos, b_pos), (a_char, b_char)] {
        let keys: std::collections::BTreeSet<&String> =
            a.normalized.keys().chain(b.normalized.keys()).collect();
        for k in keys {
            let x = a.normalized.get(k).copied().unwrap_or(0.0);
            let y = b.normalized.get(k).copied().unwrap_or(0.0);
            dot += x * y;
            na += x * x;
            nb += y * y;
        }
    }
    if na == 0.0 || nb == 0.0 {
        return Err(Error::Argument("empty n-gram profiles".into()));
    }
    Ok(dot / (na.sqrt() * nb.sqrt()))
}

/// Smoothed symmetrized Kullback-Leibler divergence
/// `½ [KL(P‖Q) + KL(Q‖P)]` in natural log, with `smoothing` added to every
/// count over the union key set before normalization. This is the exact
/// quantity the domain-similarity analysis uses; it is not the
/// mixture-based Jensen-Shannon divergence.
pub fn js_divergence(
    p: &HashMap<String, f64>,
    q: &HashMap<String, f64>,
    smoothing: f64,
) -> Result<f64> {
    if p.is_empty() || q.is_empty() {
        return Err(Error::Argument("empty distribution".into()));
    }
    if smoothing <= 0.0 {
        return Err(Error::Argument("smoothing must be positive".into()));
    }
    let keys: std::collections::BTreeSet<&String> = p.keys().chain(q.keys()).collect();
    let mut pv = Vec::with_capacity(keys.len());
    let mut qv = Vec::with_capacity(keys.len());
    for k in keys {
        let a = p.get(k).copied().unwrap_or(0.0);
        let b = q.get(k).copied().unwrap_or(0.0);
        if a < 0.0 || b < 0.0 {
            return Err(Error::Argument("negative count".into()));
        }
        pv.push(a + smoothing);
        qv.push(b + smoothing);
    }
    let ps: f64 = pv.iter().sum();
    let qs: f64 = qv.iter().sum();
    let mut kl_pq = 0.0;
    let mut kl_qp = 0.0;
    for (a, b) in pv.iter().zip(&qv) {
        let pa = a / ps;
        let qb = b / qs;
        kl_pq += pa * (pa / qb).ln();
        kl_qp += qb * (qb / pa).ln();
    }
    Ok(0.5 * (kl_pq + kl_qp))
}

/// Unigram counts of a whitespace-tokenized line stream.
pub fn unigram_counts<S: AsRef<str>>(lines: &[S]) -> HashMap<String, f64> {
    let mut counts: HashMap<String, f64> = HashMap::new();
    for line in lines {
        for tok in line.as_ref().split_whitespace() {
            *counts.entry(tok.to_string()).or_default() += 1.0;
        }
    }
    counts
}

/// The most frequent `top_n` unigrams of each domain, intersected across
/// all domains; ties at the frequency cut resolve alphabetically.
pub fn common_vocabulary(domains: &[&HashMap<String, f64>], top_n: usize) -> Vec<String> {
    let mut common: Option<std::collections::BTreeSet<String>> = None;
    for counts in domains {
        let mut items: Vec<(&String, &f64)> = counts.iter().collect();
        items.sort_by(|a, b| b.1.partial_cmp(a.1).unwrap().then(a.0.cmp(b.0)));
        let top: std::collections::BTreeSet<String> = items
            .into_iter()
            .take(top_n)
            .map(|(k, _)| k.clone())
            .collect();
        common = Some(match common {
            None => top,
            Some(prev) => prev.intersection(&top).cloned().collect(),
        });
    }
    common.map(|s| s.into_iter().collect()).unwrap_or_default()
}

/// Divergence between two domains over their shared frequent vocabulary.
pub fn domain_divergence(
    domain_a: &HashMap<String, f64>,
    domain_b: &HashMap<String, f64>,
    top_n: usize,
    smoothing: f64,
) -> Result<f64> {
    let vocab = common_vocabulary(&[domain_a, domain_b], top_n);
    if vocab.is_empty() {
        return Err(Error::Argument(
            "domains share no vocabulary at this cutoff".into(),
        ));
    }
    let restrict = |counts: &HashMap<String, f64>| -> HashMap<String, f64> {
        vocab
            .iter()
            .map(|k| (k.clone(), counts.get(k).copied().unwrap_or(0.0)))
            .collect()
    };
    js_divergence(&restrict(domain_a), &restrict(domain_b), smoothing)
}

/// Sample Pearson correlation coefficient.
pub fn pearson_r(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::Argument(format!(
            "{} xs vs {} ys",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::Argument(
            "correlation needs at least two points".into(),
        ));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Numeric(
            "correlation undefined for zero-variance input".into(),
        ));
    }
    Ok(sxy / (sxx.sqrt() * syy.sqrt()))
}

/// Writes the projected vectors of the given tokens in word2vec text
/// format. Every token must be in the vocabulary.
pub fn export_projected<W: Write>(
    params: &BlseParams,
    space: &EmbeddingSpace,
    tokens: &[String],
    side: Side,
    writer: &mut W,
) -> Result<()> {
    let mut projected = Vec::with_capacity(tokens.len());
    for t in tokens {
        let v = space
            .lookup(t)
            .ok_or_else(|| Error::Argument(format!("token {t:?} not in vocabulary")))?;
        projected.push(params.project_side(side, v)?);
    }
    let h = params.h();
    write_word2vec(
        writer,
        h,
        tokens
            .iter()
            .map(|t| t.as_str())
            .zip(projected.iter().map(|v| v.as_slice())),
        tokens.len(),
    )
}
