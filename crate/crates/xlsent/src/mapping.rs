//! Projection baselines: supervised least-squares embedding mapping,
//! CSLS retrieval with hubness correction, pseudo-bilingual corpus
//! generation, and a regularized linear classifier over projected
//! averaged embeddings.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;

use crate::embeddings::EmbeddingSpace;
use crate::error::{Error, Result};
use crate::lexicon::BilingualLexicon;
use crate::linalg::{
    adam_step, cosine, least_squares_solve, residual_sq, row_vec_mul, stable_softmax, AdamState,
    Matrix,
};

/// A fitted linear embedding mapping `W` with its training residual
/// `‖S'W − T'‖_F²`.
#[derive(Debug, Clone, PartialEq)]
pub struct MappingMatrix {
    pub w: Matrix,
    pub fit_residual: f64,
}

impl MappingMatrix {
    pub fn project(&self, v: &[f64]) -> Result<Vec<f64>> {
        row_vec_mul(v, &self.w)
    }
}

/// Learns `W` minimizing the squared Euclidean distance between mapped
/// lexicon source vectors and their target vectors. Pairs missing from
/// either vocabulary are skipped (and counted); fewer resolvable pairs
/// than source dimensions is an error.
pub fn fit_mapping(
    source: &EmbeddingSpace,
    target: &EmbeddingSpace,
    lexicon: &BilingualLexicon,
) -> Result<(MappingMatrix, usize)> {
    let mut src_rows = Vec::new();
    let mut trg_rows = Vec::new();
    let mut skipped = 0usize;
    for (s, t) in lexicon.pairs() {
        match (source.lookup(s), target.lookup(t)) {
            (Some(sv), Some(tv)) => {
                src_rows.push(sv.to_vec());
                trg_rows.push(tv.to_vec());
            }
            _ => skipped += 1,
        }
    }
    if src_rows.len() < source.dim() {
        return Err(Error::Degenerate(format!(
            "{} resolvable pairs cannot determine a {}-dimensional mapping",
            src_rows.len(),
            source.dim()
        )));
    }
    if skipped > 0 {
        log::warn!("skipped {skipped} unresolvable lexicon pairs while fitting");
    }
    let a = Matrix::from_rows(&src_rows)?;
    let b = Matrix::from_rows(&trg_rows)?;
    let w = least_squares_solve(&a, &b)?;
    let fit_residual = residual_sq(&a, &w, &b)?;
    Ok((MappingMatrix { w, fit_residual }, skipped))
}

/// Replaces `W` with the nearest orthogonal matrix via the polar
/// decomposition `W (WᵀW)^(-1/2)`.
pub fn orthogonalize(mapping: &MappingMatrix) -> Result<MappingMatrix> {
    let w = &mapping.w;
    let wtw = w.transpose().matmul(w)?;
    // Inverse square root through the spectral decomposition: solving the
    // normal-equation system for each basis column of (WᵀW)^(1/2) would be
    // circular, so factor with the same Jacobi routine least squares uses.
    let (eigenvalues, vectors) = crate::linalg::sym_eigen(&wtw)?;
    let mut scaled = vectors.transpose();
    for (i, &l) in eigenvalues.iter().enumerate() {
        if l <= 0.0 {
            return Err(Error::Degenerate(
                "cannot orthogonalize a rank-deficient mapping".into(),
            ));
        }
        let inv_sqrt = 1.0 / l.sqrt();
        for c in 0..scaled.cols() {
            let v = scaled.get(i, c);
            scaled.set(i, c, v * inv_sqrt);
        }
    }
    let inv_root = vectors.matmul(&scaled)?;
    let ortho = w.matmul(&inv_root)?;
    Ok(MappingMatrix {
        w: ortho,
        fit_residual: mapping.fit_residual,
    })
}

/// Mean cosine between `query` and its `k` nearest rows of `candidates`
/// (by cosine). Ties at the neighborhood boundary resolve by row index.
pub fn mean_knn_cosine(query: &[f64], candidates: &Matrix, k: usize) -> Result<f64> {
    if candidates.rows() == 0 {
        return Err(Error::Argument("empty candidate space".into()));
    }
    if k == 0 || k > candidates.rows() {
        return Err(Error::Argument(format!(
            "k = {k} out of range for {} candidates",
            candidates.rows()
        )));
    }
    let mut sims: Vec<(f64, usize)> = (0..candidates.rows())
        .map(|i| cosine(query, candidates.row(i)).map(|c| (c, i)))
        .collect::<Result<_>>()?;
    sims.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    Ok(sims[..k].iter().map(|(c, _)| c).sum::<f64>() / k as f64)
}

/// The cross-domain similarity local scaling score
/// `2·cos(Wx, y) − r_T(Wx) − r_S(y)`.
pub fn csls_score(wx: &[f64], y: &[f64], r_t_of_wx: f64, r_s_of_y: f64) -> Result<f64> {
    Ok(2.0 * cosine(wx, y)? - r_t_of_wx - r_s_of_y)
}

/// Precomputed neighborhood densities for CSLS retrieval.
#[derive(Debug, Clone)]
pub struct CslsIndex {
    pub k: usize,
    /// Per query: mean cosine to its k nearest target rows.
    pub r_source: Vec<f64>,
    /// Per target row: mean cosine to its k nearest queries.
    pub r_target: Vec<f64>,
}

impl CslsIndex {
    /// Builds the density terms for a query set against a candidate space.
    pub fn build(queries: &Matrix, candidates: &Matrix, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Argument("k must be >= 1".into()));
        }
        if k > candidates.rows() || k > queries.rows() {
            return Err(Error::Argument(format!(
                "k = {k} exceeds {} queries or {} candidates",
                queries.rows(),
                candidates.rows()
            )));
        }
        let r_source = (0..queries.rows())
            .map(|i| mean_knn_cosine(queries.row(i), candidates, k))
            .collect::<Result<Vec<_>>>()?;
        let r_target = (0..candidates.rows())
            .map(|i| mean_knn_cosine(candidates.row(i), queries, k))
            .collect::<Result<Vec<_>>>()?;
        Ok(CslsIndex {
            k,
            r_source,
            r_target,
        })
    }
}

/// One retrieval result: candidate row index and its CSLS score.
pub type Ranking = Vec<(usize, f64)>;

/// Ranks every candidate for every query by CSLS score (descending),
/// breaking ties by candidate index. `top` truncates each ranking.
pub fn csls_retrieve(
    queries: &Matrix,
    candidates: &Matrix,
    k: usize,
    top: Option<usize>,
) -> Result<Vec<Ranking>> {
    let index = CslsIndex::build(queries, candidates, k)?;
    let mut out = Vec::with_capacity(queries.rows());
    for q in 0..queries.rows() {
        let query = queries.row(q);
        let mut scored: Vec<(usize, f64)> = (0..candidates.rows())
            .map(|c| {
                csls_score(
                    query,
                    candidates.row(c),
                    index.r_source[q],
                    index.r_target[c],
                )
                .map(|s| (c, s))
            })
            .collect::<Result<_>>()?;
        scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        if let Some(n) = top {
            scored.truncate(n);
        }
        out.push(scored);
    }
    Ok(out)
}

/// Fraction of queries whose rank-1 candidate matches `gold`.
pub fn precision_at_one(rankings: &[Ranking], gold: &[usize]) -> Result<f64> {
    if rankings.len() != gold.len() {
        return Err(Error::Argument("one gold index per query required".into()));
    }
    if rankings.is_empty() {
        return Err(Error::Argument("no rankings to score".into()));
    }
    let hits = rankings
        .iter()
        .zip(gold)
        .filter(|(r, &g)| r.first().is_some_and(|(c, _)| *c == g))
        .count();
    Ok(hits as f64 / rankings.len() as f64)
}

/// Concatenates the two corpora and independently replaces each
/// lexicon-covered token with its translation with probability `p`
/// (source lines use source→target, target lines target→source).
/// Token count is conserved; deterministic under `seed`.
pub fn barista_corpus(
    source_lines: &[String],
    target_lines: &[String],
    lexicon: &BilingualLexicon,
    p: f64,
    seed: u64,
) -> Result<Vec<String>> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Argument(format!(
            "replacement probability must lie in [0,1], got {p}"
        )));
    }
    let mut fwd: HashMap<&str, &str> = HashMap::new();
    let mut bwd: HashMap<&str, &str> = HashMap::new();
    for (s, t) in lexicon.pairs() {
        fwd.entry(s.as_str()).or_insert(t.as_str());
        bwd.entry(t.as_str()).or_insert(s.as_str());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(source_lines.len() + target_lines.len());
    let mut rewrite = |line: &String, table: &HashMap<&str, &str>| {
        let tokens: Vec<&str> = line
            .split_whitespace()
            .map(|tok| match table.get(tok) {
                Some(&replacement) if rng.random::<f64>() < p => replacement,
                _ => tok,
            })
            .collect();
        tokens.join(" ")
    };
    for line in source_lines {
        out.push(rewrite(line, &fwd));
    }
    for line in target_lines {
        out.push(rewrite(line, &bwd));
    }
    Ok(out)
}

/// Multinomial logistic-regression model: weights include a bias row.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    /// `(dim + 1) × classes`; the last row is the bias.
    pub weights: Matrix,
    pub classes: usize,
}

/// Configuration for [`linear_classifier_fit`].
#[derive(Debug, Clone)]
pub struct LinearClfConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub l2: f64,
    pub seed: u64,
}

impl Default for LinearClfConfig {
    fn default() -> Self {
        LinearClfConfig {
            epochs: 500,
            learning_rate: 0.05,
            l2: 1e-4,
            seed: 1,
        }
    }
}

/// Fits an L2-regularized softmax classifier with full-batch ADAM from a
/// zero initialization, so identical inputs give identical models.
pub fn linear_classifier_fit(
    features: &[Vec<f64>],
    labels: &[usize],
    classes: usize,
    config: &LinearClfConfig,
) -> Result<LinearModel> {
    if features.len() != labels.len() {
        return Err(Error::Argument(format!(
            "{} feature rows vs {} labels",
            features.len(),
            labels.len()
        )));
    }
    if features.is_empty() {
        return Err(Error::Argument("empty training set".into()));
    }
    let dim = features[0].len();
    if features.iter().any(|f| f.len() != dim) {
        return Err(Error::Size("inconsistent feature dimensions".into()));
    }
    let mut seen = vec![false; classes];
    for &l in labels {
        if l >= classes {
            return Err(Error::Argument(format!(
                "label {l} outside {classes} classes"
            )));
        }
        seen[l] = true;
    }
    if seen.iter().filter(|&&s| s).count() < 2 {
        return Err(Error::Argument(
            "training set must contain at least two classes".into(),
        ));
    }

    let n = features.len() as f64;
    let mut weights = Matrix::zeros(dim + 1, classes);
    let mut state = AdamState::new(dim + 1, classes, config.learning_rate);
    for _ in 0..config.epochs {
        let mut grad = Matrix::zeros(dim + 1, classes);
        for (f, &label) in features.iter().zip(labels) {
            let logits: Vec<f64> = (0..classes)
                .map(|c| {
                    (0..dim).map(|j| f[j] * weights.get(j, c)).sum::<f64>() + weights.get(dim, c)
                })
                .collect();
            let mut delta = stable_softmax(&logits)?;
            delta[label] -= 1.0;
            for (j, &fj) in f.iter().enumerate() {
                if fj == 0.0 {
                    continue;
                }
                for (c, &dc) in delta.iter().enumerate() {
                    let g = grad.get(j, c);
                    grad.set(j, c, g + fj * dc / n);
                }
            }
            for (c, &dc) in delta.iter().enumerate() {
                let g = grad.get(dim, c);
                grad.set(dim, c, g + dc / n);
            }
        }
        // L2 penalty on the weights, not the bias.
        if config.l2 > 0.0 {
            for j in 0..dim {
                for c in 0..classes {
                    let g = grad.get(j, c);
                    grad.set(j, c, g + 2.0 * config.l2 * weights.get(j, c));
                }
            }
        }
        adam_step(&mut weights, &grad, &mut state)?;
    }
    Ok(LinearModel { weights, classes })
}

/// Argmax class for one feature vector.
pub fn linear_classifier_predict(model: &LinearModel, feature: &[f64]) -> Result<usize> {
    let dim = model.weights.rows() - 1;
    if feature.len() != dim {
        return Err(Error::Size(format!(
            "feature of length {} against model dimension {dim}",
            feature.len()
        )));
    }
    let logits: Vec<f64> = (0..model.classes)
        .map(|c| {
            (0..dim)
                .map(|j| feature[j] * model.weights.get(j, c))
                .sum::<f64>()
                + model.weights.get(dim, c)
        })
        .collect();
    Ok(crate::blse::argmax(&logits))
}
