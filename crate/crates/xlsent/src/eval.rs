//! Classification metrics and the paired approximate randomization test.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Per-class precision, recall and F1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

/// Confusion matrix (rows gold, columns predicted), per-class scores and
/// macro F1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub macro_f1: f64,
    /// Keyed by class index rendered as a string so reports with named
    /// schemas stay mergeable.
    pub per_class: BTreeMap<String, ClassScores>,
    pub confusion: Vec<Vec<usize>>,
}

/// Computes the confusion matrix and macro F1 of predictions against gold
/// labels over `o` classes. A class with zero predicted and zero gold
/// count scores F1 = 0 and still enters the unweighted macro average.
pub fn evaluate(gold: &[usize], pred: &[usize], o: usize) -> Result<EvalReport> {
    if gold.len() != pred.len() {
        return Err(Error::Argument(format!(
            "{} gold labels vs {} predictions",
            gold.len(),
            pred.len()
        )));
    }
    if gold.is_empty() {
        return Err(Error::Argument("cannot evaluate zero instances".into()));
    }
    if o < 1 {
        return Err(Error::Argument("need at least one class".into()));
    }
    let mut confusion = vec![vec![0usize; o]; o];
    for (&g, &p) in gold.iter().zip(pred) {
        if g >= o || p >= o {
            return Err(Error::Argument(format!(
                "label outside the {o}-class space: gold {g}, pred {p}"
            )));
        }
        confusion[g][p] += 1;
    }
    let mut per_class = BTreeMap::new();
    let mut f1_sum = 0.0;
    #[allow(clippy::needless_range_loop)]
    for c in 0..o {
        let tp = confusion[c][c];
        let gold_count: usize = confusion[c].iter().sum();
        let pred_count: usize = (0..o).map(|g| confusion[g][c]).sum();
        let precision = if pred_count == 0 {
            0.0
        } else {
            tp as f64 / pred_count as f64
        };
        let recall = if gold_count == 0 {
            0.0
        } else {
            tp as f64 / gold_count as f64
        };
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        f1_sum += f1;
        per_class.insert(
            c.to_string(),
            ClassScores {
                precision,
                recall,
                f1,
                support: gold_count,
            },
        );
    }
    Ok(EvalReport {
        macro_f1: f1_sum / o as f64,
        per_class,
        confusion,
    })
}

/// Macro F1 alone, for callers that do not need the full report.
pub fn macro_f1(gold: &[usize], pred: &[usize], o: usize) -> Result<f64> {
    evaluate(gold, pred, o).map(|r| r.macro_f1)
}

/// Paired approximate randomization test on the absolute macro F1
/// difference. Each round swaps the two systems' predictions per instance
/// with probability one half; the p-value is
/// `(rounds with statistic >= observed + 1) / (rounds + 1)`, deterministic
/// under `seed`.
pub fn approx_randomization(
    gold: &[usize],
    pred_a: &[usize],
    pred_b: &[usize],
    o: usize,
    rounds: usize,
    seed: u64,
) -> Result<f64> {
    if gold.len() != pred_a.len() || gold.len() != pred_b.len() {
        return Err(Error::Argument(format!(
            "prediction lengths {} and {} must match {} gold labels",
            pred_a.len(),
            pred_b.len(),
            gold.len()
        )));
    }
    if rounds == 0 {
        return Err(Error::Argument(
            "need at least one randomization round".into(),
        ));
    }
    let observed = (macro_f1(gold, pred_a, o)? - macro_f1(gold, pred_b, o)?).abs();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = gold.len();
    let mut swapped_a = vec![0usize; n];
    let mut swapped_b = vec![0usize; n];
    let mut at_least = 0usize;
    for _ in 0..rounds {
        for i in 0..n {
            if rng.random::<bool>() {
                swapped_a[i] = pred_b[i];
                swapped_b[i] = pred_a[i];
            } else {
                swapped_a[i] = pred_a[i];
                swapped_b[i] = pred_b[i];
            }
        }
        let stat = (macro_f1(gold, &swapped_a, o)? - macro_f1(gold, &swapped_b, o)?).abs();
        if stat >= observed - 1e-12 {
            at_least += 1;
        }
    }
    Ok((at_least + 1) as f64 / (rounds + 1) as f64)
}

/// Exact randomization p-value enumerating all `2^n` swap patterns; the
/// oracle for the Monte Carlo test, usable only for small `n`.
pub fn exact_randomization(
    gold: &[usize],
    pred_a: &[usize],
    pred_b: &[usize],
    o: usize,
) -> Result<f64> {
    let n = gold.len();
    if n > 20 {
        return Err(Error::Argument(format!(
            "exact enumeration over 2^{n} patterns is not tractable"
        )));
    }
    if gold.len() != pred_a.len() || gold.len() != pred_b.len() {
        return Err(Error::Argument("length mismatch".into()));
    }
    let observed = (macro_f1(gold, pred_a, o)? - macro_f1(gold, pred_b, o)?).abs();
    let mut swapped_a = vec![0usize; n];
    let mut swapped_b = vec![0usize; n];
    let total = 1usize << n;
    let mut at_least = 0usize;
    for mask in 0..total {
        for i in 0..n {
            if mask >> i & 1 == 1 {
                swapped_a[i] = pred_b[i];
                swapped_b[i] = pred_a[i];
            } else {
                swapped_a[i] = pred_a[i];
                swapped_b[i] = pred_b[i];
            }
        }
        let stat = (macro_f1(gold, &swapped_a, o)? - macro_f1(gold, &swapped_b, o)?).abs();
        if stat >= observed - 1e-12 {
            at_least += 1;
        }
    }
    Ok(at_least as f64 / total as f64)
}
