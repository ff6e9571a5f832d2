//! Flag definitions. Train/sweep flags are all optional at the clap level
//! so a JSON config file can supply them; explicit flags win, and missing
//! required values are reported by name after the merge.

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::error::{Error, Result};

#[derive(Parser, Debug)]
#[command(
    name = "xlsent",
    version,
    about = "Cross-lingual sentiment classification with bilingual embedding projections"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Train a sentence-level or targeted model; writes checkpoint + history CSV.
    Train(TrainArgs),
    /// Label a corpus with a trained checkpoint; writes JSONL predictions.
    Predict(PredictArgs),
    /// Score predictions against gold labels; optional significance test.
    Eval(EvalArgs),
    /// Run an alpha or lexicon-size grid of training runs.
    Sweep(SweepArgs),
    /// Projection baselines: mapping fit, CSLS retrieval, Barista, linear classifier.
    #[command(subcommand)]
    Baseline(BaselineCmd),
    /// Model and corpus analyses.
    #[command(subcommand)]
    Analyze(AnalyzeCmd),
}

/// Train flags; every value can also come from `--config` (JSON object
/// with kebab-case keys mirroring the flag names).
#[derive(Args, Debug, Clone, Default)]
pub struct TrainArgs {
    /// JSON config file; explicit flags override its values.
    #[arg(long)]
    pub config: Option<String>,
    /// Source-language embeddings, word2vec text format.
    #[arg(long)]
    pub src_emb: Option<String>,
    /// Target-language embeddings, word2vec text format.
    #[arg(long)]
    pub trg_emb: Option<String>,
    /// Bilingual lexicon TSV.
    #[arg(long)]
    pub lexicon: Option<String>,
    /// Training corpus JSONL.
    #[arg(long)]
    pub train_corpus: Option<String>,
    /// sentence | split | sent | target-only | context-only | no-mprime | no-proj
    #[arg(long)]
    pub mode: Option<String>,
    /// Sentiment-vs-projection loss weight in [0,1].
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// ADAM learning rate.
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory for model.ckpt and history.csv.
    #[arg(long)]
    pub out: Option<String>,
    /// Comma-separated label names in index order.
    #[arg(long)]
    pub labels: Option<String>,
    /// Fraction of lexicon pairs held out as a development set (0 disables).
    #[arg(long)]
    pub dev_lexicon_fraction: Option<f64>,
    /// Joint space width h; defaults to the source embedding dimension.
    #[arg(long)]
    pub joint_dim: Option<usize>,
    #[arg(long)]
    pub src_dev_corpus: Option<String>,
    #[arg(long)]
    pub trg_dev_corpus: Option<String>,
    /// Evaluate dev macro F1 every this many epochs.
    #[arg(long)]
    pub dev_eval_every: Option<usize>,
    /// Lowercase corpus tokens before lookup.
    #[arg(long)]
    pub lowercase: Option<bool>,
    /// skip | zero
    #[arg(long)]
    pub oov_policy: Option<String>,
    /// uniform | identity
    #[arg(long)]
    pub init: Option<String>,
    /// Keep only the first N source embedding rows (data ablations).
    #[arg(long)]
    pub src_emb_limit: Option<usize>,
    /// Keep only the first N target embedding rows (data ablations).
    #[arg(long)]
    pub trg_emb_limit: Option<usize>,
    /// Keep only the first N training lexicon pairs after the dev split.
    #[arg(long)]
    pub lexicon_limit: Option<usize>,
    /// Drop sentences whose targets carry conflicting labels.
    #[arg(long)]
    pub remove_mixed: Option<bool>,
    /// Drop exact duplicate lexicon pairs before splitting.
    #[arg(long)]
    pub dedup_lexicon: Option<bool>,
    /// Map the loaded 3-/4-class polarity scheme: binary | multiclass.
    #[arg(long)]
    pub map_labels: Option<String>,
}

/// The same field set as [`TrainArgs`], deserialized from the config file.
#[derive(Deserialize, Debug, Default)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct TrainFileConfig {
    pub src_emb: Option<String>,
    pub trg_emb: Option<String>,
    pub lexicon: Option<String>,
    pub train_corpus: Option<String>,
    pub mode: Option<String>,
    pub alpha: Option<f64>,
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub lr: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<String>,
    pub labels: Option<String>,
    pub dev_lexicon_fraction: Option<f64>,
    pub joint_dim: Option<usize>,
    pub src_dev_corpus: Option<String>,
    pub trg_dev_corpus: Option<String>,
    pub dev_eval_every: Option<usize>,
    pub lowercase: Option<bool>,
    pub oov_policy: Option<String>,
    pub init: Option<String>,
    pub src_emb_limit: Option<usize>,
    pub trg_emb_limit: Option<usize>,
    pub lexicon_limit: Option<usize>,
    pub remove_mixed: Option<bool>,
    pub dedup_lexicon: Option<bool>,
    pub map_labels: Option<String>,
}

impl TrainArgs {
    /// Applies the config file underneath explicit flags.
    pub fn merged(&self) -> Result<TrainArgs> {
        let file = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Argument(format!("--config: cannot read {path:?}: {e}")))?;
                serde_json::from_str::<TrainFileConfig>(&text)
                    .map_err(|e| Error::Format(format!("--config {path:?}: {e}")))?
            }
            None => TrainFileConfig::default(),
        };
        macro_rules! pick {
            ($field:ident) => {
                self.$field.clone().or(file.$field)
            };
        }
        Ok(TrainArgs {
            config: None,
            src_emb: pick!(src_emb),
            trg_emb: pick!(trg_emb),
            lexicon: pick!(lexicon),
            train_corpus: pick!(train_corpus),
            mode: pick!(mode),
            alpha: pick!(alpha),
            epochs: pick!(epochs),
            batch_size: pick!(batch_size),
            lr: pick!(lr),
            seed: pick!(seed),
            out: pick!(out),
            labels: pick!(labels),
            dev_lexicon_fraction: pick!(dev_lexicon_fraction),
            joint_dim: pick!(joint_dim),
            src_dev_corpus: pick!(src_dev_corpus),
            trg_dev_corpus: pick!(trg_dev_corpus),
            dev_eval_every: pick!(dev_eval_every),
            lowercase: pick!(lowercase),
            oov_policy: pick!(oov_policy),
            init: pick!(init),
            src_emb_limit: pick!(src_emb_limit),
            trg_emb_limit: pick!(trg_emb_limit),
            lexicon_limit: pick!(lexicon_limit),
            remove_mixed: pick!(remove_mixed),
            dedup_lexicon: pick!(dedup_lexicon),
            map_labels: pick!(map_labels),
        })
    }
}

#[derive(Args, Debug)]
pub struct PredictArgs {
    #[arg(long)]
    pub checkpoint: String,
    /// Embedding space of the side being labeled.
    #[arg(long)]
    pub emb: String,
    #[arg(long)]
    pub corpus: String,
    /// source | target
    #[arg(long)]
    pub side: String,
    #[arg(long, default_value = "negative,positive")]
    pub labels: String,
    #[arg(long)]
    pub out: String,
    #[arg(long, default_value_t = false)]
    pub lowercase: bool,
    #[arg(long, default_value = "skip")]
    pub oov_policy: String,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Gold corpus JSONL.
    #[arg(long)]
    pub gold: String,
    /// Predictions JSONL, one {"label": ...} object per line.
    #[arg(long)]
    pub pred: String,
    #[arg(long, default_value = "negative,positive")]
    pub labels: String,
    /// Second prediction file for the approximate randomization test.
    #[arg(long)]
    pub compare: Option<String>,
    #[arg(long, default_value_t = 10_000)]
    pub rounds: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Report path; stdout when omitted.
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub train: TrainArgs,
    /// Comma-separated alpha values.
    #[arg(long)]
    pub alpha_grid: Option<String>,
    /// Comma-separated training lexicon sizes (0 = no projection term).
    #[arg(long)]
    pub lexicon_grid: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum BaselineCmd {
    /// Fit the least-squares embedding mapping W.
    MapFit(MapFitArgs),
    /// CSLS nearest-neighbor retrieval with hubness correction.
    Csls(CslsArgs),
    /// Generate a pseudo-bilingual corpus by random lexicon substitution.
    Barista(BaristaArgs),
    /// Linear softmax classifier over (projected) averaged embeddings.
    LinearClf(LinearClfArgs),
}

#[derive(Args, Debug)]
pub struct MapFitArgs {
    #[arg(long)]
    pub src_emb: String,
    #[arg(long)]
    pub trg_emb: String,
    #[arg(long)]
    pub lexicon: String,
    #[arg(long)]
    pub out: String,
    /// Project W onto the nearest orthogonal matrix.
    #[arg(long, default_value_t = false)]
    pub orthogonal: bool,
    /// Length-normalize embedding rows before fitting.
    #[arg(long, default_value_t = false)]
    pub normalize: bool,
}

#[derive(Args, Debug)]
pub struct CslsArgs {
    #[arg(long)]
    pub src_emb: String,
    #[arg(long)]
    pub trg_emb: String,
    /// Mapping checkpoint projecting queries into the target space.
    #[arg(long)]
    pub mapping: Option<String>,
    /// Neighborhood size for the density terms.
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    /// Ranks kept per query in the TSV output.
    #[arg(long, default_value_t = 10)]
    pub top: usize,
    /// Query tokens, one per line.
    #[arg(long)]
    pub queries: Option<String>,
    /// Gold lexicon; queries are its source side and P@1 is reported.
    #[arg(long)]
    pub eval_lexicon: Option<String>,
    /// Output TSV: query, rank, candidate, score.
    #[arg(long)]
    pub out: String,
    #[arg(long, default_value_t = true)]
    pub normalize: bool,
}

#[derive(Args, Debug)]
pub struct BaristaArgs {
    #[arg(long)]
    pub src_corpus: String,
    #[arg(long)]
    pub trg_corpus: String,
    #[arg(long)]
    pub lexicon: String,
    /// Replacement probability.
    #[arg(long, default_value_t = 0.5)]
    pub p: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: String,
}

#[derive(Args, Debug)]
pub struct LinearClfArgs {
    #[arg(long)]
    pub src_emb: String,
    #[arg(long)]
    pub trg_emb: String,
    /// Mapping checkpoint applied to source-language features.
    #[arg(long)]
    pub mapping: Option<String>,
    #[arg(long)]
    pub train_corpus: String,
    #[arg(long)]
    pub test_corpus: String,
    #[arg(long, default_value = "negative,positive")]
    pub labels: String,
    #[arg(long, default_value_t = 500)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.05)]
    pub lr: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub l2: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Predictions JSONL.
    #[arg(long)]
    pub out: String,
}

#[derive(Subcommand, Debug)]
pub enum AnalyzeCmd {
    /// Mean projected cosine of translation pairs.
    PairCosine(PairCosineArgs),
    /// Within- vs cross-class projected cosine of polarity word sets.
    Synant(SynantArgs),
    /// POS-trigram + character-trigram language similarity.
    LangSim(LangSimArgs),
    /// Smoothed symmetrized-KL divergence between two corpora.
    DomainDiv(DomainDivArgs),
    /// Export projected vectors in word2vec text format.
    ExportProj(ExportProjArgs),
}

#[derive(Args, Debug)]
pub struct PairCosineArgs {
    /// Model or mapping checkpoint.
    #[arg(long)]
    pub checkpoint: String,
    #[arg(long)]
    pub src_emb: String,
    #[arg(long)]
    pub trg_emb: String,
    #[arg(long)]
    pub lexicon: String,
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Args, Debug)]
pub struct SynantArgs {
    #[arg(long)]
    pub checkpoint: String,
    #[arg(long)]
    pub emb: String,
    /// Positive-polarity tokens, whitespace separated.
    #[arg(long)]
    pub positive: String,
    /// Negative-polarity tokens, whitespace separated.
    #[arg(long)]
    pub negative: String,
    /// source | target
    #[arg(long)]
    pub side: String,
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Args, Debug)]
pub struct LangSimArgs {
    /// POS-tag stream of language A (pre-tagged, whitespace separated).
    #[arg(long)]
    pub pos_a: String,
    /// Raw text of language A for character n-grams.
    #[arg(long)]
    pub text_a: String,
    #[arg(long)]
    pub pos_b: String,
    #[arg(long)]
    pub text_b: String,
    /// Gram order.
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Args, Debug)]
pub struct DomainDivArgs {
    #[arg(long)]
    pub corpus_a: String,
    #[arg(long)]
    pub corpus_b: String,
    /// Per-domain frequency cutoff intersected into the shared vocabulary.
    #[arg(long, default_value_t = 10_000)]
    pub top_n: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub smoothing: f64,
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Args, Debug)]
pub struct ExportProjArgs {
    #[arg(long)]
    pub checkpoint: String,
    #[arg(long)]
    pub emb: String,
    /// Tokens to project, whitespace separated.
    #[arg(long)]
    pub tokens: String,
    /// source | target
    #[arg(long)]
    pub side: String,
    #[arg(long)]
    pub out: String,
}
