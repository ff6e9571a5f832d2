//! Command-line front end. Every subcommand validates its inputs first
//! (exit 1 on bad flags, missing files or malformed input data), then
//! runs (exit 2 on runtime failure). Outputs are written atomically via
//! a temp file and rename, and all randomness flows from `--seed`.

mod args;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::analysis;
use crate::blse::{self, BlseParams, InitMode, Side, Spaces, TrainConfig, TrainData, TrainHistory};
use crate::checkpoint::{self, Checkpoint};
use crate::corpus::{load_corpus, map_labels, Corpus, LabelMode, LabelSchema, LoadOptions};
use crate::embeddings::{EmbeddingSpace, OovPolicy};
use crate::error::{Error, Result};
use crate::eval::{self, ClassScores};
use crate::lexicon::BilingualLexicon;
use crate::linalg::Matrix;
use crate::mapping::{self, LinearClfConfig};
use crate::targeted::{self, TargetedParams, Variant};

pub use args::{
    AnalyzeCmd, BaselineCmd, Cli, Command, EvalArgs, PredictArgs, SweepArgs, TrainArgs,
};

/// Runs the parsed command line; returns the process exit code.
pub fn run(cli: Cli) -> u8 {
    let result = match cli.command {
        Command::Train(args) => cmd_train(args),
        Command::Predict(args) => cmd_predict(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Baseline(cmd) => cmd_baseline(cmd),
        Command::Analyze(cmd) => cmd_analyze(cmd),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("xlsent: {err}");
            if err.is_validation() {
                1
            } else {
                2
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Shared helpers.

fn existing_path(path: &str, flag: &str) -> Result<PathBuf> {
    let p = PathBuf::from(path);
    if !p.exists() {
        return Err(Error::Argument(format!(
            "{flag}: file {path:?} does not exist"
        )));
    }
    Ok(p)
}

fn open_reader(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path)?))
}

/// Writes through a temp file in the destination directory, then renames.
fn write_atomic(
    path: &Path,
    write: impl FnOnce(&mut std::io::BufWriter<File>) -> Result<()>,
) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let tmp = path.with_extension(format!(
        "{}.tmp{}",
        path.extension().and_then(|e| e.to_str()).unwrap_or(""),
        std::process::id()
    ));
    {
        let mut file = std::io::BufWriter::new(File::create(&tmp)?);
        write(&mut file)?;
        file.flush()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn parse_labels(spec: &str) -> Result<LabelSchema> {
    let names: Vec<String> = spec
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    LabelSchema::new(names)
}

fn parse_side(s: &str) -> Result<Side> {
    match s {
        "source" => Ok(Side::Source),
        "target" => Ok(Side::Target),
        other => Err(Error::Argument(format!(
            "--side must be source or target, got {other:?}"
        ))),
    }
}

fn parse_oov(s: &str) -> Result<OovPolicy> {
    match s {
        "skip" => Ok(OovPolicy::Skip),
        "zero" => Ok(OovPolicy::Zero),
        other => Err(Error::Argument(format!(
            "--oov-policy must be skip or zero, got {other:?}"
        ))),
    }
}

fn load_space(path: &Path, limit: Option<usize>, normalize: bool) -> Result<EmbeddingSpace> {
    let space = EmbeddingSpace::load_text(open_reader(path)?, limit)?;
    Ok(if normalize {
        space.normalize_rows()
    } else {
        space
    })
}

fn emit_json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let json = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Format(format!("cannot serialize report: {e}")))?;
    match out {
        Some(path) => write_atomic(path, |w| {
            writeln!(w, "{json}")?;
            Ok(())
        }),
        None => {
            println!("{json}");
            Ok(())
        }
    }
}

// ---------------------------------------------------------------------------
// train

#[derive(Debug, Clone)]
struct TrainSpec {
    src_emb: PathBuf,
    trg_emb: PathBuf,
    lexicon: PathBuf,
    train_corpus: PathBuf,
    mode: String,
    alpha: f64,
    epochs: usize,
    batch_size: usize,
    lr: f64,
    seed: u64,
    out: PathBuf,
    labels: LabelSchema,
    dev_lexicon_fraction: f64,
    joint_dim: Option<usize>,
    src_dev_corpus: Option<PathBuf>,
    trg_dev_corpus: Option<PathBuf>,
    dev_eval_every: usize,
    lowercase: bool,
    oov_policy: OovPolicy,
    init: InitMode,
    src_emb_limit: Option<usize>,
    trg_emb_limit: Option<usize>,
    lexicon_limit: Option<usize>,
    remove_mixed: bool,
    dedup_lexicon: bool,
    map_labels: Option<LabelMode>,
}

const TRAIN_MODES: &[&str] = &[
    "sentence",
    "split",
    "sent",
    "target-only",
    "context-only",
    "no-mprime",
    "no-proj",
];

fn validate_train(args: &TrainArgs) -> Result<TrainSpec> {
    let merged = args.merged()?;
    macro_rules! req {
        ($field:ident, $flag:literal) => {
            merged
                .$field
                .clone()
                .ok_or_else(|| Error::Argument(format!("missing required flag {}", $flag)))?
        };
    }
    let mode = req!(mode, "--mode");
    if !TRAIN_MODES.contains(&mode.as_str()) {
        return Err(Error::Argument(format!(
            "--mode must be one of {TRAIN_MODES:?}, got {mode:?}"
        )));
    }
    let alpha = req!(alpha, "--alpha");
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Argument(format!(
            "--alpha must lie in [0,1], got {alpha}"
        )));
    }
    let epochs = req!(epochs, "--epochs");
    let batch_size = req!(batch_size, "--batch-size");
    if epochs == 0 || batch_size == 0 {
        return Err(Error::Argument(
            "--epochs and --batch-size must be >= 1".into(),
        ));
    }
    let lr = req!(lr, "--lr");
    if lr <= 0.0 {
        return Err(Error::Argument(format!("--lr must be positive, got {lr}")));
    }
    let dev_lexicon_fraction = merged.dev_lexicon_fraction.unwrap_or(0.1);
    if !(0.0..1.0).contains(&dev_lexicon_fraction) {
        return Err(Error::Argument(format!(
            "--dev-lexicon-fraction must lie in [0,1), got {dev_lexicon_fraction}"
        )));
    }
    let labels = parse_labels(merged.labels.as_deref().unwrap_or("negative,positive"))?;
    let init = match merged.init.as_deref().unwrap_or("uniform") {
        "uniform" => InitMode::Uniform,
        "identity" => InitMode::Identity,
        other => {
            return Err(Error::Argument(format!(
                "--init must be uniform or identity, got {other:?}"
            )))
        }
    };
    Ok(TrainSpec {
        src_emb: existing_path(&req!(src_emb, "--src-emb"), "--src-emb")?,
        trg_emb: existing_path(&req!(trg_emb, "--trg-emb"), "--trg-emb")?,
        lexicon: existing_path(&req!(lexicon, "--lexicon"), "--lexicon")?,
        train_corpus: existing_path(&req!(train_corpus, "--train-corpus"), "--train-corpus")?,
        mode,
        alpha,
        epochs,
        batch_size,
        lr,
        seed: req!(seed, "--seed"),
        out: PathBuf::from(req!(out, "--out")),
        labels,
        dev_lexicon_fraction,
        joint_dim: merged.joint_dim,
        src_dev_corpus: merged
            .src_dev_corpus
            .as_deref()
            .map(|p| existing_path(p, "--src-dev-corpus"))
            .transpose()?,
        trg_dev_corpus: merged
            .trg_dev_corpus
            .as_deref()
            .map(|p| existing_path(p, "--trg-dev-corpus"))
            .transpose()?,
        dev_eval_every: merged.dev_eval_every.unwrap_or(1),
        lowercase: merged.lowercase.unwrap_or(false),
        oov_policy: parse_oov(merged.oov_policy.as_deref().unwrap_or("skip"))?,
        init,
        src_emb_limit: merged.src_emb_limit,
        trg_emb_limit: merged.trg_emb_limit,
        lexicon_limit: merged.lexicon_limit,
        remove_mixed: merged.remove_mixed.unwrap_or(false),
        dedup_lexicon: merged.dedup_lexicon.unwrap_or(false),
        map_labels: match merged.map_labels.as_deref() {
            None => None,
            Some("binary") => Some(LabelMode::Binary),
            Some("multiclass") => Some(LabelMode::Multiclass),
            Some(other) => {
                return Err(Error::Argument(format!(
                    "--map-labels must be binary or multiclass, got {other:?}"
                )))
            }
        },
    })
}

struct TrainOutcome {
    history: TrainHistory,
}

fn execute_train(spec: &TrainSpec) -> Result<TrainOutcome> {
    let source = load_space(&spec.src_emb, spec.src_emb_limit, false)?;
    let target = load_space(&spec.trg_emb, spec.trg_emb_limit, false)?;
    let mut full_lexicon = BilingualLexicon::load_tsv("lexicon", open_reader(&spec.lexicon)?)?;
    if spec.dedup_lexicon {
        full_lexicon = full_lexicon.dedup();
    }
    let (train_lex, dev_lex) = if spec.dev_lexicon_fraction > 0.0 {
        let (t, d) = full_lexicon.split_dev(spec.dev_lexicon_fraction, spec.seed)?;
        (t, Some(d))
    } else {
        (full_lexicon, None)
    };
    let train_lex = match spec.lexicon_limit {
        Some(n) => train_lex.truncate(n),
        None => train_lex,
    };
    let load_opts = LoadOptions {
        remove_mixed: spec.remove_mixed,
        lowercase: spec.lowercase,
    };
    let load_mapped = |path: &Path| -> Result<Corpus> {
        let corpus = load_corpus(open_reader(path)?, &spec.labels, load_opts)?;
        match spec.map_labels {
            Some(mode) => map_labels(&corpus, mode),
            None => Ok(corpus),
        }
    };
    let corpus = load_mapped(&spec.train_corpus)?;
    let dev_source = spec
        .src_dev_corpus
        .as_deref()
        .map(load_mapped)
        .transpose()?;
    let dev_target = spec
        .trg_dev_corpus
        .as_deref()
        .map(load_mapped)
        .transpose()?;

    let config = TrainConfig {
        alpha: spec.alpha,
        epochs: spec.epochs,
        batch_size: spec.batch_size,
        learning_rate: spec.lr,
        seed: spec.seed,
        dev_eval_every: spec.dev_eval_every,
        joint_dim: spec.joint_dim,
        init: spec.init,
        oov_policy: spec.oov_policy,
    };
    let spaces = Spaces {
        source: &source,
        target: &target,
    };
    let lexicon_train = if train_lex.is_empty() {
        None
    } else {
        Some(&train_lex)
    };
    let data = TrainData {
        corpus: &corpus,
        lexicon_train,
        lexicon_dev: dev_lex.as_ref(),
        dev_source: dev_source.as_ref(),
        dev_target: dev_target.as_ref(),
    };

    enum Trained {
        Sentence(BlseParams),
        Targeted(TargetedParams),
    }
    let (trained, history) = match spec.mode.as_str() {
        "sentence" => {
            let (p, h) = blse::train(&config, spaces, data)?;
            (Trained::Sentence(p), h)
        }
        "no-mprime" => {
            let (p, h) = blse::train_no_mprime(&config, spaces, data)?;
            (Trained::Sentence(p), h)
        }
        "no-proj" => {
            let (p, h) = blse::train_no_projection(&config, spaces, data)?;
            (Trained::Sentence(p), h)
        }
        mode => {
            let variant = match mode {
                "split" => Variant::Split,
                "sent" => Variant::Sent,
                "target-only" => Variant::TargetOnly,
                "context-only" => Variant::ContextOnly,
                other => unreachable!("mode {other} checked during validation"),
            };
            let (p, h) = targeted::train_targeted(&config, spaces, data, variant)?;
            (Trained::Targeted(p), h)
        }
    };

    write_atomic(&spec.out.join("model.ckpt"), |w| match &trained {
        Trained::Sentence(p) => checkpoint::save_params(w, p),
        Trained::Targeted(p) => checkpoint::save_targeted(w, p),
    })?;
    write_atomic(&spec.out.join("history.csv"), |w| history.write_csv(w))?;
    Ok(TrainOutcome { history })
}

fn cmd_train(args: TrainArgs) -> Result<u8> {
    let spec = validate_train(&args)?;
    let outcome = execute_train(&spec)?;
    if let Some(last) = outcome.history.last() {
        log::info!(
            "trained {} epochs, final J = {}",
            last.epoch,
            last.joint_loss
        );
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// predict

#[derive(Serialize)]
struct PredictionLine<'a> {
    label: &'a str,
}

fn cmd_predict(args: PredictArgs) -> Result<u8> {
    let checkpoint_path = existing_path(&args.checkpoint, "--checkpoint")?;
    let emb_path = existing_path(&args.emb, "--emb")?;
    let corpus_path = existing_path(&args.corpus, "--corpus")?;
    let side = parse_side(&args.side)?;
    let labels = parse_labels(&args.labels)?;
    let policy = parse_oov(&args.oov_policy)?;
    let out = PathBuf::from(&args.out);

    let ckpt = checkpoint::load_checkpoint(open_reader(&checkpoint_path)?)?;
    let space = load_space(&emb_path, None, false)?;
    let corpus = load_corpus(
        open_reader(&corpus_path)?,
        &labels,
        LoadOptions {
            remove_mixed: false,
            lowercase: args.lowercase,
        },
    )?;
    let o = labels.arity();

    let predictions: Vec<usize> = match &ckpt {
        Checkpoint::Sentence(params) => {
            if params.o() != o {
                return Err(Error::Argument(format!(
                    "checkpoint has {} classes but --labels names {o}",
                    params.o()
                )));
            }
            corpus
                .instances
                .iter()
                .map(|inst| blse::predict(params, &space, &inst.tokens, side, policy))
                .collect::<Result<_>>()?
        }
        Checkpoint::Targeted(params) => {
            if params.o() != o {
                return Err(Error::Argument(format!(
                    "checkpoint has {} classes but --labels names {o}",
                    params.o()
                )));
            }
            if params.variant == Variant::Sent {
                targeted::sent_baseline(&params.base, &space, &corpus.instances, side, policy)?
            } else {
                corpus
                    .instances
                    .iter()
                    .map(|inst| targeted::predict_targeted(params, &space, inst, side, policy))
                    .collect::<Result<_>>()?
            }
        }
        Checkpoint::Mapping(_) => {
            return Err(Error::Argument(
                "mapping checkpoints carry no classifier; use `baseline linear-clf`".into(),
            ))
        }
    };

    write_atomic(&out, |w| {
        for &p in &predictions {
            let line = serde_json::to_string(&PredictionLine {
                label: labels.name(p),
            })
            .map_err(|e| Error::Format(e.to_string()))?;
            writeln!(w, "{line}")?;
        }
        Ok(())
    })?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// eval

#[derive(Serialize)]
struct CliEvalReport {
    macro_f1: f64,
    per_class: BTreeMap<String, ClassScores>,
    confusion: Vec<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    compare_macro_f1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    p_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rounds: Option<usize>,
}

fn read_predictions(path: &Path, labels: &LabelSchema) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for (lineno, line) in open_reader(path)?.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value = serde_json::from_str(&line)
            .map_err(|e| Error::format_at(lineno + 1, format!("invalid JSON: {e}")))?;
        let name = value
            .get("label")
            .and_then(|v| v.as_str())
            .ok_or_else(|| Error::format_at(lineno + 1, "missing \"label\" field"))?;
        let index = labels
            .index_of(name)
            .ok_or_else(|| Error::format_at(lineno + 1, format!("unknown label {name:?}")))?;
        out.push(index);
    }
    Ok(out)
}

fn cmd_eval(args: EvalArgs) -> Result<u8> {
    let gold_path = existing_path(&args.gold, "--gold")?;
    let pred_path = existing_path(&args.pred, "--pred")?;
    let labels = parse_labels(&args.labels)?;
    let compare_path = args
        .compare
        .as_deref()
        .map(|p| existing_path(p, "--compare"))
        .transpose()?;
    if args.rounds == 0 {
        return Err(Error::Argument("--rounds must be >= 1".into()));
    }

    let gold_corpus = load_corpus(open_reader(&gold_path)?, &labels, LoadOptions::default())?;
    let gold = gold_corpus.gold_labels();
    let pred = read_predictions(&pred_path, &labels)?;
    if gold.len() != pred.len() {
        return Err(Error::Argument(format!(
            "gold has {} instances but predictions have {} lines",
            gold.len(),
            pred.len()
        )));
    }
    let o = labels.arity();
    let report = eval::evaluate(&gold, &pred, o)?;

    let (compare_macro_f1, p_value, rounds) = match compare_path {
        Some(path) => {
            let pred_b = read_predictions(&path, &labels)?;
            if pred_b.len() != gold.len() {
                return Err(Error::Argument(format!(
                    "--compare has {} lines but gold has {}",
                    pred_b.len(),
                    gold.len()
                )));
            }
            let p = eval::approx_randomization(&gold, &pred, &pred_b, o, args.rounds, args.seed)?;
            let b_f1 = eval::macro_f1(&gold, &pred_b, o)?;
            (Some(b_f1), Some(p), Some(args.rounds))
        }
        None => (None, None, None),
    };

    let per_class = report
        .per_class
        .iter()
        .map(|(k, v)| {
            let name = k
                .parse::<usize>()
                .ok()
                .map(|i| labels.name(i).to_string())
                .unwrap_or_else(|| k.clone());
            (name, *v)
        })
        .collect();
    let cli_report = CliEvalReport {
        macro_f1: report.macro_f1,
        per_class,
        confusion: report.confusion,
        compare_macro_f1,
        p_value,
        rounds,
    };
    emit_json(&cli_report, args.out.as_deref().map(Path::new))?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// sweep

fn parse_grid<T: std::str::FromStr>(spec: &str, flag: &str) -> Result<Vec<T>> {
    let values: Vec<T> = spec
        .split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<T>()
                .map_err(|_| Error::Argument(format!("{flag}: cannot parse {s:?}")))
        })
        .collect::<Result<_>>()?;
    if values.is_empty() {
        return Err(Error::Argument(format!("{flag}: empty grid")));
    }
    Ok(values)
}

#[derive(Clone)]
enum SweepPoint {
    Alpha(f64),
    LexiconSize(usize),
}

impl SweepPoint {
    fn dir_name(&self) -> String {
        match self {
            SweepPoint::Alpha(a) => format!("alpha_{a}"),
            SweepPoint::LexiconSize(n) => format!("lexicon_{n}"),
        }
    }
}

fn cmd_sweep(args: SweepArgs) -> Result<u8> {
    let base = validate_train(&args.train)?;
    let points: Vec<SweepPoint> = match (&args.alpha_grid, &args.lexicon_grid) {
        (Some(_), Some(_)) => {
            return Err(Error::Argument(
                "--alpha-grid and --lexicon-grid are mutually exclusive".into(),
            ))
        }
        (Some(spec), None) => {
            let values: Vec<f64> = parse_grid(spec, "--alpha-grid")?;
            if let Some(bad) = values.iter().find(|a| !(0.0..=1.0).contains(*a)) {
                return Err(Error::Argument(format!(
                    "--alpha-grid value {bad} outside [0,1]"
                )));
            }
            values.into_iter().map(SweepPoint::Alpha).collect()
        }
        (None, Some(spec)) => parse_grid::<usize>(spec, "--lexicon-grid")?
            .into_iter()
            .map(SweepPoint::LexiconSize)
            .collect(),
        (None, None) => {
            return Err(Error::Argument(
                "sweep needs --alpha-grid or --lexicon-grid".into(),
            ))
        }
    };

    let specs: Vec<TrainSpec> = points
        .iter()
        .map(|p| {
            let mut spec = base.clone();
            spec.out = base.out.join(p.dir_name());
            match p {
                SweepPoint::Alpha(a) => spec.alpha = *a,
                SweepPoint::LexiconSize(n) => spec.lexicon_limit = Some(*n),
            }
            spec
        })
        .collect();

    // Points are independent; run them on worker threads and keep the
    // summary in grid order.
    let results: Vec<Result<TrainOutcome>> = std::thread::scope(|scope| {
        let handles: Vec<_> = specs
            .iter()
            .map(|spec| scope.spawn(move || execute_train(spec)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker must not panic"))
            .collect()
    });

    let mut any_failed = false;
    write_atomic(&base.out.join("summary.csv"), |w| {
        writeln!(
            w,
            "point,alpha,lexicon_size,H,MSE,J,dev_pair_cosine,src_f1,tgt_f1,status"
        )?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for (point, (spec, result)) in points.iter().zip(specs.iter().zip(&results)) {
            let lexicon_size = spec
                .lexicon_limit
                .map(|n| n.to_string())
                .unwrap_or_default();
            match result {
                Ok(outcome) => {
                    let last = outcome.history.last().expect("epochs >= 1");
                    writeln!(
                        w,
                        "{},{},{},{},{},{},{},{},{},ok",
                        point.dir_name(),
                        spec.alpha,
                        lexicon_size,
                        last.sentiment_loss,
                        opt(last.projection_loss),
                        last.joint_loss,
                        opt(last.dev_pair_cosine),
                        opt(last.src_f1),
                        opt(last.tgt_f1),
                    )?;
                }
                Err(err) => {
                    any_failed = true;
                    let msg = err.to_string().replace([',', '\n'], ";");
                    writeln!(
                        w,
                        "{},{},{},,,,,,,error: {}",
                        point.dir_name(),
                        spec.alpha,
                        lexicon_size,
                        msg
                    )?;
                }
            }
        }
        Ok(())
    })?;
    Ok(if any_failed { 2 } else { 0 })
}

// ---------------------------------------------------------------------------
// baseline

fn cmd_baseline(cmd: BaselineCmd) -> Result<u8> {
    match cmd {
        BaselineCmd::MapFit(args) => {
            let src = load_space(
                &existing_path(&args.src_emb, "--src-emb")?,
                None,
                args.normalize,
            )?;
            let trg = load_space(
                &existing_path(&args.trg_emb, "--trg-emb")?,
                None,
                args.normalize,
            )?;
            let lex = BilingualLexicon::load_tsv(
                "lexicon",
                open_reader(&existing_path(&args.lexicon, "--lexicon")?)?,
            )?;
            let (mut mapping, skipped) = mapping::fit_mapping(&src, &trg, &lex)?;
            if args.orthogonal {
                mapping = mapping::orthogonalize(&mapping)?;
            }
            write_atomic(Path::new(&args.out), |w| {
                checkpoint::save_mapping(w, &mapping)
            })?;
            #[derive(Serialize)]
            struct FitSummary {
                residual: f64,
                skipped_pairs: usize,
                orthogonalized: bool,
            }
            emit_json(
                &FitSummary {
                    residual: mapping.fit_residual,
                    skipped_pairs: skipped,
                    orthogonalized: args.orthogonal,
                },
                None,
            )?;
            Ok(0)
        }
        BaselineCmd::Csls(args) => cmd_csls(args),
        BaselineCmd::Barista(args) => {
            if !(0.0..=1.0).contains(&args.p) {
                return Err(Error::Argument(format!(
                    "--p must lie in [0,1], got {}",
                    args.p
                )));
            }
            let read_lines = |path: &str, flag: &str| -> Result<Vec<String>> {
                open_reader(&existing_path(path, flag)?)?
                    .lines()
                    .map(|l| l.map_err(Error::from))
                    .collect()
            };
            let src = read_lines(&args.src_corpus, "--src-corpus")?;
            let trg = read_lines(&args.trg_corpus, "--trg-corpus")?;
            let lex = BilingualLexicon::load_tsv(
                "lexicon",
                open_reader(&existing_path(&args.lexicon, "--lexicon")?)?,
            )?;
            let out = mapping::barista_corpus(&src, &trg, &lex, args.p, args.seed)?;
            write_atomic(Path::new(&args.out), |w| {
                for line in &out {
                    writeln!(w, "{line}")?;
                }
                Ok(())
            })?;
            Ok(0)
        }
        BaselineCmd::LinearClf(args) => cmd_linear_clf(args),
    }
}

fn cmd_csls(args: args::CslsArgs) -> Result<u8> {
    if args.k == 0 {
        return Err(Error::Argument("--k must be >= 1".into()));
    }
    let src = load_space(
        &existing_path(&args.src_emb, "--src-emb")?,
        None,
        args.normalize,
    )?;
    let trg = load_space(
        &existing_path(&args.trg_emb, "--trg-emb")?,
        None,
        args.normalize,
    )?;
    let mapping = args
        .mapping
        .as_deref()
        .map(|p| -> Result<mapping::MappingMatrix> {
            let ckpt = checkpoint::load_checkpoint(open_reader(&existing_path(p, "--mapping")?)?)?;
            ckpt.as_mapping().cloned()
        })
        .transpose()?;

    // Queries are either an explicit token list or the source side of a
    // gold lexicon used to score precision-at-one.
    let (query_tokens, gold_targets): (Vec<String>, Option<Vec<String>>) =
        match (&args.queries, &args.eval_lexicon) {
            (Some(_), Some(_)) => {
                return Err(Error::Argument(
                    "--queries and --eval-lexicon are mutually exclusive".into(),
                ))
            }
            (Some(path), None) => {
                let tokens: Vec<String> = open_reader(&existing_path(path, "--queries")?)?
                    .lines()
                    .map(|l| l.map(|s| s.trim().to_string()).map_err(Error::from))
                    .filter(|l| !matches!(l, Ok(s) if s.is_empty()))
                    .collect::<Result<_>>()?;
                (tokens, None)
            }
            (None, Some(path)) => {
                let lex = BilingualLexicon::load_tsv(
                    "eval",
                    open_reader(&existing_path(path, "--eval-lexicon")?)?,
                )?;
                let (q, g): (Vec<_>, Vec<_>) = lex.pairs().iter().cloned().unzip();
                (q, Some(g))
            }
            (None, None) => {
                return Err(Error::Argument(
                    "csls needs --queries or --eval-lexicon".into(),
                ))
            }
        };

    let mut rows = Vec::new();
    let mut kept_tokens = Vec::new();
    let mut kept_gold = Vec::new();
    for (i, tok) in query_tokens.iter().enumerate() {
        if let Some(v) = src.lookup(tok) {
            let projected = match &mapping {
                Some(m) => m.project(v)?,
                None => v.to_vec(),
            };
            rows.push(projected);
            kept_tokens.push(tok.clone());
            if let Some(gold) = &gold_targets {
                kept_gold.push(gold[i].clone());
            }
        }
    }
    if rows.is_empty() {
        return Err(Error::Argument(
            "no query token is in the source vocabulary".into(),
        ));
    }
    let queries = Matrix::from_rows(&rows)?;
    let rankings = mapping::csls_retrieve(&queries, trg.matrix(), args.k, Some(args.top))?;

    write_atomic(Path::new(&args.out), |w| {
        for (q, ranking) in rankings.iter().enumerate() {
            for (rank, (cand, score)) in ranking.iter().enumerate() {
                writeln!(
                    w,
                    "{}\t{}\t{}\t{}",
                    kept_tokens[q],
                    rank + 1,
                    trg.token(*cand),
                    score
                )?;
            }
        }
        Ok(())
    })?;

    #[derive(Serialize)]
    struct CslsSummary {
        queries: usize,
        skipped_queries: usize,
        k: usize,
        #[serde(skip_serializing_if = "Option::is_none")]
        p_at_1: Option<f64>,
    }
    let p_at_1 = if kept_gold.is_empty() {
        None
    } else {
        let gold_idx: Vec<usize> = kept_gold
            .iter()
            .map(|t| {
                trg.tokens().iter().position(|c| c == t).ok_or_else(|| {
                    Error::Argument(format!("gold token {t:?} not in target vocabulary"))
                })
            })
            .collect::<Result<_>>()?;
        Some(mapping::precision_at_one(&rankings, &gold_idx)?)
    };
    emit_json(
        &CslsSummary {
            queries: kept_tokens.len(),
            skipped_queries: query_tokens.len() - kept_tokens.len(),
            k: args.k,
            p_at_1,
        },
        None,
    )?;
    Ok(0)
}

fn cmd_linear_clf(args: args::LinearClfArgs) -> Result<u8> {
    let labels = parse_labels(&args.labels)?;
    let src = load_space(&existing_path(&args.src_emb, "--src-emb")?, None, false)?;
    let trg = load_space(&existing_path(&args.trg_emb, "--trg-emb")?, None, false)?;
    let mapping = args
        .mapping
        .as_deref()
        .map(|p| -> Result<mapping::MappingMatrix> {
            let ckpt = checkpoint::load_checkpoint(open_reader(&existing_path(p, "--mapping")?)?)?;
            ckpt.as_mapping().cloned()
        })
        .transpose()?;
    let load = |path: &str, flag: &str| -> Result<Corpus> {
        load_corpus(
            open_reader(&existing_path(path, flag)?)?,
            &labels,
            LoadOptions::default(),
        )
    };
    let train = load(&args.train_corpus, "--train-corpus")?;
    let test = load(&args.test_corpus, "--test-corpus")?;

    // Train on source-language averages (projected into the target space
    // when a mapping is given); test on raw target-language averages.
    let featurize =
        |corpus: &Corpus, space: &EmbeddingSpace, project: bool| -> Result<Vec<Vec<f64>>> {
            corpus
                .instances
                .iter()
                .map(|inst| {
                    let avg = space.average(&inst.tokens, OovPolicy::Skip);
                    match (&mapping, project) {
                        (Some(m), true) => m.project(&avg),
                        _ => Ok(avg),
                    }
                })
                .collect()
        };
    let train_x = featurize(&train, &src, true)?;
    let train_y = train.gold_labels();
    let test_x = featurize(&test, &trg, false)?;
    let test_y = test.gold_labels();

    let config = LinearClfConfig {
        epochs: args.epochs,
        learning_rate: args.lr,
        l2: args.l2,
        seed: args.seed,
    };
    let model = mapping::linear_classifier_fit(&train_x, &train_y, labels.arity(), &config)?;
    let predictions: Vec<usize> = test_x
        .iter()
        .map(|f| mapping::linear_classifier_predict(&model, f))
        .collect::<Result<_>>()?;

    write_atomic(Path::new(&args.out), |w| {
        for &p in &predictions {
            let line = serde_json::to_string(&PredictionLine {
                label: labels.name(p),
            })
            .map_err(|e| Error::Format(e.to_string()))?;
            writeln!(w, "{line}")?;
        }
        Ok(())
    })?;
    let report = eval::evaluate(&test_y, &predictions, labels.arity())?;
    #[derive(Serialize)]
    struct ClfSummary {
        macro_f1: f64,
        test_instances: usize,
    }
    emit_json(
        &ClfSummary {
            macro_f1: report.macro_f1,
            test_instances: test_y.len(),
        },
        None,
    )?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// analyze

fn load_params_any(path: &str) -> Result<BlseParams> {
    let ckpt = checkpoint::load_checkpoint(open_reader(&existing_path(path, "--checkpoint")?)?)?;
    match ckpt {
        Checkpoint::Sentence(p) => Ok(p),
        Checkpoint::Targeted(p) => Ok(p.base),
        Checkpoint::Mapping(_) => Err(Error::Argument(
            "this analysis needs a model checkpoint, not a mapping".into(),
        )),
    }
}

fn read_token_file(path: &str, flag: &str) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for line in open_reader(&existing_path(path, flag)?)?.lines() {
        let line = line?;
        for tok in line.split_whitespace() {
            out.push(tok.to_string());
        }
    }
    Ok(out)
}

fn cmd_analyze(cmd: AnalyzeCmd) -> Result<u8> {
    match cmd {
        AnalyzeCmd::PairCosine(args) => {
            let src = load_space(&existing_path(&args.src_emb, "--src-emb")?, None, false)?;
            let trg = load_space(&existing_path(&args.trg_emb, "--trg-emb")?, None, false)?;
            let lex = BilingualLexicon::load_tsv(
                "lexicon",
                open_reader(&existing_path(&args.lexicon, "--lexicon")?)?,
            )?;
            let ckpt = checkpoint::load_checkpoint(open_reader(&existing_path(
                &args.checkpoint,
                "--checkpoint",
            )?)?)?;
            let (mean, skipped) = match ckpt {
                Checkpoint::Sentence(p) => analysis::pair_cosine(&p, &src, &trg, &lex)?,
                Checkpoint::Targeted(p) => analysis::pair_cosine(&p.base, &src, &trg, &lex)?,
                Checkpoint::Mapping(m) => analysis::pair_cosine(&m, &src, &trg, &lex)?,
            };
            #[derive(Serialize)]
            struct PairCosineReport {
                mean_cosine: f64,
                skipped_pairs: usize,
            }
            emit_json(
                &PairCosineReport {
                    mean_cosine: mean,
                    skipped_pairs: skipped,
                },
                args.out.as_deref().map(Path::new),
            )?;
            Ok(0)
        }
        AnalyzeCmd::Synant(args) => {
            let params = load_params_any(&args.checkpoint)?;
            let space = load_space(&existing_path(&args.emb, "--emb")?, None, false)?;
            let positive = read_token_file(&args.positive, "--positive")?;
            let negative = read_token_file(&args.negative, "--negative")?;
            let side = parse_side(&args.side)?;
            let (within, cross) =
                analysis::synonym_antonym_separation(&params, &space, &positive, &negative, side)?;
            #[derive(Serialize)]
            struct SynantReport {
                within_class_cosine: f64,
                cross_class_cosine: f64,
            }
            emit_json(
                &SynantReport {
                    within_class_cosine: within,
                    cross_class_cosine: cross,
                },
                args.out.as_deref().map(Path::new),
            )?;
            Ok(0)
        }
        AnalyzeCmd::LangSim(args) => {
            if args.n == 0 {
                return Err(Error::Argument("--n must be >= 1".into()));
            }
            let pos_a = read_token_file(&args.pos_a, "--pos-a")?;
            let pos_b = read_token_file(&args.pos_b, "--pos-b")?;
            let read_text = |path: &str, flag: &str| -> Result<String> {
                let mut text = String::new();
                open_reader(&existing_path(path, flag)?)?.read_to_string(&mut text)?;
                Ok(text)
            };
            let text_a = read_text(&args.text_a, "--text-a")?;
            let text_b = read_text(&args.text_b, "--text-b")?;
            let profile_pos_a = analysis::ngram_profile(&pos_a, args.n)?;
            let profile_pos_b = analysis::ngram_profile(&pos_b, args.n)?;
            let profile_char_a = analysis::char_ngram_profile(&text_a, args.n)?;
            let profile_char_b = analysis::char_ngram_profile(&text_b, args.n)?;
            let similarity = analysis::language_similarity(
                &profile_pos_a,
                &profile_char_a,
                &profile_pos_b,
                &profile_char_b,
            )?;
            #[derive(Serialize)]
            struct LangSimReport {
                similarity: f64,
                n: usize,
            }
            emit_json(
                &LangSimReport {
                    similarity,
                    n: args.n,
                },
                args.out.as_deref().map(Path::new),
            )?;
            Ok(0)
        }
        AnalyzeCmd::DomainDiv(args) => {
            if args.smoothing <= 0.0 {
                return Err(Error::Argument("--smoothing must be positive".into()));
            }
            if args.top_n == 0 {
                return Err(Error::Argument("--top-n must be >= 1".into()));
            }
            let read_lines = |path: &str, flag: &str| -> Result<Vec<String>> {
                open_reader(&existing_path(path, flag)?)?
                    .lines()
                    .map(|l| l.map_err(Error::from))
                    .collect()
            };
            let a = analysis::unigram_counts(&read_lines(&args.corpus_a, "--corpus-a")?);
            let b = analysis::unigram_counts(&read_lines(&args.corpus_b, "--corpus-b")?);
            let divergence = analysis::domain_divergence(&a, &b, args.top_n, args.smoothing)?;
            #[derive(Serialize)]
            struct DomainDivReport {
                divergence: f64,
                top_n: usize,
                smoothing: f64,
            }
            emit_json(
                &DomainDivReport {
                    divergence,
                    top_n: args.top_n,
                    smoothing: args.smoothing,
                },
                args.out.as_deref().map(Path::new),
            )?;
            Ok(0)
        }
        AnalyzeCmd::ExportProj(args) => {
            let params = load_params_any(&args.checkpoint)?;
            let space = load_space(&existing_path(&args.emb, "--emb")?, None, false)?;
            let tokens = read_token_file(&args.tokens, "--tokens")?;
            let side = parse_side(&args.side)?;
            write_atomic(Path::new(&args.out), |w| {
                analysis::export_projected(&params, &space, &tokens, side, w)
            })?;
            Ok(0)
        }
    }
}
