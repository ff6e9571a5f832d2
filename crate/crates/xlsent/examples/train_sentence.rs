//! Train the sentence-level bilingual sentiment model on a synthetic
//! rotation task and watch it transfer to the target language.
//!
//! The task plants 20 positive and 20 negative words in a random source
//! space, builds the target space as a noisy orthogonal rotation of it,
//! and supervises the alignment with 150 identity translation pairs.
//! After training, the target language is classified through `M'` even
//! though no target-language label was ever seen.
//!
//! Run: cargo run --example train_sentence

use xlsent::blse::{self, Side, Spaces, TrainConfig, TrainData};
use xlsent::embeddings::OovPolicy;
use xlsent::eval;
use xlsent::synthetic::{rotation_task, TaskConfig};

fn main() {
    let task = rotation_task(&TaskConfig::default());
    let config = TrainConfig {
        alpha: 0.3,
        epochs: 120,
        batch_size: 20,
        learning_rate: 0.001,
        seed: 7,
        dev_eval_every: 20,
        ..TrainConfig::default()
    };

    println!(
        "task: {} source words ({} polar), {} train sentences, lexicon {}+{} pairs",
        task.source.len(),
        task.positive_words.len() + task.negative_words.len(),
        task.train_corpus.instances.len(),
        task.lexicon_train.len(),
        task.lexicon_dev.len(),
    );

    let (params, history) = blse::train(
        &config,
        Spaces {
            source: &task.source,
            target: &task.target,
        },
        TrainData {
            corpus: &task.train_corpus,
            lexicon_train: Some(&task.lexicon_train),
            lexicon_dev: Some(&task.lexicon_dev),
            dev_source: Some(&task.dev_source),
            dev_target: Some(&task.dev_target),
        },
    )
    .expect("training on the synthetic task");

    println!("\nepoch     H      MSE        J    dev-cosine  src-F1  tgt-F1");
    for r in history.records.iter().filter(|r| r.src_f1.is_some()) {
        println!(
            "{:>5}  {:.4}  {:.6}  {:.4}  {:>10.4}  {:>6}  {:>6}",
            r.epoch,
            r.sentiment_loss,
            r.projection_loss.unwrap_or(f64::NAN),
            r.joint_loss,
            r.dev_pair_cosine.unwrap_or(f64::NAN),
            r.src_f1.map(|v| format!("{v:.3}")).unwrap_or_default(),
            r.tgt_f1.map(|v| format!("{v:.3}")).unwrap_or_default(),
        );
    }

    // Classify a few held-out target-language sentences by hand.
    println!("\nsample target-language predictions (side = target, via M'):");
    for inst in task.dev_target.instances.iter().take(5) {
        let pred = blse::predict(
            &params,
            &task.target,
            &inst.tokens,
            Side::Target,
            OovPolicy::Skip,
        )
        .unwrap();
        println!(
            "  {:?} -> {} (gold {})",
            inst.tokens.join(" "),
            task.dev_target.schema.name(pred),
            task.dev_target.schema.name(inst.label),
        );
    }

    let gold = task.dev_target.gold_labels();
    let pred: Vec<usize> = task
        .dev_target
        .instances
        .iter()
        .map(|i| {
            blse::predict(
                &params,
                &task.target,
                &i.tokens,
                Side::Target,
                OovPolicy::Skip,
            )
            .unwrap()
        })
        .collect();
    let report = eval::evaluate(&gold, &pred, 2).unwrap();
    println!("\ntarget-language macro F1: {:.3}", report.macro_f1);
}
