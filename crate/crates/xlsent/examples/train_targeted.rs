//! Targeted cross-lingual sentiment with the SPLIT architecture: the
//! sentence is split at the target span, left context / target / right
//! context are averaged and projected separately, and the concatenation
//! is classified.
//!
//! The synthetic task makes 30% of instances "conflicting": the context
//! polarity contradicts the target polarity. The sentence-assumption
//! baseline (one polarity per sentence) fails on exactly those, while
//! SPLIT reads the target span.
//!
//! Run: cargo run --example train_targeted

use xlsent::blse::{Side, Spaces, TrainConfig, TrainData};
use xlsent::embeddings::OovPolicy;
use xlsent::eval;
use xlsent::synthetic::{targeted_task, TaskConfig};
use xlsent::targeted::{self, Variant};

fn main() {
    let task = targeted_task(&TaskConfig {
        conflict_rate: 0.3,
        seed: 11,
        ..TaskConfig::default()
    });
    let config = TrainConfig {
        alpha: 0.3,
        epochs: 120,
        batch_size: 20,
        learning_rate: 0.001,
        seed: 11,
        dev_eval_every: 40,
        ..TrainConfig::default()
    };
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

    println!("training SPLIT and the Sent baseline on the source language ...");
    let (split, _) = targeted::train_targeted(&config, spaces, data, Variant::Split).unwrap();
    let (sent, _) = targeted::train_targeted(&config, spaces, data, Variant::Sent).unwrap();

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

    let f1 = |pred: &[usize]| eval::macro_f1(&gold, pred, 2).unwrap();
    println!("\ntarget-language macro F1 on {} instances:", gold.len());
    println!("  SPLIT: {:.3}", f1(&split_pred));
    println!("  Sent : {:.3}", f1(&sent_pred));

    let conflict_idx: Vec<usize> = task
        .dev_conflicts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c)
        .map(|(i, _)| i)
        .collect();
    let subset = |pred: &[usize]| {
        let g: Vec<usize> = conflict_idx.iter().map(|&i| gold[i]).collect();
        let p: Vec<usize> = conflict_idx.iter().map(|&i| pred[i]).collect();
        eval::macro_f1(&g, &p, 2).unwrap()
    };
    println!(
        "\non the {} conflicting instances (context polarity != target polarity):",
        conflict_idx.len()
    );
    println!("  SPLIT: {:.3}", subset(&split_pred));
    println!(
        "  Sent : {:.3}  <- assigns the sentence polarity to every target",
        subset(&sent_pred)
    );

    // One conflicting instance up close.
    if let Some(&i) = conflict_idx.first() {
        let inst = &task.dev_target.instances[i];
        let (l, t, r) = inst.split_at_target().unwrap();
        println!(
            "\nexample conflict: left={:?} target={:?} right={:?}",
            l.join(" "),
            t.join(" "),
            r.join(" ")
        );
        println!(
            "  gold {}, SPLIT {}, Sent {}",
            task.dev_target.schema.name(inst.label),
            task.dev_target.schema.name(split_pred[i]),
            task.dev_target.schema.name(sent_pred[i]),
        );
    }
}
