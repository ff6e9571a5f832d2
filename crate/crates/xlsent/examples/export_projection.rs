//! Inspect the learned joint space: measure how far sentiment synonyms
//! and antonyms sit from each other after projection, and export the
//! projected vectors in word2vec text format for external visualization.
//!
//! Run: cargo run --example export_projection

use xlsent::analysis::{export_projected, synonym_antonym_separation};
use xlsent::blse::{self, Side, Spaces, TrainConfig, TrainData};
use xlsent::synthetic::{rotation_task, TaskConfig};

fn main() {
    let task = rotation_task(&TaskConfig {
        seed: 21,
        ..TaskConfig::default()
    });
    let config = TrainConfig {
        epochs: 120,
        seed: 21,
        dev_eval_every: 120,
        ..TrainConfig::default()
    };
    let (params, _) = blse::train(
        &config,
        Spaces {
            source: &task.source,
            target: &task.target,
        },
        TrainData {
            corpus: &task.train_corpus,
            lexicon_train: Some(&task.lexicon_train),
            lexicon_dev: Some(&task.lexicon_dev),
            dev_source: None,
            dev_target: None,
        },
    )
    .unwrap();

    for side in [Side::Source, Side::Target] {
        let space = match side {
            Side::Source => &task.source,
            Side::Target => &task.target,
        };
        let (within, cross) = synonym_antonym_separation(
            &params,
            space,
            &task.positive_words,
            &task.negative_words,
            side,
        )
        .unwrap();
        println!("{side:?}: mean within-polarity cosine {within:.3}, cross-polarity {cross:.3}");
    }

    // Export the projected polar words; the file is word2vec text and can
    // feed any external dimensionality-reduction tool.
    let mut tokens = task.positive_words.clone();
    tokens.extend(task.negative_words.iter().cloned());
    let mut buf = Vec::new();
    export_projected(&params, &task.source, &tokens, Side::Source, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    println!(
        "\nexported {} projected vectors ({} bytes); first two lines:",
        tokens.len(),
        text.len()
    );
    for line in text.lines().take(2) {
        println!("  {line}");
    }
}
