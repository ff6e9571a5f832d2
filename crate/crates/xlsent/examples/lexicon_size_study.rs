//! How much bilingual supervision does the joint model need? Train with
//! progressively larger slices of the translation lexicon and watch the
//! target-language F1 and the dev translation cosine.
//!
//! Run: cargo run --example lexicon_size_study

use xlsent::blse::{self, Side, Spaces, TrainConfig, TrainData};
use xlsent::embeddings::OovPolicy;
use xlsent::eval;
use xlsent::synthetic::{rotation_task, TaskConfig};

fn main() {
    let task = rotation_task(&TaskConfig {
        seed: 31,
        ..TaskConfig::default()
    });
    let config = TrainConfig {
        epochs: 120,
        seed: 31,
        dev_eval_every: 120,
        ..TrainConfig::default()
    };
    let spaces = Spaces {
        source: &task.source,
        target: &task.target,
    };

    println!("pairs  dev-cosine  target-F1");
    for size in [0usize, 10, 25, 50, 100, 150] {
        let truncated = task.lexicon_train.truncate(size);
        let data = TrainData {
            corpus: &task.train_corpus,
            lexicon_train: if size == 0 { None } else { Some(&truncated) },
            lexicon_dev: Some(&task.lexicon_dev),
            dev_source: None,
            dev_target: None,
        };
        let (params, history) = blse::train(&config, spaces, data).unwrap();
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
        let f1 = eval::macro_f1(&gold, &pred, 2).unwrap();
        let cosine = history
            .last()
            .unwrap()
            .dev_pair_cosine
            .map(|c| format!("{c:>10.3}"))
            .unwrap_or_else(|| "         -".into());
        println!("{size:>5}  {cosine}  {f1:>9.3}");
    }
    println!("\nwith zero pairs nothing aligns the target space, so transfer");
    println!("sits at chance; a few dozen pairs already carry most of it.");
}
