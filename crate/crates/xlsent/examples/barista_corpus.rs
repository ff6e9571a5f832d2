//! Pseudo-bilingual corpus generation: concatenate two monolingual
//! corpora and randomly replace lexicon-covered tokens with their
//! translations. The output feeds an external skip-gram trainer.
//!
//! Run: cargo run --example barista_corpus

use xlsent::lexicon::BilingualLexicon;
use xlsent::mapping::barista_corpus;

fn main() {
    let lexicon = BilingualLexicon::new(
        "demo",
        vec![
            ("good".into(), "bueno".into()),
            ("bad".into(), "malo".into()),
            ("food".into(), "comida".into()),
            ("hotel".into(), "hotel".into()),
            ("room".into(), "habitación".into()),
        ],
    )
    .unwrap();

    let english = vec![
        "the hotel room was good".to_string(),
        "bad food but a good room".to_string(),
        "good hotel good food".to_string(),
    ];
    let spanish = vec![
        "la comida era buena pero la habitación mala".to_string(),
        "hotel bueno comida mala".to_string(),
    ];

    for p in [0.0, 0.5, 1.0] {
        println!("p = {p}:");
        for line in barista_corpus(&english, &spanish, &lexicon, p, 42).unwrap() {
            println!("  {line}");
        }
        println!();
    }

    // Replacement concentrates at the requested rate.
    let long = vec!["good ".repeat(20_000).trim().to_string()];
    let out = barista_corpus(&long, &[], &lexicon, 0.5, 7).unwrap();
    let replaced = out[0].split_whitespace().filter(|&t| t == "bueno").count();
    println!(
        "over 20000 covered tokens at p = 0.5: {replaced} replaced ({:.3})",
        replaced as f64 / 20_000.0
    );
}
