//! Corpus-level analytics: language similarity from POS-tag and
//! character trigram profiles, domain divergence from smoothed
//! symmetrized KL over shared frequent vocabulary, and Pearson
//! correlation for relating such measures to downstream scores.
//!
//! Run: cargo run --example corpus_analytics

use xlsent::analysis::{
    char_ngram_profile, domain_divergence, language_similarity, ngram_profile, pearson_r,
    unigram_counts,
};

fn main() {
    // Three tiny "languages" as (pre-tagged POS stream, raw text).
    // B shares word order with A; C is built differently.
    let languages = [
        (
            "english-like",
            "DET NOUN VERB DET ADJ NOUN DET NOUN VERB ADV DET NOUN VERB DET ADJ NOUN",
            "the dog chased the red ball the cat slept soundly the dog found the old bone",
        ),
        (
            "sibling",
            "DET NOUN VERB DET ADJ NOUN DET NOUN VERB ADV DET NOUN VERB DET NOUN ADJ",
            "der hund jagte den roten ball die katze schlief tief der hund fand den knochen alt",
        ),
        (
            "outlier",
            "VERB NOUN ADV ADV NOUN VERB NOUN NOUN ADV VERB ADV NOUN NOUN VERB ADV ADV",
            "korosu neko wa yukkuri inu ga hone o shizukani taberu mata neko ga nemuru yo ne",
        ),
    ];

    let profiles: Vec<_> = languages
        .iter()
        .map(|(name, pos, text)| {
            let pos_symbols: Vec<&str> = pos.split_whitespace().collect();
            (
                *name,
                ngram_profile(&pos_symbols, 3).unwrap(),
                char_ngram_profile(text, 3).unwrap(),
            )
        })
        .collect();

    println!("pairwise language similarity (POS + character trigram cosine):");
    for i in 0..profiles.len() {
        for j in (i + 1)..profiles.len() {
            let sim = language_similarity(
                &profiles[i].1,
                &profiles[i].2,
                &profiles[j].1,
                &profiles[j].2,
            )
            .unwrap();
            println!("  {:<13} vs {:<13} {sim:.3}", profiles[i].0, profiles[j].0);
        }
    }

    // Domain divergence between token distributions.
    let reviews = unigram_counts(&[
        "the room was clean and the staff was friendly",
        "great pool great breakfast would stay again",
        "the room was small but the staff helped",
    ]);
    let tweets = unigram_counts(&[
        "omg the pool at this place is insane",
        "staff ignored us for an hour not great",
        "room views are unreal tho",
    ]);
    println!("\ndomain divergence (smoothed symmetrized KL over shared vocabulary):");
    println!(
        "  reviews vs reviews: {:.4}",
        domain_divergence(&reviews, &reviews, 10_000, 1e-6).unwrap()
    );
    println!(
        "  reviews vs tweets : {:.4}",
        domain_divergence(&reviews, &tweets, 10_000, 1e-6).unwrap()
    );

    // Correlating similarity with downstream scores.
    let similarity = [0.92, 0.81, 0.77, 0.64, 0.41];
    let f1 = [0.68, 0.66, 0.58, 0.52, 0.45];
    println!(
        "\nPearson r between language similarity and transfer F1: {:.3}",
        pearson_r(&similarity, &f1).unwrap()
    );
}
