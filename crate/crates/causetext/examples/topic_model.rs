//! Fit a seeded collapsed-Gibbs topic model and print the top words per
//! topic with their document mixtures.
//!
//! Run with: cargo run -p causetext --example topic_model

use causetext::ingest::{preprocess, PreprocessFlags, RawDocument};
use causetext::lda::{fit, report, LdaConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // two planted themes: weather damage and food
    let weather = ["storm flood rain damage wind", "flood rain storm wind mud", "storm damage mud rain flood"];
    let food = ["soup bread dinner coffee tea", "bread coffee soup tea cake", "dinner cake tea soup bread"];
    let mut texts: Vec<&str> = Vec::new();
    for i in 0..30 {
        texts.push(weather[i % weather.len()]);
        texts.push(food[i % food.len()]);
    }

    let corpus: Vec<_> = texts
        .iter()
        .enumerate()
        .map(|(i, t)| {
            preprocess(
                &RawDocument {
                    id: format!("d{i:03}"),
                    text: (*t).to_string(),
                    timestamp: "2014-03-01T12:00:00Z".parse().unwrap(),
                    lang: "en".to_string(),
                },
                PreprocessFlags::default(),
            )
        })
        .collect();

    let config = LdaConfig {
        topics: 2,
        iterations: 150,
        seed: 7,
        ..LdaConfig::default()
    };
    let state = fit(&corpus, &config)?;
    state.check_invariants()?; // count matrices must stay consistent

    let rep = report(&state, 5)?;
    for (k, words) in rep.top_words.iter().enumerate() {
        print!("topic {k}:");
        for w in words {
            print!("  {}({:.3})", w.word, w.phi);
        }
        println!();
    }

    let theta = state.theta();
    println!("\nfirst four document mixtures:");
    for (doc, row) in corpus.iter().zip(&theta).take(4) {
        let fmt: Vec<String> = row.iter().map(|p| format!("{p:.3}")).collect();
        println!("  {}: [{}]", doc.id, fmt.join(", "));
    }
    Ok(())
}
