//! Compare word usage between two corpora with odds ratios and Wald
//! confidence intervals, the data behind a forest plot.
//!
//! Run with: cargo run -p causetext --example odds_ratios

use std::collections::BTreeSet;

use causetext::ingest::{preprocess, PreprocessFlags, RawDocument};
use causetext::stats::{count, odds_ratios_with, OddsOptions, TableKind};

fn docs(texts: &[&str]) -> Vec<causetext::ingest::Document> {
    texts
        .iter()
        .enumerate()
        .map(|(i, t)| {
            preprocess(
                &RawDocument {
                    id: format!("d{i}"),
                    text: (*t).to_string(),
                    timestamp: "2014-03-01T12:00:00Z".parse().unwrap(),
                    lang: "en".to_string(),
                },
                PreprocessFlags::default(),
            )
        })
        .collect()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let causal = docs(&[
        "the storm caused damage and fear",
        "heat caused the fire and the damage",
        "rain caused mud and stress and fear",
        "the crash caused fear downtown",
    ]);
    let control = docs(&[
        "a calm day with joy and sunshine",
        "joy and music in the park",
        "sunshine and a good book",
        "dinner with friends and joy",
    ]);

    let cause_table = count(&causal, TableKind::Unigram)?;
    let control_table = count(&control, TableKind::Unigram)?;

    let items: BTreeSet<String> =
        ["fear", "damage", "joy", "sunshine", "the", "and"].iter().map(|s| s.to_string()).collect();

    let opts = OddsOptions { alpha: 0.05, haldane: false };
    for r in odds_ratios_with(&cause_table, &control_table, &items, &opts)? {
        println!(
            "{:<9} a={:<2} b={:<3} c={:<2} d={:<3} OR={:<8.4} CI=({:.4}, {:.4}) sig={} degenerate={}",
            r.item, r.a, r.b, r.c, r.d, r.or, r.ci_low, r.ci_high, r.significant, r.degenerate
        );
    }

    // Zero cells make the ratio blow up; the Haldane-Anscombe +0.5 keeps the
    // estimate finite but the row stays flagged degenerate.
    let opts = OddsOptions { alpha: 0.05, haldane: true };
    let fear: BTreeSet<String> = ["joy".to_string()].into_iter().collect();
    for r in odds_ratios_with(&cause_table, &control_table, &fear, &opts)? {
        println!(
            "haldane: {} OR={:.4} CI=({:.4}, {:.4}) degenerate={}",
            r.item, r.or, r.ci_low, r.ci_high, r.degenerate
        );
    }
    Ok(())
}
