//! Split a document stream into a causal corpus and a size-matched control
//! corpus sampled from the same 15-minute bins.
//!
//! Run with: cargo run -p causetext --example select_corpora

use causetext::ingest::{preprocess, PreprocessFlags, RawDocument};
use causetext::select::{build_corpus_pair, classify, SelectionRules};
use chrono::{TimeZone, Utc};

fn doc(id: &str, minute: u32, text: &str) -> causetext::ingest::Document {
    let raw = RawDocument {
        id: id.to_string(),
        text: text.to_string(),
        timestamp: Utc.with_ymd_and_hms(2014, 3, 1, 12, minute, 0).unwrap(),
        lang: "en".to_string(),
    };
    preprocess(&raw, PreprocessFlags::default())
}

fn main() {
    let docs = vec![
        doc("a1", 1, "the storm caused a flood downtown"),
        doc("a2", 3, "heat causes fires in the hills"),
        doc("a3", 22, "traffic was causing delays again"),
        // exactly-one rule: two mentions disqualify
        doc("x1", 2, "it caused chaos and causes stress"),
        // bidirectional language disqualifies from both corpora
        doc("x2", 4, "smoking is correlated with illness"),
        // control candidates, same bins as the causal posts
        doc("c1", 5, "lovely sunny afternoon in the park"),
        doc("c2", 7, "my coffee is still warm"),
        doc("c3", 9, "reading a good book by the window"),
        doc("c4", 25, "the train arrived right on time"),
        doc("c5", 28, "dinner with friends tonight"),
    ];

    let rules = SelectionRules::default();
    for d in &docs {
        println!("{:>2}: {:?}", d.id, classify(d, &rules));
    }

    let pair = build_corpus_pair(docs, &rules).expect("selection failed");
    println!(
        "\ncausal={} control={} excluded={}",
        pair.causal.len(),
        pair.control.len(),
        pair.excluded
    );
    for (bin, stats) in &pair.per_bin_counts {
        println!(
            "bin {}: causal={} control={} shortfall={}",
            bin, stats.causal, stats.control, stats.shortfall
        );
    }
    // same seed, same draw — rerunning reproduces the control corpus exactly
    let ids: Vec<&str> = pair.control.iter().map(|d| d.id.as_str()).collect();
    println!("control ids: {ids:?}");
}
