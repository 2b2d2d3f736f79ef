//! Check that part-of-speech odds ratios survive the preprocessing choices:
//! rebuild the corpora under all four punctuation/casing variants and
//! correlate the per-tag log odds-ratio vectors.
//!
//! Run with: cargo run -p causetext --example variant_study

use causetext::ingest::{preprocess, PreprocessFlags, RawDocument};
use causetext::select::{build_corpus_pair, SelectionRules};
use causetext::stats::variant_correlation;
use causetext::tagger::{train, TaggedSentence};
use chrono::{TimeZone, Utc};

fn sent(s: &str) -> TaggedSentence {
    let mut words = Vec::new();
    let mut tags = Vec::new();
    for pair in s.split_whitespace() {
        let (w, t) = pair.rsplit_once('/').unwrap();
        words.push(w.to_string());
        tags.push(t.to_string());
    }
    (words, tags)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut raws = Vec::new();
    let causal = [
        "The storm caused a flood, again.",
        "Heat causes fires in the hills!",
        "Rain was causing delays today.",
        "The ice caused a crash downtown.",
    ];
    let control = [
        "A lovely day in the park.",
        "My coffee is still warm, somehow.",
        "Reading a good book tonight!",
        "The train arrived right on time.",
        "Dinner with friends was fun.",
        "Sunshine all afternoon today.",
        "The dog sleeps by the door.",
        "Fresh bread from the market.",
    ];
    for (i, text) in causal.iter().chain(control.iter()).enumerate() {
        raws.push(RawDocument {
            id: format!("d{i:02}"),
            text: (*text).to_string(),
            timestamp: Utc.with_ymd_and_hms(2014, 3, 1, 12, i as u32, 0).unwrap(),
            lang: "en".to_string(),
        });
    }

    let train_set: Vec<TaggedSentence> = [
        "the/DT storm/NN caused/VBD a/DT flood/NN again/RB",
        "heat/NN causes/VBZ fires/NNS in/IN the/DT hills/NNS",
        "rain/NN was/VBD causing/VBG delays/NNS today/NN",
        "a/DT lovely/JJ day/NN in/IN the/DT park/NN",
        "my/PRP$ coffee/NN is/VBZ still/RB warm/JJ somehow/RB",
        "the/DT train/NN arrived/VBD right/RB on/IN time/NN",
        "dinner/NN with/IN friends/NNS was/VBD fun/JJ",
        "the/DT dog/NN sleeps/VBZ by/IN the/DT door/NN",
        ",/, ./. !/!", // punctuation tags for the punctuation-keeping variants
    ]
    .iter()
    .map(|s| sent(s))
    .collect();
    let model = train(&train_set, 5, 42)?;

    let rules = SelectionRules::default();
    let mut variants = Vec::new();
    for keep_punctuation in [false, true] {
        for keep_casing in [false, true] {
            let flags = PreprocessFlags { keep_punctuation, keep_casing };
            let docs: Vec<_> = raws.iter().map(|r| preprocess(r, flags)).collect();
            let pair = build_corpus_pair(docs, &rules)?;
            variants.push((flags, pair));
        }
    }

    for cmp in variant_correlation(&variants, &model, 0.05)? {
        println!(
            "{} vs {} (casing={}): rho={:.4} over {} tags, dropped {:?}",
            cmp.variant_a, cmp.variant_b, cmp.keep_casing, cmp.rho, cmp.n_tags, cmp.dropped_tags
        );
    }
    Ok(())
}
