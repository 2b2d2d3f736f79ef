//! Tokenize raw social-media posts and apply the English language gate.
//!
//! Run with: cargo run -p causetext --example preprocess

use causetext::ingest::{language_gate, preprocess, PreprocessFlags, RawDocument, StopwordTable};

fn main() {
    let raws = [
        ("en", "The storm caused a flood in my town! http://t.co/x #weather"),
        ("en", "@alice the rain &amp; wind caused SO much damage..."),
        ("es", "la lluvia es muy fuerte en la ciudad"),
        ("en", "el dia es bueno pero the"), // declared en, stopwords say otherwise
    ];

    let mut table = StopwordTable::new();
    table.insert_language("english", ["the", "a", "in", "my", "so", "much", "is"]);
    table.insert_language("spanish", ["la", "es", "muy", "en", "el", "pero"]);

    for (i, (lang, text)) in raws.iter().enumerate() {
        let raw = RawDocument {
            id: format!("post{i}"),
            text: (*text).to_string(),
            timestamp: "2014-03-01T12:00:00Z".parse().unwrap(),
            lang: (*lang).to_string(),
        };
        let doc = preprocess(&raw, PreprocessFlags::default());
        let kept = language_gate(&doc, &raw.lang, &table);
        println!(
            "{} lang={} gate={}\n  cased: {:?}\n  lower: {:?}",
            doc.id, lang, kept, doc.tokens_cased, doc.tokens_lower
        );
    }

    // Punctuation can be kept as standalone evidence for the tagger study.
    let raw = RawDocument {
        id: "punct".into(),
        text: "It caused chaos, really!".into(),
        timestamp: "2014-03-01T12:00:00Z".parse().unwrap(),
        lang: "en".into(),
    };
    let keep = PreprocessFlags { keep_punctuation: true, keep_casing: true };
    println!(
        "punctuation kept: {:?}",
        preprocess(&raw, keep).tokens_cased
    );
}
