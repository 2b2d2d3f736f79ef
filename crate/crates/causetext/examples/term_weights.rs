//! Rank corpus terms by tf-idf and pick the analysis vocabulary, counting
//! across shards to show the merge law used for large corpora.
//!
//! Run with: cargo run -p causetext --example term_weights

use causetext::ingest::{preprocess, PreprocessFlags, RawDocument};
use causetext::stats::{count, count_sharded, tfidf_records, TableKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let texts = [
        "the storm caused the flood in town",
        "the flood damaged the bridge in town",
        "heat and wind spread the fire",
        "the fire burned the dry hills",
        "rain brought mud to every street",
        "mud covered the street after the rain",
        "a calm day in the park",
        "the park was calm and green",
    ];
    let corpus: Vec<_> = texts
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
        .collect();

    // shard-count then merge: same table as counting in one pass
    let whole = count(&corpus, TableKind::Unigram)?;
    let sharded = count_sharded(&corpus, TableKind::Unigram, 3)?;
    assert_eq!(whole.total, sharded.total);
    assert_eq!(whole.len(), sharded.len());
    println!("counted {} distinct terms over {} tokens", whole.len(), whole.total);

    // ln f · ln(D / df): ubiquitous words ("the") get weight zero
    println!("\n{:<9} {:>3} {:>3} {:>8}  selected", "term", "f", "df", "tfidf");
    for r in tfidf_records(&whole, 60.0, 10)? {
        println!(
            "{:<9} {:>3} {:>3} {:>8.4}  {}",
            r.item, r.f, r.df, r.tfidf, r.selected
        );
    }
    Ok(())
}
