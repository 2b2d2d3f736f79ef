//! Score two corpora against a word-happiness lexicon: tf-idf picks the
//! vocabulary, a histogram shows the score distribution, and Welch's t-test
//! compares the corpus means.
//!
//! Run with: cargo run -p causetext --example sentiment_scores

use causetext::ingest::{preprocess, PreprocessFlags, RawDocument};
use causetext::sentiment::{
    corpus_mean_score, mean_difference_test, score_distribution, HistogramSpec, ScoreSample,
    ScoredVocabulary, SentimentLexicon,
};
use causetext::stats::{count, TableKind};

fn docs(prefix: &str, texts: &[&str]) -> Vec<causetext::ingest::Document> {
    texts
        .iter()
        .enumerate()
        .map(|(i, t)| {
            preprocess(
                &RawDocument {
                    id: format!("{prefix}{i}"),
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
    // 1..9 happiness scale; scores are recentered around the lexicon mean
    let lex = SentimentLexicon::from_entries([
        ("flood", 2.0),
        ("damage", 2.3),
        ("fear", 2.1),
        ("stress", 2.4),
        ("mud", 3.1),
        ("joy", 8.2),
        ("sunshine", 8.0),
        ("music", 8.1),
        ("friends", 7.9),
        ("dinner", 6.9),
        ("book", 7.2),
        ("park", 7.4),
    ])?;
    println!("recentered range: {:?}", lex.recentered_range());

    let causal = docs(
        "a",
        &[
            "the storm caused the flood and the damage",
            "the flood caused fear and stress",
            "rain caused the mud and more mud",
            "the crash caused fear and damage",
        ],
    );
    let control = docs(
        "c",
        &[
            "joy and sunshine in the park",
            "music and dinner with friends",
            "a good book and sunshine bring joy",
            "friends and music and joy",
        ],
    );

    let causal_table = count(&causal, TableKind::Unigram)?;
    let control_table = count(&control, TableKind::Unigram)?;

    // Ṽ: lexicon words whose tf-idf clears the percentile cutoff.
    let v_causal = ScoredVocabulary::build("causal", &causal_table, &lex, 20.0)?;
    let v_control = ScoredVocabulary::build("control", &control_table, &lex, 20.0)?;
    println!("causal Ṽ = {:?} (coverage {:.3})", v_causal.words, v_causal.coverage);
    println!("control Ṽ = {:?} (coverage {:.3})", v_control.words, v_control.coverage);

    println!(
        "mean scores: causal={:.4} control={:.4}",
        corpus_mean_score(&causal_table, &v_causal, &lex)?,
        corpus_mean_score(&control_table, &v_control, &lex)?
    );

    let spec = HistogramSpec::from_lexicon(&lex, 8)?;
    let hist = score_distribution(&control, &v_control, &lex, spec, None)?;
    println!("\ncontrol histogram ({} scored tokens):", hist.scored_tokens);
    for (i, w) in hist.weights.iter().enumerate() {
        let (lo, hi) = hist.spec.edges(i);
        println!("  [{lo:>6.2}, {hi:>6.2})  {}", "#".repeat(*w as usize));
    }

    let a = ScoreSample::from_table(&causal_table, &v_causal, &lex);
    let b = ScoreSample::from_table(&control_table, &v_control, &lex);
    let t = mean_difference_test(&a, &b)?;
    println!("\nWelch: t={:.4} df={:.2} p={:.6}", t.t, t.df, t.p);
    Ok(())
}
