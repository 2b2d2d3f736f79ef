//! Corpus analysis for causal language in short-text streams.
//!
//! The crate splits a timestamped document stream (e.g. tweets) into a
//! *causal* corpus, documents containing exactly one causation word, and a
//! time-matched *control* corpus sampled from the remaining documents, then
//! compares the two along several axes:
//!
//! * token / part-of-speech / named-entity odds ratios with Wald confidence
//!   intervals ([`stats`])
//! * tf-idf salience filtering ([`stats::tfidf_filter`])
//! * "cause-trees": the most frequent n-gram continuations of the causation
//!   words ([`causetree`])
//! * lexicon-based sentiment ([`sentiment`])
//! * latent topics via collapsed Gibbs sampling ([`lda`])
//!
//! Part-of-speech tags come from a small averaged perceptron tagger
//! ([`tagger`]) or from external annotation files.
//!
//! Start with the runnable examples (`cargo run --example full_pipeline`)
//! or the `causetext` binary, which exposes each stage as a subcommand.

pub mod causetree;
pub mod ingest;
pub mod lda;
pub mod pipeline;
pub mod select;
pub mod sentiment;
pub mod stats;
pub mod tagger;

mod util;

pub use ingest::{Document, PreprocessFlags, RawDocument, StopwordTable};
pub use select::{Classification, CorpusPair, SelectionRules};
