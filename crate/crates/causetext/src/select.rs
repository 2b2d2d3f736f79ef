//! Corpus selection: split a cleaned document stream into a *causal* corpus
//! and a temporally matched *control* corpus.
//!
//! A document is causal when it contains exactly one causation word and no
//! token starting with a bidirectional stem (associat-, relat-, ...; those
//! words state a two-way relation, not a cause). Controls are sampled
//! uniformly without replacement from the remaining unexcluded documents of
//! the same clock-aligned time bin, one control per causal document where
//! the bin allows it.
//!
//! Sampling is reproducible: each bin draws from its own RNG stream derived
//! from `(rng_seed, bin_start)`, and candidates are sorted before drawing,
//! so the result does not depend on input order.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Utc};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::ingest::Document;
use crate::util::derive_seed2;

#[derive(Debug, Error)]
pub enum SelectError {
    #[error("cause word list is empty")]
    NoCauseWords,
    #[error("cause word {0:?} is not lowercase")]
    CauseWordCase(String),
    #[error("bidirectional stem {0:?} is not lowercase")]
    StemCase(String),
    #[error("bin length must be positive")]
    ZeroBin,
}

/// What to match and how to bin. Defaults: the three causation verb forms,
/// four bidirectional stems, 15-minute bins.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SelectionRules {
    pub cause_words: BTreeSet<String>,
    pub bidirectional_stems: Vec<String>,
    pub bin_minutes: u32,
    pub rng_seed: u64,
}

impl Default for SelectionRules {
    fn default() -> Self {
        SelectionRules {
            cause_words: ["caused", "causes", "causing"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            bidirectional_stems: ["associat", "connect", "correlat", "relat"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            bin_minutes: 15,
            rng_seed: 42,
        }
    }
}

impl SelectionRules {
    pub fn validate(&self) -> Result<(), SelectError> {
        if self.cause_words.is_empty() {
            return Err(SelectError::NoCauseWords);
        }
        for w in &self.cause_words {
            if *w != w.to_lowercase() {
                return Err(SelectError::CauseWordCase(w.clone()));
            }
        }
        for s in &self.bidirectional_stems {
            if *s != s.to_lowercase() {
                return Err(SelectError::StemCase(s.clone()));
            }
        }
        if self.bin_minutes == 0 {
            return Err(SelectError::ZeroBin);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Classification {
    /// Exactly one causation token, no bidirectional token.
    Causal,
    /// No causation token, no bidirectional token.
    ControlEligible,
    /// Several causation tokens, or any bidirectional token.
    Excluded,
}

/// Classifies one document against the rules. Matching is on lowercased
/// tokens: causation words match whole tokens (with multiplicity),
/// bidirectional stems match by prefix.
pub fn classify(doc: &Document, rules: &SelectionRules) -> Classification {
    let bidirectional = doc.tokens_lower.iter().any(|t| {
        rules
            .bidirectional_stems
            .iter()
            .any(|stem| t.starts_with(stem.as_str()))
    });
    if bidirectional {
        return Classification::Excluded;
    }
    let causal_tokens = doc
        .tokens_lower
        .iter()
        .filter(|t| rules.cause_words.contains(*t))
        .count();
    match causal_tokens {
        0 => Classification::ControlEligible,
        1 => Classification::Causal,
        _ => Classification::Excluded,
    }
}

/// Per-bin bookkeeping: how many causal documents fell in the bin, how many
/// controls were actually drawn, and the shortfall when the bin ran dry.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct BinStats {
    pub causal: u64,
    pub control: u64,
    pub shortfall: u64,
}

/// The two corpora plus the per-bin audit map. Both corpora are sorted by
/// `(timestamp, id)`.
#[derive(Debug, Clone)]
pub struct CorpusPair {
    pub causal: Vec<Document>,
    pub control: Vec<Document>,
    pub per_bin_counts: BTreeMap<DateTime<Utc>, BinStats>,
    pub excluded: u64,
}

impl CorpusPair {
    /// Causal documents for which no control could be drawn.
    pub fn total_shortfall(&self) -> u64 {
        self.per_bin_counts.values().map(|b| b.shortfall).sum()
    }
}

/// Start of the clock-aligned bin containing `ts`.
pub fn bin_start(ts: DateTime<Utc>, bin_minutes: u32) -> DateTime<Utc> {
    let width = i64::from(bin_minutes) * 60;
    let start = ts.timestamp().div_euclid(width) * width;
    DateTime::<Utc>::from_timestamp(start, 0).expect("bin start in chrono range")
}

fn sort_key(doc: &Document) -> (DateTime<Utc>, &str) {
    (doc.timestamp, doc.id.as_str())
}

/// Splits `docs` into the causal corpus and a bin-matched control sample.
/// Document ids are assumed unique (ingest already deduplicates).
pub fn build_corpus_pair(
    docs: Vec<Document>,
    rules: &SelectionRules,
) -> Result<CorpusPair, SelectError> {
    rules.validate()?;
    let mut causal = Vec::new();
    let mut eligible: BTreeMap<i64, Vec<Document>> = BTreeMap::new();
    let mut causal_per_bin: BTreeMap<i64, u64> = BTreeMap::new();
    let mut excluded = 0u64;
    for doc in docs {
        match classify(&doc, rules) {
            Classification::Causal => {
                let bin = bin_start(doc.timestamp, rules.bin_minutes).timestamp();
                *causal_per_bin.entry(bin).or_default() += 1;
                causal.push(doc);
            }
            Classification::ControlEligible => {
                let bin = bin_start(doc.timestamp, rules.bin_minutes).timestamp();
                eligible.entry(bin).or_default().push(doc);
            }
            Classification::Excluded => excluded += 1,
        }
    }

    let mut control = Vec::new();
    let mut per_bin_counts = BTreeMap::new();
    for (&bin, &causal_count) in &causal_per_bin {
        let pool = eligible.get_mut(&bin).map(Vec::as_mut_slice).unwrap_or(&mut []);
        pool.sort_by(|a, b| a.id.cmp(&b.id));
        let want = causal_count as usize;
        let take = want.min(pool.len());
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed2(rules.rng_seed, bin as u64, 0));
        let mut picked: Vec<usize> = rand::seq::index::sample(&mut rng, pool.len(), take).into_vec();
        picked.sort_unstable();
        for idx in picked {
            control.push(pool[idx].clone());
        }
        let stats = BinStats {
            causal: causal_count,
            control: take as u64,
            shortfall: causal_count - take as u64,
        };
        per_bin_counts.insert(
            DateTime::<Utc>::from_timestamp(bin, 0).expect("bin start in chrono range"),
            stats,
        );
    }

    causal.sort_by(|a, b| sort_key(a).cmp(&sort_key(b)));
    control.sort_by(|a, b| sort_key(a).cmp(&sort_key(b)));
    Ok(CorpusPair {
        causal,
        control,
        per_bin_counts,
        excluded,
    })
}
