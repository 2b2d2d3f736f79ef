//! Lexicon-based sentiment: recentered word scores, frequency-weighted
//! corpus means over the salient vocabulary, score histograms (optionally
//! split by part of speech), a Welch t-test on token-level scores, and the
//! comparison of imported five-class document labels.
//!
//! The scored vocabulary Ṽ of a corpus holds the words that both carry a
//! lexicon score and have a tf-idf strictly above the corpus's percentile
//! cutoff. Because tf-idf is zero for a word occurring in every document,
//! the causation words that define the causal corpus are guaranteed to drop
//! out of its Ṽ rather than bias the comparison.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

use crate::ingest::Document;
use crate::stats::{FrequencyTable, StatsError};

#[derive(Debug, Error)]
pub enum SentimentError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("lexicon line {0}: expected word<TAB>score, got {1:?}")]
    LexiconSyntax(usize, String),
    #[error("lexicon is empty")]
    EmptyLexicon,
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("scored vocabulary of {0} is empty")]
    EmptyVocabulary(String),
    #[error("document {0} has no POS tags but a POS filter was requested")]
    MissingPosTags(String),
    #[error("histogram needs at least 1 bin")]
    ZeroBins,
    #[error("histogram specs differ, cannot merge")]
    SpecMismatch,
    #[error("need at least 2 observations per sample, got {0}")]
    TooFewObservations(u64),
    #[error("both samples have zero variance, t statistic undefined")]
    ZeroVariance,
    #[error("label line {0}: expected id<TAB>class")]
    LabelSyntax(usize),
    #[error("label line {0}: unknown class {1:?}")]
    UnknownClass(usize, String),
    #[error("no corpus document carries a sentiment label")]
    NoLabeledDocuments,
}

/// Word scores with the lexicon mean subtracted, so that zero is the
/// lexicon-average sentiment and sign carries meaning.
///
/// Scores live in a BTreeMap so every derived float (mean, range) is summed
/// in one fixed order; hash-order summation changes the last ulp from run to
/// run and breaks byte-identical artifacts.
#[derive(Debug, Clone)]
pub struct SentimentLexicon {
    raw: BTreeMap<String, f64>,
    pub mean_raw: f64,
}

impl SentimentLexicon {
    pub fn from_entries<I, S>(entries: I) -> Result<Self, SentimentError>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        let raw: BTreeMap<String, f64> = entries
            .into_iter()
            .map(|(w, s)| (w.into(), s))
            .collect();
        if raw.is_empty() {
            return Err(SentimentError::EmptyLexicon);
        }
        let mean_raw = raw.values().sum::<f64>() / raw.len() as f64;
        Ok(SentimentLexicon { raw, mean_raw })
    }

    /// Loads a `word<TAB>score` TSV. `#` lines and blank lines are skipped.
    pub fn load(path: &Path) -> Result<Self, SentimentError> {
        let text = std::fs::read_to_string(path).map_err(|source| SentimentError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut entries = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let mut fields = line.splitn(2, '\t');
            let word = fields.next().unwrap_or_default();
            let score = fields
                .next()
                .and_then(|s| s.trim().parse::<f64>().ok())
                .ok_or_else(|| SentimentError::LexiconSyntax(lineno + 1, line.to_string()))?;
            if word.is_empty() {
                return Err(SentimentError::LexiconSyntax(lineno + 1, line.to_string()));
            }
            entries.push((word.to_string(), score));
        }
        Self::from_entries(entries)
    }

    pub fn len(&self) -> usize {
        self.raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.is_empty()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.raw.contains_key(word)
    }

    pub fn raw_score(&self, word: &str) -> Option<f64> {
        self.raw.get(word).copied()
    }

    /// Recentered score s(w) = raw(w) − mean_raw.
    pub fn score(&self, word: &str) -> Option<f64> {
        self.raw.get(word).map(|s| s - self.mean_raw)
    }

    /// (min, max) of the recentered scores.
    pub fn recentered_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for s in self.raw.values() {
            let r = s - self.mean_raw;
            lo = lo.min(r);
            hi = hi.max(r);
        }
        (lo, hi)
    }
}

/// The salient scored words of one corpus.
#[derive(Debug, Clone, Serialize)]
pub struct ScoredVocabulary {
    pub label: String,
    pub words: BTreeSet<String>,
    /// Fraction of the corpus's token occurrences covered by `words`.
    pub coverage: f64,
}

impl ScoredVocabulary {
    /// Ṽ = words with a lexicon score whose tf-idf strictly exceeds the
    /// nearest-rank `percentile` cutoff over all items of `table`. The
    /// cutoff is computed over the whole table, not just lexicon words.
    pub fn build(
        label: &str,
        table: &FrequencyTable,
        lex: &SentimentLexicon,
        percentile: f64,
    ) -> Result<Self, SentimentError> {
        let cutoff = crate::stats::tfidf_percentile_cutoff(table, percentile)?;
        let mut words = BTreeSet::new();
        let mut covered = 0u64;
        for (item, f) in table.iter() {
            if lex.contains(item) && table.tfidf(item).unwrap() > cutoff {
                words.insert(item.to_string());
                covered += f;
            }
        }
        let coverage = if table.total == 0 {
            0.0
        } else {
            covered as f64 / table.total as f64
        };
        Ok(ScoredVocabulary {
            label: label.to_string(),
            words,
            coverage,
        })
    }
}

/// Frequency-weighted mean of recentered scores over Ṽ:
/// Σ f(w)·s(w) / Σ f(w).
pub fn corpus_mean_score(
    table: &FrequencyTable,
    vocab: &ScoredVocabulary,
    lex: &SentimentLexicon,
) -> Result<f64, SentimentError> {
    if vocab.words.is_empty() {
        return Err(SentimentError::EmptyVocabulary(vocab.label.clone()));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for word in &vocab.words {
        let f = table.count_of(word) as f64;
        let s = lex.score(word).unwrap_or(0.0);
        num += f * s;
        den += f;
    }
    if den == 0.0 {
        return Err(SentimentError::EmptyVocabulary(vocab.label.clone()));
    }
    Ok(num / den)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistogramSpec {
    pub lo: f64,
    pub hi: f64,
    pub bins: usize,
}

impl HistogramSpec {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Result<Self, SentimentError> {
        if bins == 0 {
            return Err(SentimentError::ZeroBins);
        }
        // guard degenerate ranges so every value lands in a real bin
        let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, lo + 0.5) };
        Ok(HistogramSpec { lo, hi, bins })
    }

    /// Uniform bins spanning the recentered lexicon range.
    pub fn from_lexicon(lex: &SentimentLexicon, bins: usize) -> Result<Self, SentimentError> {
        let (lo, hi) = lex.recentered_range();
        Self::new(lo, hi, bins)
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.bins as f64
    }

    /// Bin index for a value; out-of-range values clamp to the edge bins.
    pub fn bin_of(&self, value: f64) -> usize {
        let idx = ((value - self.lo) / self.width()).floor();
        (idx.max(0.0) as usize).min(self.bins - 1)
    }

    pub fn edges(&self, bin: usize) -> (f64, f64) {
        let w = self.width();
        (self.lo + bin as f64 * w, self.lo + (bin + 1) as f64 * w)
    }
}

/// Weighted score histogram plus the token accounting around it. With the
/// default token weighting and no POS filter,
/// `total_weight() + unscored_tokens == total_tokens`.
#[derive(Debug, Clone, Serialize)]
pub struct Histogram {
    pub spec: HistogramSpec,
    pub weights: Vec<f64>,
    /// Tokens whose word is in Ṽ.
    pub scored_tokens: u64,
    /// Scored tokens that passed the POS filter and entered the histogram.
    pub in_hist: u64,
    /// Tokens whose word is not in Ṽ.
    pub unscored_tokens: u64,
    pub total_tokens: u64,
    /// in_hist / scored_tokens: the fraction of scored text the POS filter
    /// kept (1 when no filter, 0 when nothing was scored).
    pub filter_coverage: f64,
}

impl Histogram {
    fn empty(spec: HistogramSpec) -> Self {
        Histogram {
            weights: vec![0.0; spec.bins],
            spec,
            scored_tokens: 0,
            in_hist: 0,
            unscored_tokens: 0,
            total_tokens: 0,
            filter_coverage: 0.0,
        }
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Adds a shard histogram built over a disjoint document set.
    pub fn merge(&mut self, other: &Histogram) -> Result<(), SentimentError> {
        if self.spec != other.spec || self.weights.len() != other.weights.len() {
            return Err(SentimentError::SpecMismatch);
        }
        for (w, o) in self.weights.iter_mut().zip(&other.weights) {
            *w += o;
        }
        self.scored_tokens += other.scored_tokens;
        self.in_hist += other.in_hist;
        self.unscored_tokens += other.unscored_tokens;
        self.total_tokens += other.total_tokens;
        self.filter_coverage = if self.scored_tokens == 0 {
            0.0
        } else {
            self.in_hist as f64 / self.scored_tokens as f64
        };
        Ok(())
    }
}

/// Coarse part-of-speech classes for histogram partitioning, matched by
/// Penn Treebank tag prefix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PosClass {
    Noun,
    Verb,
    Adjective,
}

impl PosClass {
    pub fn matches(&self, tag: &str) -> bool {
        match self {
            PosClass::Noun => tag.starts_with("NN"),
            PosClass::Verb => tag.starts_with("VB"),
            PosClass::Adjective => tag.starts_with("JJ"),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            PosClass::Noun => "noun",
            PosClass::Verb => "verb",
            PosClass::Adjective => "adjective",
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct DistributionOptions {
    pub pos_filter: Option<PosClass>,
    /// Weigh each distinct qualifying word once instead of once per token.
    pub type_weighted: bool,
}

/// Histogram of recentered scores over the corpus's tokens whose word is in
/// Ṽ, token-weighted by default. A POS filter restricts to tokens whose tag
/// matches the class and requires tags on every document.
pub fn score_distribution(
    corpus: &[Document],
    vocab: &ScoredVocabulary,
    lex: &SentimentLexicon,
    spec: HistogramSpec,
    pos_filter: Option<PosClass>,
) -> Result<Histogram, SentimentError> {
    score_distribution_with(
        corpus,
        vocab,
        lex,
        spec,
        &DistributionOptions {
            pos_filter,
            type_weighted: false,
        },
    )
}

pub fn score_distribution_with(
    corpus: &[Document],
    vocab: &ScoredVocabulary,
    lex: &SentimentLexicon,
    spec: HistogramSpec,
    options: &DistributionOptions,
) -> Result<Histogram, SentimentError> {
    let mut hist = Histogram::empty(spec);
    let mut seen_types: BTreeSet<&str> = BTreeSet::new();
    for doc in corpus {
        let tags = match (options.pos_filter, &doc.pos_tags) {
            (Some(_), None) => return Err(SentimentError::MissingPosTags(doc.id.clone())),
            (Some(_), Some(tags)) => Some(tags),
            (None, _) => None,
        };
        for (i, word) in doc.tokens_lower.iter().enumerate() {
            hist.total_tokens += 1;
            if !vocab.words.contains(word) {
                hist.unscored_tokens += 1;
                continue;
            }
            hist.scored_tokens += 1;
            if let (Some(class), Some(tags)) = (options.pos_filter, tags) {
                if !class.matches(&tags[i]) {
                    continue;
                }
            }
            hist.in_hist += 1;
            if options.type_weighted && !seen_types.insert(word) {
                continue;
            }
            let s = lex.score(word).expect("vocabulary word has a score");
            hist.weights[hist.spec.bin_of(s)] += 1.0;
        }
    }
    hist.filter_coverage = if hist.scored_tokens == 0 {
        0.0
    } else {
        hist.in_hist as f64 / hist.scored_tokens as f64
    };
    Ok(hist)
}

/// Summary statistics of one token-level score sample.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScoreSample {
    pub n: u64,
    pub mean: f64,
    /// Unbiased sample variance (n − 1 denominator); 0 when n < 2.
    pub variance: f64,
}

impl ScoreSample {
    pub fn from_values(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return ScoreSample { n: 0, mean: 0.0, variance: 0.0 };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let variance = if n < 2 {
            0.0
        } else {
            values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64
        };
        ScoreSample { n: n as u64, mean, variance }
    }

    /// The token-level sample implied by a frequency table restricted to Ṽ:
    /// each occurrence of word w contributes one observation s(w).
    pub fn from_table(
        table: &FrequencyTable,
        vocab: &ScoredVocabulary,
        lex: &SentimentLexicon,
    ) -> Self {
        let mut n = 0u64;
        let mut sum = 0.0;
        for word in &vocab.words {
            let f = table.count_of(word);
            n += f;
            sum += f as f64 * lex.score(word).unwrap_or(0.0);
        }
        if n == 0 {
            return ScoreSample { n: 0, mean: 0.0, variance: 0.0 };
        }
        let mean = sum / n as f64;
        let mut ss = 0.0;
        for word in &vocab.words {
            let f = table.count_of(word) as f64;
            let d = lex.score(word).unwrap_or(0.0) - mean;
            ss += f * d * d;
        }
        let variance = if n < 2 { 0.0 } else { ss / (n - 1) as f64 };
        ScoreSample { n, mean, variance }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TTest {
    pub t: f64,
    pub df: f64,
    pub p: f64,
}

/// Welch's unequal-variance t-test, two-sided. One sample may have zero
/// variance; both may not.
pub fn mean_difference_test(a: &ScoreSample, b: &ScoreSample) -> Result<TTest, SentimentError> {
    let n_min = a.n.min(b.n);
    if n_min < 2 {
        return Err(SentimentError::TooFewObservations(n_min));
    }
    if a.variance == 0.0 && b.variance == 0.0 {
        return Err(SentimentError::ZeroVariance);
    }
    let va = a.variance / a.n as f64;
    let vb = b.variance / b.n as f64;
    let se = (va + vb).sqrt();
    let t = (a.mean - b.mean) / se;
    let df = (va + vb) * (va + vb)
        / (va * va / (a.n as f64 - 1.0) + vb * vb / (b.n as f64 - 1.0));
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
    let p = (2.0 * dist.cdf(-t.abs())).clamp(0.0, 1.0);
    Ok(TTest { t, df, p })
}

/// [`mean_difference_test`] over raw observation vectors.
pub fn welch_t_test(xs: &[f64], ys: &[f64]) -> Result<TTest, SentimentError> {
    mean_difference_test(&ScoreSample::from_values(xs), &ScoreSample::from_values(ys))
}

/// The five document sentiment classes, ordered most negative first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum SentimentClass {
    VeryNegative,
    Negative,
    Neutral,
    Positive,
    VeryPositive,
}

pub const SENTIMENT_CLASSES: [SentimentClass; 5] = [
    SentimentClass::VeryNegative,
    SentimentClass::Negative,
    SentimentClass::Neutral,
    SentimentClass::Positive,
    SentimentClass::VeryPositive,
];

impl SentimentClass {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_lowercase().replace('_', " ").as_str() {
            "very negative" => Some(SentimentClass::VeryNegative),
            "negative" => Some(SentimentClass::Negative),
            "neutral" => Some(SentimentClass::Neutral),
            "positive" => Some(SentimentClass::Positive),
            "very positive" => Some(SentimentClass::VeryPositive),
            _ => None,
        }
    }

    /// Snake-case name, used as a TSV column.
    pub fn key(&self) -> &'static str {
        match self {
            SentimentClass::VeryNegative => "very_negative",
            SentimentClass::Negative => "negative",
            SentimentClass::Neutral => "neutral",
            SentimentClass::Positive => "positive",
            SentimentClass::VeryPositive => "very_positive",
        }
    }

    fn index(&self) -> usize {
        SENTIMENT_CLASSES.iter().position(|c| c == self).unwrap()
    }
}

/// Imported per-document class labels (e.g. from an external five-class
/// sentiment classifier).
#[derive(Debug, Clone, Default)]
pub struct DocSentimentLabels {
    pub by_id: BTreeMap<String, SentimentClass>,
}

impl DocSentimentLabels {
    /// Loads an `id<TAB>class` TSV; classes may use spaces or underscores.
    pub fn load(path: &Path) -> Result<Self, SentimentError> {
        let text = std::fs::read_to_string(path).map_err(|source| SentimentError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut by_id = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let mut fields = line.splitn(2, '\t');
            let id = fields.next().unwrap_or_default();
            let class_text = fields
                .next()
                .ok_or(SentimentError::LabelSyntax(lineno + 1))?;
            if id.is_empty() {
                return Err(SentimentError::LabelSyntax(lineno + 1));
            }
            let class = SentimentClass::parse(class_text).ok_or_else(|| {
                SentimentError::UnknownClass(lineno + 1, class_text.to_string())
            })?;
            by_id.insert(id.to_string(), class);
        }
        Ok(DocSentimentLabels { by_id })
    }
}

/// Class proportions over the labeled documents of one corpus.
#[derive(Debug, Clone, Serialize)]
pub struct ClassDistribution {
    /// Ordered as [`SENTIMENT_CLASSES`].
    pub proportions: [f64; 5],
    pub labeled: u64,
    pub unlabeled: u64,
    /// Label ids with no matching corpus document.
    pub unknown_ids: u64,
}

pub fn class_distribution(
    labels: &DocSentimentLabels,
    corpus: &[Document],
) -> Result<ClassDistribution, SentimentError> {
    let corpus_ids: BTreeSet<&str> = corpus.iter().map(|d| d.id.as_str()).collect();
    let mut counts = [0u64; 5];
    let mut labeled = 0u64;
    for doc in corpus {
        if let Some(class) = labels.by_id.get(&doc.id) {
            counts[class.index()] += 1;
            labeled += 1;
        }
    }
    if labeled == 0 {
        return Err(SentimentError::NoLabeledDocuments);
    }
    let unknown_ids = labels
        .by_id
        .keys()
        .filter(|id| !corpus_ids.contains(id.as_str()))
        .count() as u64;
    let mut proportions = [0.0; 5];
    for (p, &c) in proportions.iter_mut().zip(&counts) {
        *p = c as f64 / labeled as f64;
    }
    Ok(ClassDistribution {
        proportions,
        labeled,
        unlabeled: corpus.len() as u64 - labeled,
        unknown_ids,
    })
}
