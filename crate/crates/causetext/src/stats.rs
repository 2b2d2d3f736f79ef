//! Frequency tables, tf-idf salience filtering, odds ratios with Wald
//! confidence intervals, and the preprocessing-variant correlation study.
//!
//! Odds ratios are engineered so that swapping the two corpora maps every
//! OR to its *bitwise* reciprocal and negates `log_or` bitwise:
//!
//! * `log_or` is computed as `ln(a·d) − ln(b·c)`; swapping reverses the
//!   subtraction, and IEEE-754 subtraction negates exactly.
//! * the OR is derived from the ratio `big/small` of the two cross products
//!   and stabilized with one reciprocal round-trip, after which `x` and
//!   `1.0/x` form a mutually reciprocal pair of floats.
//! * the Wald standard error sums `1/a + 1/b + 1/c + 1/d` in sorted cell
//!   order, so both corpus orders add in the same sequence.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

use crate::ingest::{Document, PreprocessFlags};
use crate::select::CorpusPair;
use crate::tagger::{ne_mentions, PerceptronModel};

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("document {id} has no {kind} tags")]
    MissingTags { kind: TableKind, id: String },
    #[error("cannot merge a {0} table into a {1} table")]
    KindMismatch(TableKind, TableKind),
    #[error("table is empty")]
    EmptyTable,
    #[error("percentile {0} outside [0, 100)")]
    BadPercentile(f64),
    #[error("top_k must be at least 1")]
    ZeroTopK,
    #[error("alpha {0} outside (0, 1)")]
    BadAlpha(f64),
    #[error("vectors have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least {1} points for correlation, got {0}")]
    TooFewPoints(usize, usize),
    #[error("correlation undefined: a vector has zero variance")]
    ZeroVariance,
    #[error("variant study needs all four preprocessing variants, missing {0}")]
    MissingVariant(String),
    #[error("only {0} shared non-degenerate tags between variants, need at least 3")]
    TooFewSharedTags(usize),
}

/// What a table counts: lowercased tokens, POS tags per token, or named
/// entity mentions (runs of one tag count once).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TableKind {
    Unigram,
    Pos,
    Ne,
}

impl fmt::Display for TableKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TableKind::Unigram => write!(f, "unigram"),
            TableKind::Pos => write!(f, "POS"),
            TableKind::Ne => write!(f, "NE"),
        }
    }
}

/// Occurrence and document frequencies for one corpus. Mergeable, so large
/// corpora can be counted in document shards.
#[derive(Debug, Clone)]
pub struct FrequencyTable {
    pub kind: TableKind,
    counts: HashMap<String, u64>,
    doc_freq: HashMap<String, u64>,
    /// Total occurrences (tokens, tags, or mentions).
    pub total: u64,
    /// Number of documents counted, including documents contributing no
    /// items.
    pub num_docs: u64,
}

impl FrequencyTable {
    pub fn empty(kind: TableKind) -> Self {
        FrequencyTable {
            kind,
            counts: HashMap::new(),
            doc_freq: HashMap::new(),
            total: 0,
            num_docs: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn count_of(&self, item: &str) -> u64 {
        self.counts.get(item).copied().unwrap_or(0)
    }

    pub fn doc_freq_of(&self, item: &str) -> u64 {
        self.doc_freq.get(item).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.counts.iter().map(|(k, &v)| (k.as_str(), v))
    }

    /// Items sorted by count descending, ties lexicographically.
    pub fn items_by_count(&self) -> Vec<(&str, u64)> {
        let mut v: Vec<(&str, u64)> = self.iter().collect();
        v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        v
    }

    /// ln f(item) · ln(D / df(item)), or None for unknown items.
    pub fn tfidf(&self, item: &str) -> Option<f64> {
        let f = *self.counts.get(item)?;
        let df = *self.doc_freq.get(item)?;
        Some(tfidf_value(f, df, self.num_docs))
    }

    /// Adds another shard of the same kind. Correct only when the shards
    /// cover disjoint document sets.
    pub fn merge(&mut self, other: FrequencyTable) -> Result<(), StatsError> {
        if self.kind != other.kind {
            return Err(StatsError::KindMismatch(other.kind, self.kind));
        }
        for (item, n) in other.counts {
            *self.counts.entry(item).or_default() += n;
        }
        for (item, n) in other.doc_freq {
            *self.doc_freq.entry(item).or_default() += n;
        }
        self.total += other.total;
        self.num_docs += other.num_docs;
        Ok(())
    }
}

fn tfidf_value(f: u64, df: u64, num_docs: u64) -> f64 {
    (f as f64).ln() * ((num_docs as f64) / (df as f64)).ln()
}

fn doc_items(doc: &Document, kind: TableKind) -> Result<Vec<&str>, StatsError> {
    match kind {
        TableKind::Unigram => Ok(doc.tokens_lower.iter().map(String::as_str).collect()),
        TableKind::Pos => match &doc.pos_tags {
            Some(tags) => Ok(tags.iter().map(String::as_str).collect()),
            None => Err(StatsError::MissingTags {
                kind,
                id: doc.id.clone(),
            }),
        },
        TableKind::Ne => match &doc.ne_tags {
            Some(tags) => Ok(ne_mentions(tags)),
            None => Err(StatsError::MissingTags {
                kind,
                id: doc.id.clone(),
            }),
        },
    }
}

/// Counts one corpus. Requires the relevant tags on every document for the
/// POS and NE kinds. An empty corpus yields an empty table with D = 0.
pub fn count(corpus: &[Document], kind: TableKind) -> Result<FrequencyTable, StatsError> {
    let mut table = FrequencyTable::empty(kind);
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    for doc in corpus {
        table.num_docs += 1;
        seen.clear();
        for item in doc_items(doc, kind)? {
            *table.counts.entry(item.to_string()).or_default() += 1;
            table.total += 1;
            if seen.insert(item) {
                *table.doc_freq.entry(item.to_string()).or_default() += 1;
            }
        }
    }
    Ok(table)
}

/// [`count`] over document shards on `threads` OS threads. Counts are
/// integer additions, so the merged result is identical to a sequential
/// count regardless of scheduling.
pub fn count_sharded(
    corpus: &[Document],
    kind: TableKind,
    threads: usize,
) -> Result<FrequencyTable, StatsError> {
    let threads = threads.max(1).min(corpus.len().max(1));
    if threads == 1 {
        return count(corpus, kind);
    }
    let chunk = corpus.len().div_ceil(threads);
    let results: Vec<Result<FrequencyTable, StatsError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = corpus
            .chunks(chunk)
            .map(|shard| scope.spawn(move || count(shard, kind)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("count shard panicked"))
            .collect()
    });
    let mut merged = FrequencyTable::empty(kind);
    for result in results {
        merged.merge(result?)?;
    }
    Ok(merged)
}

/// Nearest-rank percentile: the ceil(p/100 · n)-th smallest value.
fn nearest_rank(sorted: &[f64], percentile: f64) -> f64 {
    let n = sorted.len();
    let k = ((percentile / 100.0) * n as f64).ceil() as usize;
    sorted[k.clamp(1, n) - 1]
}

/// One row of the tf-idf report.
#[derive(Debug, Clone, Serialize)]
pub struct TfIdfRecord {
    pub item: String,
    pub f: u64,
    pub df: u64,
    pub tfidf: f64,
    /// Fraction (0..100] of table items with tf-idf ≤ this one.
    pub percentile_rank: f64,
    pub selected: bool,
}

/// Full per-item report behind [`tfidf_filter`], sorted by tf-idf
/// descending (ties lexicographically).
pub fn tfidf_records(
    table: &FrequencyTable,
    percentile: f64,
    top_k: usize,
) -> Result<Vec<TfIdfRecord>, StatsError> {
    if table.is_empty() || table.num_docs == 0 {
        return Err(StatsError::EmptyTable);
    }
    if !(0.0..100.0).contains(&percentile) {
        return Err(StatsError::BadPercentile(percentile));
    }
    if top_k == 0 {
        return Err(StatsError::ZeroTopK);
    }
    let by_count = table.items_by_count();
    let frequent: BTreeSet<&str> = by_count.iter().take(top_k).map(|(item, _)| *item).collect();
    let mut values: Vec<f64> = by_count
        .iter()
        .map(|(item, _)| table.tfidf(item).unwrap())
        .collect();
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let cutoff = nearest_rank(&values, percentile);
    let n = values.len() as f64;
    let mut records: Vec<TfIdfRecord> = by_count
        .iter()
        .map(|&(item, f)| {
            let tfidf = table.tfidf(item).unwrap();
            // rank of the last value <= tfidf in the sorted list
            let below = values.partition_point(|&v| v <= tfidf);
            TfIdfRecord {
                item: item.to_string(),
                f,
                df: table.doc_freq_of(item),
                tfidf,
                percentile_rank: 100.0 * below as f64 / n,
                selected: frequent.contains(item) && tfidf > cutoff,
            }
        })
        .collect();
    records.sort_by(|a, b| {
        b.tfidf
            .partial_cmp(&a.tfidf)
            .unwrap()
            .then_with(|| a.item.cmp(&b.item))
    });
    Ok(records)
}

/// Salient items: the `top_k` most frequent items (ties lexicographic)
/// whose tf-idf strictly exceeds the nearest-rank `percentile` value taken
/// over all items in the table.
pub fn tfidf_filter(
    table: &FrequencyTable,
    percentile: f64,
    top_k: usize,
) -> Result<BTreeSet<String>, StatsError> {
    Ok(tfidf_records(table, percentile, top_k)?
        .into_iter()
        .filter(|r| r.selected)
        .map(|r| r.item)
        .collect())
}

/// Nearest-rank `percentile` cutoff over the tf-idf values of every item
/// in `table`, as used by the `selected` flag of [`tfidf_records`].
pub fn tfidf_percentile_cutoff(
    table: &FrequencyTable,
    percentile: f64,
) -> Result<f64, StatsError> {
    if table.is_empty() || table.num_docs == 0 {
        return Err(StatsError::EmptyTable);
    }
    if !(0.0..100.0).contains(&percentile) {
        return Err(StatsError::BadPercentile(percentile));
    }
    let mut values: Vec<f64> = table
        .iter()
        .map(|(item, _)| table.tfidf(item).unwrap())
        .collect();
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(nearest_rank(&values, percentile))
}

/// How the unigram candidate sets of the two corpora are pooled before
/// computing odds ratios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PoolMode {
    Union,
    Intersection,
}

/// Pools each corpus's tf-idf-filtered candidates into one item set.
pub fn pooled_candidates(
    cause: &FrequencyTable,
    control: &FrequencyTable,
    percentile: f64,
    top_k: usize,
    mode: PoolMode,
) -> Result<BTreeSet<String>, StatsError> {
    let a = tfidf_filter(cause, percentile, top_k)?;
    let b = tfidf_filter(control, percentile, top_k)?;
    Ok(match mode {
        PoolMode::Union => a.union(&b).cloned().collect(),
        PoolMode::Intersection => a.intersection(&b).cloned().collect(),
    })
}

/// Two-sided normal quantile for a (1 − alpha) interval.
pub fn z_value(alpha: f64) -> f64 {
    Normal::standard().inverse_cdf(1.0 - alpha / 2.0)
}

#[derive(Debug, Clone, Copy)]
pub struct OddsOptions {
    pub alpha: f64,
    /// Add 0.5 to every cell of tables with a zero cell
    /// (Haldane-Anscombe). Off by default; zero-cell records are just
    /// flagged degenerate.
    pub haldane: bool,
}

impl Default for OddsOptions {
    fn default() -> Self {
        OddsOptions {
            alpha: 0.05,
            haldane: false,
        }
    }
}

/// One item's 2×2 table and derived statistics. Cells: `a`/`c` are the
/// item's counts in the cause/control corpus, `b`/`d` the remaining tokens.
#[derive(Debug, Clone, Serialize)]
pub struct OddsRatioRecord {
    pub item: String,
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
    pub or: f64,
    pub log_or: f64,
    pub se: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub significant: bool,
    /// True when any cell of the (uncorrected) table is zero.
    pub degenerate: bool,
}

/// Ratio of the two cross products with one reciprocal round-trip applied,
/// after which `stabilized` and `1.0/stabilized` are bitwise mutual
/// reciprocals (see module docs).
fn stable_ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 || den == 0.0 {
        return num / den;
    }
    if num >= den {
        1.0 / (1.0 / (num / den))
    } else {
        let r = 1.0 / (1.0 / (den / num));
        1.0 / r
    }
}

fn wald_se(cells: [f64; 4]) -> f64 {
    let mut sorted = cells;
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    sorted.iter().map(|c| 1.0 / c).sum::<f64>().sqrt()
}

/// Odds ratios for `items`, cause corpus versus control corpus, with
/// log-scale Wald (1 − alpha) confidence intervals.
pub fn odds_ratios(
    cause: &FrequencyTable,
    control: &FrequencyTable,
    items: &BTreeSet<String>,
    alpha: f64,
) -> Result<Vec<OddsRatioRecord>, StatsError> {
    odds_ratios_with(cause, control, items, &OddsOptions { alpha, haldane: false })
}

pub fn odds_ratios_with(
    cause: &FrequencyTable,
    control: &FrequencyTable,
    items: &BTreeSet<String>,
    options: &OddsOptions,
) -> Result<Vec<OddsRatioRecord>, StatsError> {
    if cause.kind != control.kind {
        return Err(StatsError::KindMismatch(control.kind, cause.kind));
    }
    if !(options.alpha > 0.0 && options.alpha < 1.0) {
        return Err(StatsError::BadAlpha(options.alpha));
    }
    let z = z_value(options.alpha);
    let mut out = Vec::with_capacity(items.len());
    for item in items {
        let a = cause.count_of(item);
        let b = cause.total - a;
        let c = control.count_of(item);
        let d = control.total - c;
        let degenerate = a == 0 || b == 0 || c == 0 || d == 0;
        let cells = if degenerate && options.haldane {
            [a as f64 + 0.5, b as f64 + 0.5, c as f64 + 0.5, d as f64 + 0.5]
        } else {
            [a as f64, b as f64, c as f64, d as f64]
        };
        let num = cells[0] * cells[3];
        let den = cells[1] * cells[2];
        let or = stable_ratio(num, den);
        let log_or = num.ln() - den.ln();
        let (se, ci_low, ci_high, significant) = if degenerate && !options.haldane {
            (f64::NAN, f64::NAN, f64::NAN, false)
        } else {
            let se = wald_se(cells);
            let lo = (log_or - z * se).exp();
            let hi = (log_or + z * se).exp();
            (se, lo, hi, lo > 1.0 || hi < 1.0)
        };
        out.push(OddsRatioRecord {
            item: item.clone(),
            a,
            b,
            c,
            d,
            or,
            log_or,
            se,
            ci_low,
            ci_high,
            significant,
            degenerate,
        });
    }
    Ok(out)
}

/// Pearson correlation coefficient, clamped to [−1, 1] against rounding
/// overshoot. Needs at least two points and nonzero variance on both sides.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64, StatsError> {
    if xs.len() != ys.len() {
        return Err(StatsError::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < 2 {
        return Err(StatsError::TooFewPoints(xs.len(), 2));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let dx = x - mx;
        let dy = y - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Result of comparing POS odds-ratio vectors between punctuation kept and
/// removed, at one casing setting.
#[derive(Debug, Clone, Serialize)]
pub struct VariantComparison {
    pub variant_a: String,
    pub variant_b: String,
    pub keep_casing: bool,
    /// Pearson correlation of the two log-OR vectors.
    pub rho: f64,
    /// Tags actually correlated.
    pub n_tags: usize,
    /// Tags present but dropped because an OR was degenerate (or the tag was
    /// missing) in one of the two variants.
    pub dropped_tags: Vec<String>,
}

fn pos_log_ors(
    pair: &CorpusPair,
    model: &PerceptronModel,
    alpha: f64,
) -> Result<HashMap<String, (f64, bool)>, StatsError> {
    let tag_all = |docs: &[Document]| -> Vec<Document> {
        docs.iter()
            .map(|d| {
                let mut d = d.clone();
                model.tag_document(&mut d);
                d
            })
            .collect()
    };
    let cause = count(&tag_all(&pair.causal), TableKind::Pos)?;
    let control = count(&tag_all(&pair.control), TableKind::Pos)?;
    let items: BTreeSet<String> = cause
        .iter()
        .chain(control.iter())
        .map(|(item, _)| item.to_string())
        .collect();
    let records = odds_ratios(&cause, &control, &items, alpha)?;
    Ok(records
        .into_iter()
        .map(|r| (r.item, (r.log_or, r.degenerate)))
        .collect())
}

/// Correlates POS odds-ratio vectors across the four preprocessing
/// variants: punctuation kept vs removed, once per casing setting. All four
/// variants of the same underlying raw stream must be supplied.
pub fn variant_correlation(
    variants: &[(PreprocessFlags, CorpusPair)],
    model: &PerceptronModel,
    alpha: f64,
) -> Result<Vec<VariantComparison>, StatsError> {
    let find = |keep_punctuation: bool, keep_casing: bool| {
        let flags = PreprocessFlags {
            keep_punctuation,
            keep_casing,
        };
        variants
            .iter()
            .find(|(f, _)| *f == flags)
            .map(|(_, pair)| pair)
            .ok_or_else(|| StatsError::MissingVariant(flags.label()))
    };
    let mut out = Vec::new();
    for keep_casing in [true, false] {
        let no_punct = find(false, keep_casing)?;
        let punct = find(true, keep_casing)?;
        let a = pos_log_ors(no_punct, model, alpha)?;
        let b = pos_log_ors(punct, model, alpha)?;
        let all_tags: BTreeSet<&String> = a.keys().chain(b.keys()).collect();
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        let mut dropped = Vec::new();
        for tag in all_tags {
            match (a.get(tag), b.get(tag)) {
                (Some(&(x, false)), Some(&(y, false))) => {
                    xs.push(x);
                    ys.push(y);
                }
                _ => dropped.push(tag.clone()),
            }
        }
        if xs.len() < 3 {
            return Err(StatsError::TooFewSharedTags(xs.len()));
        }
        out.push(VariantComparison {
            variant_a: PreprocessFlags { keep_punctuation: false, keep_casing }.label(),
            variant_b: PreprocessFlags { keep_punctuation: true, keep_casing }.label(),
            keep_casing,
            rho: pearson(&xs, &ys)?,
            n_tags: xs.len(),
            dropped_tags: dropped,
        });
    }
    Ok(out)
}
