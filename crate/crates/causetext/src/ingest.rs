//! Stream ingestion: NDJSON loading, tweet-style text cleanup, and a
//! stopword-based language gate.
//!
//! Cleanup order matters and is fixed: HTML/XML entities are deleted from the
//! raw text first, then the text is split on whitespace, tokens that are
//! mentions, hashtags, or URLs are dropped, and finally (unless configured
//! otherwise) Unicode punctuation is deleted inside the surviving tokens.
//! Tokens that become empty are dropped. Every document keeps two parallel
//! token streams: the original casing (for tagging) and a lowercased copy
//! (for counting).

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::sync::LazyLock;

use chrono::{DateTime, Utc};
use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

static ENTITY_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"&\w+;").unwrap());
static PUNCT_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\p{P}").unwrap());

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("stopword directory {0} contains no files")]
    EmptyStopwordDir(String),
    #[error("stopword file for {0} is empty")]
    EmptyStopwordFile(String),
    #[error("no english stopword file found in {0}")]
    MissingEnglish(String),
}

/// One line of the input stream, as found on disk.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawDocument {
    pub id: String,
    pub text: String,
    pub timestamp: DateTime<Utc>,
    pub lang: String,
}

/// A cleaned document. `tokens_cased` and `tokens_lower` are always the same
/// length; tag vectors, when present, are parallel to them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub timestamp: DateTime<Utc>,
    pub tokens_cased: Vec<String>,
    pub tokens_lower: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pos_tags: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ne_tags: Option<Vec<String>>,
}

/// Preprocessing switches. The defaults reproduce the main analysis setup:
/// punctuation deleted, original casing kept for the tagger.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PreprocessFlags {
    pub keep_punctuation: bool,
    pub keep_casing: bool,
}

impl Default for PreprocessFlags {
    fn default() -> Self {
        PreprocessFlags {
            keep_punctuation: false,
            keep_casing: true,
        }
    }
}

impl PreprocessFlags {
    /// All four combinations, in a fixed order (used by the variant study).
    pub fn all_variants() -> [PreprocessFlags; 4] {
        [
            PreprocessFlags { keep_punctuation: false, keep_casing: true },
            PreprocessFlags { keep_punctuation: true, keep_casing: true },
            PreprocessFlags { keep_punctuation: false, keep_casing: false },
            PreprocessFlags { keep_punctuation: true, keep_casing: false },
        ]
    }

    /// Short label such as `nopunct_cased`, used in file names and reports.
    pub fn label(&self) -> String {
        format!(
            "{}_{}",
            if self.keep_punctuation { "punct" } else { "nopunct" },
            if self.keep_casing { "cased" } else { "lower" }
        )
    }
}

fn keep_token(tok: &str) -> bool {
    !(tok.starts_with('@')
        || tok.starts_with('#')
        || tok.starts_with("http://")
        || tok.starts_with("https://")
        || tok.starts_with("www."))
}

/// Cleans a raw document into token form. Timestamps are truncated to whole
/// seconds so that equality and binning never depend on sub-second precision.
pub fn preprocess(raw: &RawDocument, flags: PreprocessFlags) -> Document {
    let stripped = ENTITY_RE.replace_all(&raw.text, "");
    let mut tokens_cased = Vec::new();
    for tok in stripped.split_whitespace() {
        if !keep_token(tok) {
            continue;
        }
        let tok = if flags.keep_punctuation {
            tok.to_string()
        } else {
            PUNCT_RE.replace_all(tok, "").into_owned()
        };
        if tok.is_empty() {
            continue;
        }
        tokens_cased.push(tok);
    }
    let tokens_lower: Vec<String> = tokens_cased.iter().map(|t| t.to_lowercase()).collect();
    if !flags.keep_casing {
        tokens_cased = tokens_lower.clone();
    }
    let secs = raw.timestamp.timestamp();
    let timestamp = DateTime::<Utc>::from_timestamp(secs, 0).unwrap_or(raw.timestamp);
    Document {
        id: raw.id.clone(),
        timestamp,
        tokens_cased,
        tokens_lower,
        pos_tags: None,
        ne_tags: None,
    }
}

/// Per-language stopword sets, loaded from a directory where each file is
/// named after its language (e.g. `english`, `spanish`) and holds one word
/// per line.
#[derive(Debug, Clone, Default)]
pub struct StopwordTable {
    sets: HashMap<String, HashSet<String>>,
}

impl StopwordTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds or replaces one language's stopword set. Words are lowercased.
    pub fn insert_language<I, S>(&mut self, lang: &str, words: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let set = words
            .into_iter()
            .map(|w| w.as_ref().to_lowercase())
            .collect();
        self.sets.insert(lang.to_lowercase(), set);
    }

    /// Loads every file in `dir`. The file name is taken verbatim as the
    /// language code. Fails if the directory has no files, any file is
    /// empty, or there is no `english` file (the gate needs one).
    pub fn load_dir(dir: &Path) -> Result<Self, IngestError> {
        let mut table = StopwordTable::new();
        let entries = std::fs::read_dir(dir).map_err(|source| IngestError::Io {
            path: dir.display().to_string(),
            source,
        })?;
        let mut paths: Vec<_> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file())
            .collect();
        paths.sort();
        for path in &paths {
            let lang = path
                .file_name()
                .map(|n| n.to_string_lossy().to_lowercase())
                .unwrap_or_default();
            let text = std::fs::read_to_string(path).map_err(|source| IngestError::Io {
                path: path.display().to_string(),
                source,
            })?;
            let words: Vec<&str> = text
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .collect();
            if words.is_empty() {
                return Err(IngestError::EmptyStopwordFile(lang));
            }
            table.insert_language(&lang, words);
        }
        if table.sets.is_empty() {
            return Err(IngestError::EmptyStopwordDir(dir.display().to_string()));
        }
        if !table.sets.contains_key("english") {
            return Err(IngestError::MissingEnglish(dir.display().to_string()));
        }
        Ok(table)
    }

    pub fn languages(&self) -> impl Iterator<Item = &str> {
        self.sets.keys().map(String::as_str)
    }

    pub fn contains(&self, lang: &str, word: &str) -> bool {
        self.sets.get(lang).is_some_and(|s| s.contains(word))
    }

    fn counts(&self, tokens: &[String]) -> HashMap<&str, usize> {
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for (lang, set) in &self.sets {
            let n = tokens.iter().filter(|t| set.contains(t.as_str())).count();
            counts.insert(lang.as_str(), n);
        }
        counts
    }
}

fn declared_english(lang: &str) -> bool {
    lang.eq_ignore_ascii_case("en") || lang.eq_ignore_ascii_case("english")
}

/// Returns true when the document should be treated as English: the stream's
/// own language label says English *and* the document contains strictly more
/// English stopwords than stopwords of any other language in the table.
/// Documents with no tokens are rejected outright.
pub fn language_gate(doc: &Document, declared_lang: &str, table: &StopwordTable) -> bool {
    if doc.tokens_lower.is_empty() || !declared_english(declared_lang) {
        return false;
    }
    let counts = table.counts(&doc.tokens_lower);
    let english = *counts.get("english").unwrap_or(&0);
    counts
        .iter()
        .all(|(lang, &n)| *lang == "english" || english > n)
        && english > 0
}

/// Counters from a load or full ingest pass.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IngestReport {
    pub lines: u64,
    pub malformed: u64,
    pub duplicates: u64,
    pub rejected_language: u64,
    pub kept: u64,
}

/// Reads an NDJSON stream of [`RawDocument`]s. Malformed lines (bad JSON,
/// missing fields, unparseable timestamps, empty ids) are skipped and
/// counted; for duplicate ids the first occurrence wins.
pub fn load_ndjson(path: &Path) -> Result<(Vec<RawDocument>, IngestReport), IngestError> {
    let file = File::open(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut docs = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();
    let mut report = IngestReport::default();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|source| IngestError::Io {
            path: path.display().to_string(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        report.lines += 1;
        match serde_json::from_str::<RawDocument>(&line) {
            Ok(raw) if raw.id.is_empty() => report.malformed += 1,
            Ok(raw) => {
                if seen.insert(raw.id.clone()) {
                    docs.push(raw);
                } else {
                    report.duplicates += 1;
                }
            }
            Err(_) => report.malformed += 1,
        }
    }
    report.kept = docs.len() as u64;
    Ok((docs, report))
}

/// Cleans every raw document and applies the language gate, returning the
/// surviving documents and how many were rejected. Documents that clean
/// down to zero tokens fail the gate (no stopword majority is possible).
pub fn preprocess_and_gate(
    raws: &[RawDocument],
    flags: PreprocessFlags,
    table: &StopwordTable,
) -> (Vec<Document>, u64) {
    let mut docs = Vec::with_capacity(raws.len());
    let mut rejected = 0;
    for raw in raws {
        let doc = preprocess(raw, flags);
        if language_gate(&doc, &raw.lang, table) {
            docs.push(doc);
        } else {
            rejected += 1;
        }
    }
    (docs, rejected)
}

/// Load, clean, and gate in one pass. Documents failing the language gate
/// (including documents that clean down to zero tokens) are dropped and
/// counted in the report.
pub fn ingest_file(
    path: &Path,
    flags: PreprocessFlags,
    table: &StopwordTable,
) -> Result<(Vec<Document>, IngestReport), IngestError> {
    let (raws, mut report) = load_ndjson(path)?;
    let (docs, rejected) = preprocess_and_gate(&raws, flags, table);
    report.rejected_language = rejected;
    report.kept = docs.len() as u64;
    Ok((docs, report))
}
