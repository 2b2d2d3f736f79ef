//! Averaged perceptron part-of-speech tagger, plus import of external
//! POS/NE annotations.
//!
//! The tagger is a greedy left-to-right classifier over simple string
//! features (the word itself, short affixes, the two previous predicted
//! tags, the neighbouring words). Training keeps, for every feature/tag
//! weight, a lazily maintained running total so that the final model stores
//! the arithmetic mean of the weight over all update steps; averaging is
//! what makes a plain perceptron stable enough to use.
//!
//! Words seen at least [`SINGLE_TAG_MIN_FREQ`] times in training with only
//! one gold tag bypass the classifier entirely, both in training and at tag
//! time.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::Document;

/// Bumped when the model layout changes incompatibly.
pub const FORMAT_VERSION: u32 = 1;
/// Identifies the feature extractor a model was trained with. A model built
/// with a different template must not be loaded silently.
pub const FEATURE_TEMPLATE: &str = "word-affix-prevtag-window:1";
/// Minimum training occurrences before a word may take the single-tag
/// shortcut.
pub const SINGLE_TAG_MIN_FREQ: usize = 20;

const START: &str = "-START-";
const END: &str = "-END-";

#[derive(Debug, Error)]
pub enum TaggerError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("epochs must be at least 1")]
    ZeroEpochs,
    #[error("sentence {0} has {1} tokens but {2} tags")]
    ParallelLength(usize, usize, usize),
    #[error("model file {path}: {source}")]
    ModelJson {
        path: String,
        source: serde_json::Error,
    },
    #[error("model format version {0} is not supported (expected {FORMAT_VERSION})")]
    FormatVersion(u32),
    #[error("model was trained with feature template {0:?}, this build uses {FEATURE_TEMPLATE:?}")]
    TemplateMismatch(String),
    #[error("model has an empty tag set")]
    EmptyTagSet,
    #[error("treebank line {0}: token {1:?} has no /TAG suffix")]
    TreebankToken(usize, String),
    #[error("annotation line {0}: expected 3 tab-separated fields")]
    AnnotationFields(usize),
    #[error("annotation line {0}: unknown kind {1:?} (expected POS or NE)")]
    AnnotationKind(usize, String),
    #[error("annotation line {0}: invalid NE tag {1:?}")]
    InvalidNeTag(usize, String),
}

/// A perceptron with lazily averaged weights. `update` is one training step;
/// `averaged` returns, for every feature/tag pair, the mean weight over all
/// steps taken so far (steps where the weight was untouched count at its
/// then-current value).
#[derive(Debug, Default)]
pub struct AveragedPerceptron {
    weights: HashMap<String, HashMap<String, Slot>>,
    steps: u64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Slot {
    weight: f64,
    total: f64,
    stamp: u64,
}

impl AveragedPerceptron {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Scores every tag in `tags` against the active feature set and returns
    /// the best one; ties go to the lexicographically smallest tag.
    pub fn predict(&self, features: &[String], tags: &BTreeSet<String>) -> String {
        let mut scores: BTreeMap<&str, f64> = tags.iter().map(|t| (t.as_str(), 0.0)).collect();
        for feat in features {
            if let Some(by_tag) = self.weights.get(feat) {
                for (tag, slot) in by_tag {
                    if let Some(s) = scores.get_mut(tag.as_str()) {
                        *s += slot.weight;
                    }
                }
            }
        }
        let mut best: Option<(&str, f64)> = None;
        for (tag, score) in scores {
            match best {
                Some((_, s)) if score <= s => {}
                _ => best = Some((tag, score)),
            }
        }
        best.expect("tag set is nonempty").0.to_string()
    }

    /// One training step. When the guess was wrong, every active feature is
    /// nudged toward `truth` and away from `guess`.
    pub fn update(&mut self, truth: &str, guess: &str, features: &[String]) {
        self.steps += 1;
        if truth == guess {
            return;
        }
        for feat in features {
            self.bump(feat, truth, 1.0);
            self.bump(feat, guess, -1.0);
        }
    }

    fn bump(&mut self, feat: &str, tag: &str, delta: f64) {
        let slot = self
            .weights
            .entry(feat.to_string())
            .or_default()
            .entry(tag.to_string())
            .or_default();
        // Credit the outgoing weight for the steps it was in effect
        // (exclusive of the current step, which the new weight covers).
        slot.total += slot.weight * (self.steps - slot.stamp) as f64;
        slot.stamp = self.steps;
        slot.weight += delta;
    }

    /// Mean weight per feature/tag over all steps. Exact zeros are dropped.
    pub fn averaged(&self) -> BTreeMap<String, BTreeMap<String, f64>> {
        let mut out: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
        if self.steps == 0 {
            return out;
        }
        for (feat, by_tag) in &self.weights {
            for (tag, slot) in by_tag {
                let total = slot.total + slot.weight * (self.steps - slot.stamp + 1) as f64;
                let avg = total / self.steps as f64;
                if avg != 0.0 {
                    out.entry(feat.clone())
                        .or_default()
                        .insert(tag.clone(), avg);
                }
            }
        }
        out
    }
}

/// The serializable tagging model.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PerceptronModel {
    pub format_version: u32,
    pub feature_template: String,
    pub epochs_trained: u32,
    pub tag_set: BTreeSet<String>,
    /// Unambiguous frequent words that skip the classifier.
    pub single_tag_words: BTreeMap<String, String>,
    pub weights: BTreeMap<String, BTreeMap<String, f64>>,
}

fn features(tokens: &[String], i: usize, prev: &str, prev2: &str) -> Vec<String> {
    let lower = tokens[i].to_lowercase();
    let chars: Vec<char> = lower.chars().collect();
    let n = chars.len();
    let mut feats = Vec::with_capacity(12);
    feats.push("bias".to_string());
    feats.push(format!("w={lower}"));
    for k in 1..=3.min(n) {
        let suf: String = chars[n - k..].iter().collect();
        feats.push(format!("suf{k}={suf}"));
    }
    if n > 0 {
        feats.push(format!("pre1={}", chars[0]));
    }
    feats.push(format!("t-1={prev}"));
    feats.push(format!("t-2t-1={prev2}+{prev}"));
    let w_prev = if i == 0 {
        START.to_string()
    } else {
        tokens[i - 1].to_lowercase()
    };
    let w_next = if i + 1 == tokens.len() {
        END.to_string()
    } else {
        tokens[i + 1].to_lowercase()
    };
    feats.push(format!("w-1={w_prev}"));
    feats.push(format!("w+1={w_next}"));
    if tokens[i].chars().any(char::is_numeric) {
        feats.push("has_digit".to_string());
    }
    if tokens[i].chars().any(char::is_uppercase) {
        feats.push("has_upper".to_string());
    }
    feats
}

fn single_tag_words(sentences: &[(Vec<String>, Vec<String>)]) -> BTreeMap<String, String> {
    let mut by_word: HashMap<&str, (usize, BTreeSet<&str>)> = HashMap::new();
    for (tokens, tags) in sentences {
        for (tok, tag) in tokens.iter().zip(tags) {
            let entry = by_word.entry(tok.as_str()).or_default();
            entry.0 += 1;
            entry.1.insert(tag.as_str());
        }
    }
    by_word
        .into_iter()
        .filter(|(_, (freq, tags))| *freq >= SINGLE_TAG_MIN_FREQ && tags.len() == 1)
        .map(|(word, (_, tags))| {
            (
                word.to_string(),
                tags.into_iter().next().unwrap().to_string(),
            )
        })
        .collect()
}

/// Trains a model on `(tokens, tags)` sentences. Sentence order is shuffled
/// each epoch from a seeded RNG, so the same inputs and seed always produce
/// the same model.
pub fn train(
    sentences: &[(Vec<String>, Vec<String>)],
    epochs: u32,
    seed: u64,
) -> Result<PerceptronModel, TaggerError> {
    if sentences.is_empty() {
        return Err(TaggerError::EmptyTrainingSet);
    }
    if epochs == 0 {
        return Err(TaggerError::ZeroEpochs);
    }
    for (i, (tokens, tags)) in sentences.iter().enumerate() {
        if tokens.len() != tags.len() {
            return Err(TaggerError::ParallelLength(i, tokens.len(), tags.len()));
        }
    }
    let shortcut = single_tag_words(sentences);
    let tag_set: BTreeSet<String> = sentences
        .iter()
        .flat_map(|(_, tags)| tags.iter().cloned())
        .collect();
    let mut perceptron = AveragedPerceptron::new();
    let mut order: Vec<usize> = (0..sentences.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..epochs {
        order.shuffle(&mut rng);
        for &si in &order {
            let (tokens, tags) = &sentences[si];
            let mut prev = START.to_string();
            let mut prev2 = START.to_string();
            for i in 0..tokens.len() {
                let guess = match shortcut.get(&tokens[i]) {
                    Some(tag) => tag.clone(),
                    None => {
                        let feats = features(tokens, i, &prev, &prev2);
                        let guess = perceptron.predict(&feats, &tag_set);
                        perceptron.update(&tags[i], &guess, &feats);
                        guess
                    }
                };
                prev2 = prev;
                prev = guess;
            }
        }
    }
    Ok(PerceptronModel {
        format_version: FORMAT_VERSION,
        feature_template: FEATURE_TEMPLATE.to_string(),
        epochs_trained: epochs,
        tag_set,
        single_tag_words: shortcut,
        weights: perceptron.averaged(),
    })
}

impl PerceptronModel {
    /// Greedy tag sequence for one sentence.
    pub fn tag_tokens(&self, tokens: &[String]) -> Vec<String> {
        let mut out = Vec::with_capacity(tokens.len());
        let mut prev = START.to_string();
        let mut prev2 = START.to_string();
        for i in 0..tokens.len() {
            let tag = match self.single_tag_words.get(&tokens[i]) {
                Some(tag) => tag.clone(),
                None => self.score_one(tokens, i, &prev, &prev2),
            };
            prev2 = prev;
            prev = tag.clone();
            out.push(tag);
        }
        out
    }

    fn score_one(&self, tokens: &[String], i: usize, prev: &str, prev2: &str) -> String {
        let feats = features(tokens, i, prev, prev2);
        let mut scores: BTreeMap<&str, f64> =
            self.tag_set.iter().map(|t| (t.as_str(), 0.0)).collect();
        for feat in &feats {
            if let Some(by_tag) = self.weights.get(feat) {
                for (tag, w) in by_tag {
                    if let Some(s) = scores.get_mut(tag.as_str()) {
                        *s += w;
                    }
                }
            }
        }
        let mut best: Option<(&str, f64)> = None;
        for (tag, score) in scores {
            match best {
                Some((_, s)) if score <= s => {}
                _ => best = Some((tag, score)),
            }
        }
        best.expect("tag set is nonempty").0.to_string()
    }

    /// Tags `doc.tokens_cased` and stores the result in `doc.pos_tags`.
    pub fn tag_document(&self, doc: &mut Document) {
        doc.pos_tags = Some(self.tag_tokens(&doc.tokens_cased));
    }

    pub fn save(&self, path: &Path) -> Result<(), TaggerError> {
        let json = serde_json::to_string_pretty(self).map_err(|source| TaggerError::ModelJson {
            path: path.display().to_string(),
            source,
        })?;
        std::fs::write(path, json).map_err(|source| TaggerError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, TaggerError> {
        let text = std::fs::read_to_string(path).map_err(|source| TaggerError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let model: PerceptronModel =
            serde_json::from_str(&text).map_err(|source| TaggerError::ModelJson {
                path: path.display().to_string(),
                source,
            })?;
        if model.format_version != FORMAT_VERSION {
            return Err(TaggerError::FormatVersion(model.format_version));
        }
        if model.feature_template != FEATURE_TEMPLATE {
            return Err(TaggerError::TemplateMismatch(model.feature_template));
        }
        if model.tag_set.is_empty() {
            return Err(TaggerError::EmptyTagSet);
        }
        Ok(model)
    }
}

/// Fraction of tokens tagged correctly over a gold-tagged set.
pub fn accuracy(model: &PerceptronModel, sentences: &[(Vec<String>, Vec<String>)]) -> f64 {
    let mut correct = 0usize;
    let mut total = 0usize;
    for (tokens, gold) in sentences {
        let predicted = model.tag_tokens(tokens);
        total += gold.len();
        correct += predicted.iter().zip(gold).filter(|(p, g)| p == g).count();
    }
    if total == 0 {
        0.0
    } else {
        correct as f64 / total as f64
    }
}

/// A sentence as parallel word and tag vectors.
pub type TaggedSentence = (Vec<String>, Vec<String>);

/// Reads a treebank file with one sentence per line and `word/TAG` tokens.
/// The tag starts after the final slash, so `1/2/CD` parses as word `1/2`.
pub fn load_treebank(path: &Path) -> Result<Vec<TaggedSentence>, TaggerError> {
    let text = std::fs::read_to_string(path).map_err(|source| TaggerError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut sentences = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut tokens = Vec::new();
        let mut tags = Vec::new();
        for piece in line.split_whitespace() {
            let Some(slash) = piece.rfind('/') else {
                return Err(TaggerError::TreebankToken(lineno + 1, piece.to_string()));
            };
            let (word, tag) = piece.split_at(slash);
            if word.is_empty() || tag.len() <= 1 {
                return Err(TaggerError::TreebankToken(lineno + 1, piece.to_string()));
            }
            tokens.push(word.to_string());
            tags.push(tag[1..].to_string());
        }
        sentences.push((tokens, tags));
    }
    if sentences.is_empty() {
        return Err(TaggerError::EmptyTrainingSet);
    }
    Ok(sentences)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AnnotationKind {
    Pos,
    Ne,
}

pub const NE_TAGS: [&str; 5] = ["Location", "Misc", "O", "Organization", "Person"];

/// External annotations of one kind, keyed by document id.
#[derive(Debug, Clone)]
pub struct AnnotationFile {
    pub kind: AnnotationKind,
    pub tags_by_id: BTreeMap<String, Vec<String>>,
}

/// Parses a TSV of `id<TAB>kind<TAB>space-separated-tags` rows into one
/// [`AnnotationFile`] per kind present (POS first). NE tags are validated
/// against [`NE_TAGS`].
pub fn load_annotation_files(path: &Path) -> Result<Vec<AnnotationFile>, TaggerError> {
    let text = std::fs::read_to_string(path).map_err(|source| TaggerError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut pos: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut ne: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.splitn(3, '\t').collect();
        if fields.len() != 3 {
            return Err(TaggerError::AnnotationFields(lineno + 1));
        }
        let tags: Vec<String> = fields[2].split_whitespace().map(str::to_string).collect();
        match fields[1] {
            "POS" => {
                pos.insert(fields[0].to_string(), tags);
            }
            "NE" => {
                for tag in &tags {
                    if !NE_TAGS.contains(&tag.as_str()) {
                        return Err(TaggerError::InvalidNeTag(lineno + 1, tag.clone()));
                    }
                }
                ne.insert(fields[0].to_string(), tags);
            }
            other => return Err(TaggerError::AnnotationKind(lineno + 1, other.to_string())),
        }
    }
    let mut out = Vec::new();
    if !pos.is_empty() {
        out.push(AnnotationFile {
            kind: AnnotationKind::Pos,
            tags_by_id: pos,
        });
    }
    if !ne.is_empty() {
        out.push(AnnotationFile {
            kind: AnnotationKind::Ne,
            tags_by_id: ne,
        });
    }
    Ok(out)
}

/// What happened during an annotation import.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ImportReport {
    pub attached: u64,
    /// `(id, token_count, tag_count)` for rows whose tag list does not match
    /// the document length; those documents are left untouched.
    pub length_mismatches: Vec<(String, usize, usize)>,
    /// Annotation ids with no matching document.
    pub unknown_ids: Vec<String>,
    /// attached / corpus size.
    pub coverage: f64,
}

/// Attaches annotations to matching documents in place. Documents without a
/// row keep their tag fields unset.
pub fn import_annotations(corpus: &mut [Document], ann: &AnnotationFile) -> ImportReport {
    let mut report = ImportReport::default();
    let by_id: HashMap<String, usize> = corpus
        .iter()
        .enumerate()
        .map(|(i, d)| (d.id.clone(), i))
        .collect();
    for (id, tags) in &ann.tags_by_id {
        match by_id.get(id.as_str()) {
            None => report.unknown_ids.push(id.clone()),
            Some(&idx) => {
                let doc = &mut corpus[idx];
                if tags.len() != doc.tokens_cased.len() {
                    report
                        .length_mismatches
                        .push((id.clone(), doc.tokens_cased.len(), tags.len()));
                    continue;
                }
                match ann.kind {
                    AnnotationKind::Pos => doc.pos_tags = Some(tags.clone()),
                    AnnotationKind::Ne => doc.ne_tags = Some(tags.clone()),
                }
                report.attached += 1;
            }
        }
    }
    report.coverage = if corpus.is_empty() {
        0.0
    } else {
        report.attached as f64 / corpus.len() as f64
    };
    report
}

/// Collapses an NE tag sequence into mentions: each maximal run of one
/// non-`O` tag is a single mention of that tag.
pub fn ne_mentions(tags: &[String]) -> Vec<&str> {
    let mut out = Vec::new();
    let mut prev: Option<&str> = None;
    for tag in tags {
        if tag != "O" && prev != Some(tag.as_str()) {
            out.push(tag.as_str());
        }
        prev = Some(tag.as_str());
    }
    out
}
