//! Cause-trees: for a causation word, the most frequent one-token n-gram
//! continuations, grown as a binary tree forward (words following) or
//! backward (words preceding), with per-document rates for the deepest
//! n-grams.
//!
//! With the defaults (depth 3, branching 2) a tree bottoms out in 4-grams,
//! e.g. `causes -> pain -> in -> my`; the rate of a 4-gram is its count
//! divided by the number of documents.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::Serialize;
use thiserror::Error;

use crate::ingest::Document;

#[derive(Debug, Error)]
pub enum TreeError {
    #[error("max_n must be at least 1")]
    BadMaxN,
    #[error("branch must be at least 1")]
    ZeroBranch,
    #[error("root {0:?} does not occur in the corpus")]
    RootAbsent(String),
    #[error("max_depth {max_depth} needs {need}-grams but the index only holds up to {max_n}-grams")]
    DepthExceedsIndex {
        max_depth: usize,
        need: usize,
        max_n: usize,
    },
}

#[derive(Debug, Clone, Copy, Default)]
struct GramEntry {
    count: u64,
    docs: u64,
}

/// Contiguous n-gram counts over `tokens_lower`, per length, plus the
/// number of documents they came from. N-grams never span documents.
#[derive(Debug, Clone)]
pub struct NGramIndex {
    by_len: Vec<HashMap<Vec<String>, GramEntry>>,
    pub num_docs: u64,
    pub max_n: usize,
}

impl NGramIndex {
    /// Occurrences of `gram` across the corpus.
    pub fn count(&self, gram: &[String]) -> u64 {
        self.by_len
            .get(gram.len().wrapping_sub(1))
            .and_then(|m| m.get(gram))
            .map(|e| e.count)
            .unwrap_or(0)
    }

    /// Documents containing `gram` at least once.
    pub fn docs_containing(&self, gram: &[String]) -> u64 {
        self.by_len
            .get(gram.len().wrapping_sub(1))
            .and_then(|m| m.get(gram))
            .map(|e| e.docs)
            .unwrap_or(0)
    }

    /// Number of distinct n-grams of length `n`.
    pub fn distinct(&self, n: usize) -> usize {
        self.by_len.get(n.wrapping_sub(1)).map_or(0, HashMap::len)
    }

    /// Adds counts from another shard covering disjoint documents.
    pub fn merge(&mut self, other: NGramIndex) -> Result<(), TreeError> {
        if other.max_n != self.max_n {
            return Err(TreeError::BadMaxN);
        }
        for (ours, theirs) in self.by_len.iter_mut().zip(other.by_len) {
            for (gram, entry) in theirs {
                let slot = ours.entry(gram).or_default();
                slot.count += entry.count;
                slot.docs += entry.docs;
            }
        }
        self.num_docs += other.num_docs;
        Ok(())
    }
}

/// Indexes every within-document contiguous n-gram up to `max_n` tokens.
pub fn build_index(corpus: &[Document], max_n: usize) -> Result<NGramIndex, TreeError> {
    if max_n < 1 {
        return Err(TreeError::BadMaxN);
    }
    let mut by_len: Vec<HashMap<Vec<String>, GramEntry>> = vec![HashMap::new(); max_n];
    let mut seen: HashSet<&[String]> = HashSet::new();
    for doc in corpus {
        seen.clear();
        let tokens = &doc.tokens_lower;
        for n in 1..=max_n.min(tokens.len()) {
            let map = &mut by_len[n - 1];
            for window in tokens.windows(n) {
                let entry = map.entry(window.to_vec()).or_default();
                entry.count += 1;
                if seen.insert(window) {
                    entry.docs += 1;
                }
            }
        }
    }
    Ok(NGramIndex {
        by_len,
        num_docs: corpus.len() as u64,
        max_n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Extend with words following the n-gram.
    Forward,
    /// Extend with words preceding the n-gram.
    Backward,
}

/// Whether deep-ngram rates divide occurrence counts or containing-document
/// counts by D. Ranking inside the tree always uses occurrence counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum RateMode {
    #[default]
    Occurrences,
    Documents,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct TreeNode {
    pub ngram: Vec<String>,
    pub count: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    pub children: Vec<TreeNode>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CauseTree {
    pub root: String,
    pub direction: Direction,
    pub max_depth: usize,
    pub rate_mode: RateMode,
    pub tree: TreeNode,
    /// Rates of the deepest n-grams, keyed by their space-joined tokens.
    pub rates: BTreeMap<String, f64>,
}

fn extensions(
    index: &NGramIndex,
    gram: &[String],
    direction: Direction,
) -> Vec<(Vec<String>, u64)> {
    let longer = &index.by_len[gram.len()]; // (len+1)-grams
    let mut found: Vec<(Vec<String>, u64, &str)> = longer
        .iter()
        .filter(|(h, _)| match direction {
            Direction::Forward => &h[..gram.len()] == gram,
            Direction::Backward => &h[1..] == gram,
        })
        .map(|(h, e)| {
            let token = match direction {
                Direction::Forward => h[gram.len()].as_str(),
                Direction::Backward => h[0].as_str(),
            };
            (h.clone(), e.count, token)
        })
        .collect();
    found.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.2.cmp(b.2)));
    found.into_iter().map(|(h, c, _)| (h, c)).collect()
}

/// Grows the tree for `root`. Every frontier n-gram is extended by one token
/// in `direction`, keeping the `branch` highest-count extensions (ties
/// lexicographic on the new token), until `max_depth` extensions have been
/// made or no continuation occurs in the corpus.
pub fn grow_tree(
    index: &NGramIndex,
    root: &str,
    direction: Direction,
    max_depth: usize,
    branch: usize,
) -> Result<CauseTree, TreeError> {
    grow_tree_with(index, root, direction, max_depth, branch, RateMode::default())
}

pub fn grow_tree_with(
    index: &NGramIndex,
    root: &str,
    direction: Direction,
    max_depth: usize,
    branch: usize,
    rate_mode: RateMode,
) -> Result<CauseTree, TreeError> {
    if branch < 1 {
        return Err(TreeError::ZeroBranch);
    }
    let need = max_depth + 1;
    if need > index.max_n {
        return Err(TreeError::DepthExceedsIndex {
            max_depth,
            need,
            max_n: index.max_n,
        });
    }
    let root_gram = vec![root.to_string()];
    if index.count(&root_gram) == 0 {
        return Err(TreeError::RootAbsent(root.to_string()));
    }
    let full_len = max_depth + 1;
    let mut rates = BTreeMap::new();
    let tree = grow_node(index, root_gram, direction, full_len, branch, rate_mode, &mut rates);
    Ok(CauseTree {
        root: root.to_string(),
        direction,
        max_depth,
        rate_mode,
        tree,
        rates,
    })
}

fn grow_node(
    index: &NGramIndex,
    gram: Vec<String>,
    direction: Direction,
    full_len: usize,
    branch: usize,
    rate_mode: RateMode,
    rates: &mut BTreeMap<String, f64>,
) -> TreeNode {
    let count = index.count(&gram);
    let rate = if gram.len() == full_len {
        let numerator = match rate_mode {
            RateMode::Occurrences => count,
            RateMode::Documents => index.docs_containing(&gram),
        };
        let rate = numerator as f64 / index.num_docs as f64;
        rates.insert(gram.join(" "), rate);
        Some(rate)
    } else {
        None
    };
    let children = if gram.len() < full_len {
        extensions(index, &gram, direction)
            .into_iter()
            .take(branch)
            .map(|(h, _)| grow_node(index, h, direction, full_len, branch, rate_mode, rates))
            .collect()
    } else {
        Vec::new()
    };
    TreeNode {
        ngram: gram,
        count,
        rate,
        children,
    }
}
