//! Topic modeling by collapsed Gibbs sampling (Latent Dirichlet
//! Allocation with symmetric Dirichlet priors), plus topic reports:
//! per-topic word rankings and per-document topic mixtures.
//!
//! One chain is strictly sequential — resampling a token mutates the shared
//! count matrices — but every (document, sweep) pair draws from its own
//! seeded RNG substream, so a fitted state is a pure function of
//! (corpus, config) and independent chains can run in parallel under
//! different seeds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use std::collections::BTreeMap;

use crate::ingest::Document;
use crate::util::{derive_seed, derive_seed2};

#[derive(Debug, Error)]
pub enum LdaError {
    #[error("topic count must be at least 1")]
    ZeroTopics,
    #[error("alpha_sum must be positive, got {0}")]
    BadAlphaSum(f64),
    #[error("beta must be positive, got {0}")]
    BadBeta(f64),
    #[error("iterations must be at least 1")]
    ZeroIterations,
    #[error("vocabulary is empty after dropping words with count < {0}")]
    EmptyVocabulary(u64),
    #[error("top_m must be at least 1")]
    ZeroTopM,
    #[error("count invariant violated: {0}")]
    InvariantViolation(String),
}

#[derive(Debug, Clone, Serialize)]
pub struct LdaConfig {
    /// Number of topics K.
    pub topics: usize,
    /// Total Dirichlet mass on the document-topic prior; the symmetric
    /// per-topic concentration is alpha_sum / K.
    pub alpha_sum: f64,
    /// Symmetric word-topic smoothing.
    pub beta: f64,
    /// Full Gibbs sweeps over the corpus.
    pub iterations: u64,
    pub seed: u64,
    /// Words with corpus count below this are dropped from the vocabulary.
    pub vocab_min_count: u64,
}

impl Default for LdaConfig {
    fn default() -> Self {
        LdaConfig {
            topics: 10,
            alpha_sum: 5.0,
            beta: 0.01,
            iterations: 1000,
            seed: 42,
            vocab_min_count: 1,
        }
    }
}

impl LdaConfig {
    pub fn validate(&self) -> Result<(), LdaError> {
        if self.topics == 0 {
            return Err(LdaError::ZeroTopics);
        }
        if !self.alpha_sum.is_finite() || self.alpha_sum <= 0.0 {
            return Err(LdaError::BadAlphaSum(self.alpha_sum));
        }
        if !self.beta.is_finite() || self.beta <= 0.0 {
            return Err(LdaError::BadBeta(self.beta));
        }
        if self.iterations == 0 {
            return Err(LdaError::ZeroIterations);
        }
        Ok(())
    }

    pub fn alpha(&self) -> f64 {
        self.alpha_sum / self.topics as f64
    }
}

/// Sufficient statistics of a (partially) fitted model. Count matrices are
/// indexed by vocabulary position and document position.
#[derive(Debug, Clone)]
pub struct TopicModelState {
    /// Topic assignment of every token, parallel to `doc_words`.
    pub z: Vec<Vec<usize>>,
    /// Word index of every in-vocabulary token of every document.
    pub doc_words: Vec<Vec<usize>>,
    /// n_wt[w][t]: tokens of word w assigned to topic t.
    pub n_wt: Vec<Vec<u64>>,
    /// n_dt[d][t]: tokens of document d assigned to topic t.
    pub n_dt: Vec<Vec<u64>>,
    /// n_t[t]: total tokens assigned to topic t.
    pub n_t: Vec<u64>,
    /// Sorted vocabulary; indices above refer to this.
    pub vocabulary: Vec<String>,
    pub doc_ids: Vec<String>,
    pub alpha: f64,
    pub beta: f64,
}

impl TopicModelState {
    pub fn num_topics(&self) -> usize {
        self.n_t.len()
    }

    /// Total in-vocabulary tokens.
    pub fn num_tokens(&self) -> u64 {
        self.n_t.iter().sum()
    }

    /// Verifies the three count identities that collapsed Gibbs must
    /// preserve: word-topic columns sum to the topic totals, document rows
    /// sum to the document lengths, and totals match the token count.
    pub fn check_invariants(&self) -> Result<(), LdaError> {
        let k = self.num_topics();
        for t in 0..k {
            let col: u64 = self.n_wt.iter().map(|row| row[t]).sum();
            if col != self.n_t[t] {
                return Err(LdaError::InvariantViolation(format!(
                    "topic {t}: word-topic column sums to {col}, topic total is {}",
                    self.n_t[t]
                )));
            }
        }
        for (d, row) in self.n_dt.iter().enumerate() {
            let sum: u64 = row.iter().sum();
            let len = self.doc_words[d].len() as u64;
            if sum != len {
                return Err(LdaError::InvariantViolation(format!(
                    "document {}: topic row sums to {sum}, document has {len} tokens",
                    self.doc_ids[d]
                )));
            }
        }
        let from_z: u64 = self.z.iter().map(|zs| zs.len() as u64).sum();
        if from_z != self.num_tokens() {
            return Err(LdaError::InvariantViolation(format!(
                "{} assignments but topic totals sum to {}",
                from_z,
                self.num_tokens()
            )));
        }
        Ok(())
    }

    /// P(w|t) = (n_wt + β) / (n_t + β|V|), one row per topic.
    pub fn phi(&self) -> Vec<Vec<f64>> {
        let v = self.vocabulary.len() as f64;
        (0..self.num_topics())
            .map(|t| {
                let den = self.n_t[t] as f64 + self.beta * v;
                (0..self.vocabulary.len())
                    .map(|w| (self.n_wt[w][t] as f64 + self.beta) / den)
                    .collect()
            })
            .collect()
    }

    /// P(t|d) = (n_dt + α) / (len_d + αK), one row per document. Documents
    /// with no in-vocabulary tokens get the uniform prior row.
    pub fn theta(&self) -> Vec<Vec<f64>> {
        let k = self.num_topics() as f64;
        self.n_dt
            .iter()
            .enumerate()
            .map(|(d, row)| {
                let den = self.doc_words[d].len() as f64 + self.alpha * k;
                row.iter().map(|&n| (n as f64 + self.alpha) / den).collect()
            })
            .collect()
    }
}

pub struct GibbsSampler {
    state: TopicModelState,
    seed: u64,
    sweeps_done: u64,
}

impl GibbsSampler {
    /// Builds the vocabulary (sorted words with count ≥ vocab_min_count over
    /// the lowercased tokens), drops out-of-vocabulary tokens, and assigns
    /// every remaining token a uniform random topic. Documents left with no
    /// tokens are retained so they still appear in theta.
    pub fn new(corpus: &[Document], config: &LdaConfig) -> Result<Self, LdaError> {
        config.validate()?;
        let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
        for doc in corpus {
            for tok in &doc.tokens_lower {
                *counts.entry(tok.as_str()).or_insert(0) += 1;
            }
        }
        let vocabulary: Vec<String> = counts
            .iter()
            .filter(|&(_, &c)| c >= config.vocab_min_count)
            .map(|(w, _)| w.to_string())
            .collect();
        if vocabulary.is_empty() {
            return Err(LdaError::EmptyVocabulary(config.vocab_min_count));
        }
        let index: BTreeMap<String, usize> = vocabulary
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();

        let k = config.topics;
        let mut state = TopicModelState {
            z: Vec::with_capacity(corpus.len()),
            doc_words: Vec::with_capacity(corpus.len()),
            n_wt: vec![vec![0; k]; vocabulary.len()],
            n_dt: Vec::with_capacity(corpus.len()),
            n_t: vec![0; k],
            vocabulary,
            doc_ids: corpus.iter().map(|d| d.id.clone()).collect(),
            alpha: config.alpha(),
            beta: config.beta,
        };
        for doc in corpus {
            let words: Vec<usize> = doc
                .tokens_lower
                .iter()
                .filter_map(|t| index.get(t.as_str()).copied())
                .collect();
            let mut rng = doc_rng(config.seed, &doc.id, 0);
            let mut zs = Vec::with_capacity(words.len());
            let mut dt = vec![0u64; k];
            for &w in &words {
                let t = rng.random_range(0..k);
                state.n_wt[w][t] += 1;
                state.n_t[t] += 1;
                dt[t] += 1;
                zs.push(t);
            }
            state.z.push(zs);
            state.doc_words.push(words);
            state.n_dt.push(dt);
        }
        Ok(GibbsSampler {
            state,
            seed: config.seed,
            sweeps_done: 0,
        })
    }

    pub fn state(&self) -> &TopicModelState {
        &self.state
    }

    pub fn sweeps_done(&self) -> u64 {
        self.sweeps_done
    }

    /// One full Gibbs sweep: every token's topic is resampled from
    /// P(z = t | rest) ∝ (n_wt − i + β)/(n_t − i + β|V|) · (n_dt − i + α),
    /// where the −i counts exclude the token itself.
    pub fn sweep(&mut self) {
        self.sweeps_done += 1;
        let s = &mut self.state;
        let k = s.n_t.len();
        let v = s.vocabulary.len() as f64;
        let mut weights = vec![0.0; k];
        for d in 0..s.doc_words.len() {
            let mut rng = doc_rng(self.seed, &s.doc_ids[d], self.sweeps_done);
            for i in 0..s.doc_words[d].len() {
                let w = s.doc_words[d][i];
                let old = s.z[d][i];
                s.n_wt[w][old] -= 1;
                s.n_dt[d][old] -= 1;
                s.n_t[old] -= 1;

                let mut total = 0.0;
                for (t, weight) in weights.iter_mut().enumerate() {
                    let p = (s.n_wt[w][t] as f64 + s.beta) / (s.n_t[t] as f64 + s.beta * v)
                        * (s.n_dt[d][t] as f64 + s.alpha);
                    *weight = p;
                    total += p;
                }
                let mut target = rng.random::<f64>() * total;
                let mut new = k - 1;
                for (t, &p) in weights.iter().enumerate() {
                    if target < p {
                        new = t;
                        break;
                    }
                    target -= p;
                }

                s.n_wt[w][new] += 1;
                s.n_dt[d][new] += 1;
                s.n_t[new] += 1;
                s.z[d][i] = new;
            }
        }
    }

    pub fn into_state(self) -> TopicModelState {
        self.state
    }
}

/// RNG substream for one (document, sweep) pair. Sweep 0 is initialization.
fn doc_rng(seed: u64, doc_id: &str, sweep: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed2(
        derive_seed(seed, doc_id.as_bytes()),
        sweep,
        0,
    ))
}

/// Runs `config.iterations` sweeps and returns the final state, verified.
pub fn fit(corpus: &[Document], config: &LdaConfig) -> Result<TopicModelState, LdaError> {
    let mut sampler = GibbsSampler::new(corpus, config)?;
    for _ in 0..config.iterations {
        sampler.sweep();
    }
    let state = sampler.into_state();
    state.check_invariants()?;
    Ok(state)
}

#[derive(Debug, Clone, Serialize)]
pub struct TopicWord {
    pub word: String,
    pub phi: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TopicReport {
    /// One row per topic: the top words by phi descending, ties broken by
    /// word ascending.
    pub top_words: Vec<Vec<TopicWord>>,
    /// One row per document, aligned with `doc_ids`.
    pub theta: Vec<Vec<f64>>,
    pub doc_ids: Vec<String>,
}

pub fn report(state: &TopicModelState, top_m: usize) -> Result<TopicReport, LdaError> {
    if top_m == 0 {
        return Err(LdaError::ZeroTopM);
    }
    let phi = state.phi();
    let mut top_words = Vec::with_capacity(phi.len());
    for row in &phi {
        let mut ranked: Vec<(usize, f64)> = row.iter().copied().enumerate().collect();
        ranked.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .unwrap()
                .then_with(|| state.vocabulary[a.0].cmp(&state.vocabulary[b.0]))
        });
        top_words.push(
            ranked
                .into_iter()
                .take(top_m)
                .map(|(w, phi)| TopicWord {
                    word: state.vocabulary[w].clone(),
                    phi,
                })
                .collect(),
        );
    }
    Ok(TopicReport {
        top_words,
        theta: state.theta(),
        doc_ids: state.doc_ids.clone(),
    })
}
