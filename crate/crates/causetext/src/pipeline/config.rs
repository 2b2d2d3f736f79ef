//! Run configuration: defaults, an optional flat TOML config file, and
//! command-line overrides, merged with precedence CLI flag > file > default.
//! The resolved configuration is hashed so every artifact can be traced to
//! the exact settings that produced it.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::PipelineError;
use crate::causetree::RateMode;
use crate::ingest::PreprocessFlags;
use crate::lda::LdaConfig;
use crate::select::SelectionRules;
use crate::sentiment::PosClass;
use crate::stats::{OddsOptions, PoolMode, TableKind};
use crate::util::fnv1a64;

/// Config keys excluded from the config hash: they steer where and how fast
/// a run executes, never what the artifacts contain.
pub const HASH_EXEMPT_KEYS: [&str; 2] = ["output_dir", "threads"];

/// Command-line overrides. Every field is optional; unset fields fall back
/// to the config file and then to the defaults.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct CliOverrides {
    /// Flat TOML config file; keys mirror the long flag names.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Raw NDJSON input (id, text, timestamp, lang per line).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Directory of stopword files, one per language, filename = code.
    #[arg(long)]
    pub stopword_dir: Option<PathBuf>,
    /// Tagged training corpus, one sentence of word/TAG tokens per line.
    #[arg(long)]
    pub treebank: Option<PathBuf>,
    /// Sentiment lexicon TSV (word, score).
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    /// Document sentiment labels TSV (id, class).
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Annotation TSVs (id, kind, space-separated tags), comma-separated.
    #[arg(long, value_delimiter = ',')]
    pub annotations: Option<Vec<PathBuf>>,
    /// Where artifacts are written.
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    /// Keep punctuation characters inside tokens (true/false).
    #[arg(long)]
    pub keep_punctuation: Option<bool>,
    /// Keep the original casing in tokens_cased (true/false).
    #[arg(long)]
    pub keep_casing: Option<bool>,
    /// Exact words marking a causal statement, comma-separated.
    #[arg(long, value_delimiter = ',')]
    pub cause_words: Option<Vec<String>>,
    /// Stems whose presence excludes a document, comma-separated.
    #[arg(long, value_delimiter = ',')]
    pub bidirectional_stems: Option<Vec<String>>,
    /// Width of the control-sampling time bins, in minutes.
    #[arg(long)]
    pub bin_minutes: Option<u32>,
    /// Seed for every random choice in the run.
    #[arg(long = "seed")]
    pub rng_seed: Option<u64>,
    /// Tagger training epochs.
    #[arg(long)]
    pub epochs: Option<u32>,
    /// Item kind for freq/tfidf/odds: unigram, pos, or ne.
    #[arg(long)]
    pub kind: Option<String>,
    /// tf-idf percentile cutoff (nearest rank), 0 <= p < 100.
    #[arg(long)]
    pub percentile: Option<f64>,
    /// How many most-frequent items the tf-idf filter may keep.
    #[arg(long)]
    pub top_k: Option<usize>,
    /// Significance level for odds-ratio confidence intervals.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Apply the Haldane–Anscombe +0.5 correction to zero cells.
    #[arg(long)]
    pub haldane: Option<bool>,
    /// Pool per-corpus candidate sets by union or intersection.
    #[arg(long)]
    pub pool: Option<String>,
    /// Roots to grow cause-trees from, comma-separated.
    #[arg(long, value_delimiter = ',')]
    pub tree_roots: Option<Vec<String>>,
    /// Tree depth in extensions from the root.
    #[arg(long)]
    pub max_depth: Option<usize>,
    /// Extensions kept per node.
    #[arg(long)]
    pub branch: Option<usize>,
    /// Longest n-gram indexed.
    #[arg(long)]
    pub max_n: Option<usize>,
    /// Deepest-n-gram rate denominator semantics: occurrences or documents.
    #[arg(long)]
    pub rate_mode: Option<String>,
    /// Number of sentiment histogram bins.
    #[arg(long)]
    pub hist_bins: Option<usize>,
    /// Restrict sentiment histograms to one POS class: noun, verb, adjective.
    #[arg(long)]
    pub pos_filter: Option<String>,
    /// Weigh each distinct word once instead of once per token.
    #[arg(long)]
    pub type_weighted: Option<bool>,
    /// Topic count K.
    #[arg(long)]
    pub lda_topics: Option<usize>,
    /// Total document-topic Dirichlet mass (alpha = alpha_sum/K).
    #[arg(long)]
    pub lda_alpha_sum: Option<f64>,
    /// Word-topic smoothing.
    #[arg(long)]
    pub lda_beta: Option<f64>,
    /// Gibbs sweeps.
    #[arg(long)]
    pub lda_iterations: Option<u64>,
    /// Drop words rarer than this from the topic-model vocabulary.
    #[arg(long)]
    pub lda_vocab_min_count: Option<u64>,
    /// Words reported per topic.
    #[arg(long)]
    pub lda_top_m: Option<usize>,
    /// Shard parallelism cap for counting stages.
    #[arg(long)]
    pub threads: Option<usize>,
}

/// The config file mirror of [`CliOverrides`]: a flat TOML table whose keys
/// are the long flag names with underscores.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    input: Option<PathBuf>,
    stopword_dir: Option<PathBuf>,
    treebank: Option<PathBuf>,
    lexicon: Option<PathBuf>,
    labels: Option<PathBuf>,
    annotations: Option<Vec<PathBuf>>,
    output_dir: Option<PathBuf>,
    keep_punctuation: Option<bool>,
    keep_casing: Option<bool>,
    cause_words: Option<Vec<String>>,
    bidirectional_stems: Option<Vec<String>>,
    bin_minutes: Option<u32>,
    rng_seed: Option<u64>,
    epochs: Option<u32>,
    kind: Option<String>,
    percentile: Option<f64>,
    top_k: Option<usize>,
    alpha: Option<f64>,
    haldane: Option<bool>,
    pool: Option<String>,
    tree_roots: Option<Vec<String>>,
    max_depth: Option<usize>,
    branch: Option<usize>,
    max_n: Option<usize>,
    rate_mode: Option<String>,
    hist_bins: Option<usize>,
    pos_filter: Option<String>,
    type_weighted: Option<bool>,
    lda_topics: Option<usize>,
    lda_alpha_sum: Option<f64>,
    lda_beta: Option<f64>,
    lda_iterations: Option<u64>,
    lda_vocab_min_count: Option<u64>,
    lda_top_m: Option<usize>,
    threads: Option<usize>,
}

/// Fully resolved run settings. Optional paths stay optional — whether they
/// are required depends on the subcommand.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub input: Option<PathBuf>,
    pub stopword_dir: Option<PathBuf>,
    pub treebank: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub annotations: Vec<PathBuf>,
    pub output_dir: PathBuf,
    pub keep_punctuation: bool,
    pub keep_casing: bool,
    pub cause_words: Vec<String>,
    pub bidirectional_stems: Vec<String>,
    pub bin_minutes: u32,
    pub rng_seed: u64,
    pub epochs: u32,
    pub kind: TableKind,
    pub percentile: f64,
    pub top_k: usize,
    pub alpha: f64,
    pub haldane: bool,
    pub pool: PoolMode,
    pub tree_roots: Vec<String>,
    pub max_depth: usize,
    pub branch: usize,
    pub max_n: usize,
    pub rate_mode: RateMode,
    pub hist_bins: usize,
    pub pos_filter: Option<PosClass>,
    pub type_weighted: bool,
    pub lda_topics: usize,
    pub lda_alpha_sum: f64,
    pub lda_beta: f64,
    pub lda_iterations: u64,
    pub lda_vocab_min_count: u64,
    pub lda_top_m: usize,
    pub threads: usize,
}

fn bad(field: &str, message: impl Into<String>) -> PipelineError {
    PipelineError::Config {
        field: field.to_string(),
        message: message.into(),
    }
}

fn parse_kind(s: &str) -> Result<TableKind, PipelineError> {
    match s.to_lowercase().as_str() {
        "unigram" => Ok(TableKind::Unigram),
        "pos" => Ok(TableKind::Pos),
        "ne" => Ok(TableKind::Ne),
        other => Err(bad("kind", format!("expected unigram|pos|ne, got {other:?}"))),
    }
}

fn parse_pool(s: &str) -> Result<PoolMode, PipelineError> {
    match s.to_lowercase().as_str() {
        "union" => Ok(PoolMode::Union),
        "intersection" => Ok(PoolMode::Intersection),
        other => Err(bad("pool", format!("expected union|intersection, got {other:?}"))),
    }
}

fn parse_rate_mode(s: &str) -> Result<RateMode, PipelineError> {
    match s.to_lowercase().as_str() {
        "occurrences" => Ok(RateMode::Occurrences),
        "documents" => Ok(RateMode::Documents),
        other => Err(bad(
            "rate_mode",
            format!("expected occurrences|documents, got {other:?}"),
        )),
    }
}

fn parse_pos_filter(s: &str) -> Result<PosClass, PipelineError> {
    match s.to_lowercase().as_str() {
        "noun" => Ok(PosClass::Noun),
        "verb" => Ok(PosClass::Verb),
        "adjective" => Ok(PosClass::Adjective),
        other => Err(bad(
            "pos_filter",
            format!("expected noun|verb|adjective, got {other:?}"),
        )),
    }
}

impl PipelineConfig {
    /// Merges CLI overrides over the optional config file over defaults,
    /// then validates every value (paths are checked later, per subcommand).
    pub fn resolve(cli: &CliOverrides) -> Result<Self, PipelineError> {
        let file: FileConfig = match &cli.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    bad("config", format!("cannot read {}: {e}", path.display()))
                })?;
                toml::from_str(&text)
                    .map_err(|e| bad("config", format!("{}: {e}", path.display())))?
            }
            None => FileConfig::default(),
        };
        let rules = SelectionRules::default();
        let lda = LdaConfig::default();

        macro_rules! pick {
            ($field:ident, $default:expr) => {
                cli.$field
                    .clone()
                    .or_else(|| file.$field.clone())
                    .unwrap_or($default)
            };
        }
        macro_rules! pick_opt {
            ($field:ident) => {
                cli.$field.clone().or_else(|| file.$field.clone())
            };
        }

        let cause_words = pick!(
            cause_words,
            rules.cause_words.iter().cloned().collect::<Vec<_>>()
        );
        let config = PipelineConfig {
            input: pick_opt!(input),
            stopword_dir: pick_opt!(stopword_dir),
            treebank: pick_opt!(treebank),
            lexicon: pick_opt!(lexicon),
            labels: pick_opt!(labels),
            annotations: pick!(annotations, Vec::new()),
            output_dir: pick!(output_dir, PathBuf::from("out")),
            keep_punctuation: pick!(keep_punctuation, false),
            keep_casing: pick!(keep_casing, true),
            tree_roots: pick!(tree_roots, cause_words.clone()),
            cause_words,
            bidirectional_stems: pick!(bidirectional_stems, rules.bidirectional_stems.clone()),
            bin_minutes: pick!(bin_minutes, rules.bin_minutes),
            rng_seed: pick!(rng_seed, rules.rng_seed),
            epochs: pick!(epochs, 5),
            kind: parse_kind(&pick!(kind, "unigram".to_string()))?,
            percentile: pick!(percentile, 90.0),
            top_k: pick!(top_k, 1500),
            alpha: pick!(alpha, 0.05),
            haldane: pick!(haldane, false),
            pool: parse_pool(&pick!(pool, "union".to_string()))?,
            max_depth: pick!(max_depth, 3),
            branch: pick!(branch, 2),
            max_n: pick!(max_n, 4),
            rate_mode: parse_rate_mode(&pick!(rate_mode, "occurrences".to_string()))?,
            hist_bins: pick!(hist_bins, 50),
            pos_filter: pick_opt!(pos_filter)
                .map(|s| parse_pos_filter(&s))
                .transpose()?,
            type_weighted: pick!(type_weighted, false),
            lda_topics: pick!(lda_topics, lda.topics),
            lda_alpha_sum: pick!(lda_alpha_sum, lda.alpha_sum),
            lda_beta: pick!(lda_beta, lda.beta),
            lda_iterations: pick!(lda_iterations, lda.iterations),
            lda_vocab_min_count: pick!(lda_vocab_min_count, lda.vocab_min_count),
            lda_top_m: pick!(lda_top_m, 40),
            threads: pick!(threads, 1),
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), PipelineError> {
        if self.cause_words.is_empty() {
            return Err(bad("cause_words", "must not be empty"));
        }
        for w in &self.cause_words {
            if w.to_lowercase() != *w {
                return Err(bad("cause_words", format!("{w:?} is not lowercase")));
            }
        }
        for s in &self.bidirectional_stems {
            if s.to_lowercase() != *s {
                return Err(bad("bidirectional_stems", format!("{s:?} is not lowercase")));
            }
        }
        if self.bin_minutes == 0 {
            return Err(bad("bin_minutes", "must be positive"));
        }
        if self.epochs == 0 {
            return Err(bad("epochs", "must be at least 1"));
        }
        if !(0.0..100.0).contains(&self.percentile) {
            return Err(bad("percentile", format!("must be in [0, 100), got {}", self.percentile)));
        }
        if self.top_k == 0 {
            return Err(bad("top_k", "must be at least 1"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(bad("alpha", format!("must be in (0, 1), got {}", self.alpha)));
        }
        if self.tree_roots.is_empty() {
            return Err(bad("tree_roots", "must not be empty"));
        }
        if self.branch == 0 {
            return Err(bad("branch", "must be at least 1"));
        }
        if self.max_n < self.max_depth + 1 {
            return Err(bad(
                "max_n",
                format!(
                    "must cover max_depth + 1 = {} token n-grams, got {}",
                    self.max_depth + 1,
                    self.max_n
                ),
            ));
        }
        if self.hist_bins == 0 {
            return Err(bad("hist_bins", "must be at least 1"));
        }
        let lda = self.lda_config();
        lda.validate().map_err(|e| bad("lda", e.to_string()))?;
        if self.lda_top_m == 0 {
            return Err(bad("lda_top_m", "must be at least 1"));
        }
        if self.threads == 0 {
            return Err(bad("threads", "must be at least 1"));
        }
        Ok(())
    }

    pub fn selection_rules(&self) -> SelectionRules {
        SelectionRules {
            cause_words: self.cause_words.iter().cloned().collect::<BTreeSet<_>>(),
            bidirectional_stems: self.bidirectional_stems.clone(),
            bin_minutes: self.bin_minutes,
            rng_seed: self.rng_seed,
        }
    }

    pub fn preprocess_flags(&self) -> PreprocessFlags {
        PreprocessFlags {
            keep_punctuation: self.keep_punctuation,
            keep_casing: self.keep_casing,
        }
    }

    pub fn lda_config(&self) -> LdaConfig {
        LdaConfig {
            topics: self.lda_topics,
            alpha_sum: self.lda_alpha_sum,
            beta: self.lda_beta,
            iterations: self.lda_iterations,
            seed: self.rng_seed,
            vocab_min_count: self.lda_vocab_min_count,
        }
    }

    pub fn odds_options(&self) -> OddsOptions {
        OddsOptions {
            alpha: self.alpha,
            haldane: self.haldane,
        }
    }

    /// Canonical `key=value` lines of the effective configuration, sorted by
    /// key. The manifest echoes the full list; the config hash commits to
    /// everything except execution-only keys ([`HASH_EXEMPT_KEYS`]).
    pub fn canonical_items(&self) -> Vec<(String, String)> {
        fn path(p: &Option<PathBuf>) -> String {
            p.as_ref().map(|p| p.display().to_string()).unwrap_or_default()
        }
        let mut items: Vec<(String, String)> = vec![
            ("input".into(), path(&self.input)),
            ("stopword_dir".into(), path(&self.stopword_dir)),
            ("treebank".into(), path(&self.treebank)),
            ("lexicon".into(), path(&self.lexicon)),
            ("labels".into(), path(&self.labels)),
            (
                "annotations".into(),
                self.annotations
                    .iter()
                    .map(|p| p.display().to_string())
                    .collect::<Vec<_>>()
                    .join(","),
            ),
            ("output_dir".into(), self.output_dir.display().to_string()),
            ("keep_punctuation".into(), self.keep_punctuation.to_string()),
            ("keep_casing".into(), self.keep_casing.to_string()),
            ("cause_words".into(), self.cause_words.join(",")),
            ("bidirectional_stems".into(), self.bidirectional_stems.join(",")),
            ("bin_minutes".into(), self.bin_minutes.to_string()),
            ("rng_seed".into(), self.rng_seed.to_string()),
            ("epochs".into(), self.epochs.to_string()),
            ("kind".into(), format!("{}", self.kind)),
            ("percentile".into(), self.percentile.to_string()),
            ("top_k".into(), self.top_k.to_string()),
            ("alpha".into(), self.alpha.to_string()),
            ("haldane".into(), self.haldane.to_string()),
            (
                "pool".into(),
                match self.pool {
                    PoolMode::Union => "union".to_string(),
                    PoolMode::Intersection => "intersection".to_string(),
                },
            ),
            ("tree_roots".into(), self.tree_roots.join(",")),
            ("max_depth".into(), self.max_depth.to_string()),
            ("branch".into(), self.branch.to_string()),
            ("max_n".into(), self.max_n.to_string()),
            (
                "rate_mode".into(),
                match self.rate_mode {
                    RateMode::Occurrences => "occurrences".to_string(),
                    RateMode::Documents => "documents".to_string(),
                },
            ),
            ("hist_bins".into(), self.hist_bins.to_string()),
            (
                "pos_filter".into(),
                self.pos_filter.map(|c| c.label().to_string()).unwrap_or_default(),
            ),
            ("type_weighted".into(), self.type_weighted.to_string()),
            ("lda_topics".into(), self.lda_topics.to_string()),
            ("lda_alpha_sum".into(), self.lda_alpha_sum.to_string()),
            ("lda_beta".into(), self.lda_beta.to_string()),
            ("lda_iterations".into(), self.lda_iterations.to_string()),
            ("lda_vocab_min_count".into(), self.lda_vocab_min_count.to_string()),
            ("lda_top_m".into(), self.lda_top_m.to_string()),
            ("threads".into(), self.threads.to_string()),
        ];
        items.sort();
        items
    }

    /// 16-hex-digit fingerprint of the effective configuration. Keys that
    /// cannot change artifact content (where results land, how many threads
    /// computed them) are left out so reruns of the same analysis into
    /// different directories fingerprint identically.
    pub fn config_hash(&self) -> String {
        let mut buf = String::new();
        for (k, v) in self.canonical_items() {
            if HASH_EXEMPT_KEYS.contains(&k.as_str()) {
                continue;
            }
            buf.push_str(&k);
            buf.push('=');
            buf.push_str(&v);
            buf.push('\n');
        }
        format!("{:016x}", fnv1a64(buf.as_bytes()))
    }

    /// Errors with exit status 1 unless `path` names an existing file or
    /// directory; `field` is the config key being checked.
    pub fn require_path(field: &str, path: &Path) -> Result<(), PipelineError> {
        if path.exists() {
            Ok(())
        } else {
            Err(PipelineError::MissingPath {
                field: field.to_string(),
                path: path.to_path_buf(),
            })
        }
    }

    /// Resolves an optional path field that a subcommand requires.
    pub fn required<'a>(
        &self,
        field: &str,
        value: &'a Option<PathBuf>,
    ) -> Result<&'a Path, PipelineError> {
        let path = value
            .as_deref()
            .ok_or_else(|| bad(field, "required by this subcommand but not set"))?;
        Self::require_path(field, path)?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve(cli: &CliOverrides) -> PipelineConfig {
        PipelineConfig::resolve(cli).unwrap()
    }

    #[test]
    fn defaults_without_file_or_flags() {
        let c = resolve(&CliOverrides::default());
        assert_eq!(c.output_dir, PathBuf::from("out"));
        assert_eq!(c.cause_words, vec!["caused", "causes", "causing"]);
        assert_eq!(c.tree_roots, c.cause_words);
        assert_eq!(c.bin_minutes, 15);
        assert_eq!(c.rng_seed, 42);
        assert_eq!(c.percentile, 90.0);
        assert_eq!(c.top_k, 1500);
        assert_eq!(c.alpha, 0.05);
        assert_eq!(c.max_depth, 3);
        assert_eq!(c.branch, 2);
        assert_eq!(c.max_n, 4);
        assert_eq!(c.hist_bins, 50);
        assert_eq!(c.lda_topics, 10);
        assert_eq!(c.lda_alpha_sum, 5.0);
        assert_eq!(c.lda_iterations, 1000);
        assert_eq!(c.lda_top_m, 40);
        assert!(!c.keep_punctuation);
        assert!(c.keep_casing);
        assert!(!c.haldane);
        assert_eq!(c.threads, 1);
    }

    #[test]
    fn file_overrides_defaults_and_cli_overrides_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(
            &path,
            "rng_seed = 7\npercentile = 50.0\noutput_dir = \"from-file\"\n",
        )
        .unwrap();
        let mut cli = CliOverrides {
            config: Some(path),
            ..CliOverrides::default()
        };
        let c = resolve(&cli);
        assert_eq!(c.rng_seed, 7);
        assert_eq!(c.percentile, 50.0);
        assert_eq!(c.output_dir, PathBuf::from("from-file"));
        // CLI beats file, and untouched file values survive
        cli.rng_seed = Some(99);
        let c = resolve(&cli);
        assert_eq!(c.rng_seed, 99);
        assert_eq!(c.percentile, 50.0);
    }

    #[test]
    fn unknown_file_key_is_a_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "rngseed = 7\n").unwrap();
        let cli = CliOverrides {
            config: Some(path),
            ..CliOverrides::default()
        };
        let err = PipelineConfig::resolve(&cli).unwrap_err();
        assert_eq!(err.exit_code(), 1);
        assert!(err.to_string().contains("rngseed"), "{err}");
    }

    #[test]
    fn field_validation_names_the_field() {
        let cases: Vec<(CliOverrides, &str)> = vec![
            (
                CliOverrides { percentile: Some(100.0), ..Default::default() },
                "percentile",
            ),
            (CliOverrides { top_k: Some(0), ..Default::default() }, "top_k"),
            (CliOverrides { alpha: Some(1.5), ..Default::default() }, "alpha"),
            (CliOverrides { bin_minutes: Some(0), ..Default::default() }, "bin_minutes"),
            (CliOverrides { branch: Some(0), ..Default::default() }, "branch"),
            (CliOverrides { max_n: Some(2), ..Default::default() }, "max_n"),
            (CliOverrides { kind: Some("bigram".into()), ..Default::default() }, "kind"),
            (CliOverrides { pool: Some("both".into()), ..Default::default() }, "pool"),
            (
                CliOverrides { pos_filter: Some("adverb".into()), ..Default::default() },
                "pos_filter",
            ),
            (
                CliOverrides { cause_words: Some(vec!["CAUSED".into()]), ..Default::default() },
                "cause_words",
            ),
            (CliOverrides { lda_topics: Some(0), ..Default::default() }, "lda"),
            (CliOverrides { threads: Some(0), ..Default::default() }, "threads",),
        ];
        for (cli, field) in cases {
            let err = PipelineConfig::resolve(&cli).unwrap_err();
            assert_eq!(err.exit_code(), 1, "{field}");
            assert!(err.to_string().contains(field), "{field}: {err}");
        }
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = resolve(&CliOverrides::default());
        let b = resolve(&CliOverrides::default());
        assert_eq!(a.config_hash(), b.config_hash());
        assert_eq!(a.config_hash().len(), 16);
        let c = resolve(&CliOverrides {
            rng_seed: Some(43),
            ..CliOverrides::default()
        });
        assert_ne!(a.config_hash(), c.config_hash());
    }

    #[test]
    fn derived_helpers_mirror_fields() {
        let c = resolve(&CliOverrides {
            rng_seed: Some(5),
            keep_punctuation: Some(true),
            keep_casing: Some(false),
            lda_topics: Some(4),
            ..CliOverrides::default()
        });
        assert_eq!(c.selection_rules().rng_seed, 5);
        assert!(c.preprocess_flags().keep_punctuation);
        assert!(!c.preprocess_flags().keep_casing);
        let lda = c.lda_config();
        assert_eq!(lda.topics, 4);
        assert_eq!(lda.seed, 5);
        assert_eq!(c.odds_options().alpha, 0.05);
    }

    #[test]
    fn missing_required_path_is_exit_one() {
        let c = resolve(&CliOverrides::default());
        let err = c.required("input", &c.input).unwrap_err();
        assert_eq!(err.exit_code(), 1);
        assert!(err.to_string().contains("input"));
        let ghost = Some(PathBuf::from("/nonexistent/raw.ndjson"));
        let err = c.required("input", &ghost).unwrap_err();
        assert_eq!(err.exit_code(), 1);
        assert!(err.to_string().contains("/nonexistent/raw.ndjson"));
    }
}
