//! End-to-end orchestration: subcommand dispatch, artifact I/O, and the run
//! manifest. Each subcommand invokes one module's operations, writes its
//! declared artifacts into the output directory, and records a stage entry
//! (document counts, warnings, wall time) in `manifest.json`.
//!
//! Exit codes: 0 success, 1 configuration error (bad value or missing
//! path, message names the field), 2 data error (module rejected the
//! input), 3 internal error (artifact write failures and bugs).

pub mod artifacts;
pub mod config;

pub use artifacts::{Meta, RunManifest, StageRecord, TOOL_VERSION};
pub use config::{CliOverrides, PipelineConfig};

use std::collections::BTreeSet;
use std::fmt::Display;
use std::path::PathBuf;
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::causetree::{self, Direction};
use crate::ingest::{self, PreprocessFlags, StopwordTable};
use crate::lda::{self, GibbsSampler};
use crate::select;
use crate::sentiment::{self, DistributionOptions, HistogramSpec, ScoreSample, ScoredVocabulary,
    SentimentLexicon, SENTIMENT_CLASSES};
use crate::stats::{self, TableKind};
use crate::tagger::{self, PerceptronModel};

use artifacts::fmt_f64;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config field `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("config field `{field}`: path {} does not exist", path.display())]
    MissingPath { field: String, path: PathBuf },
    #[error("{stage}: {message}")]
    Data { stage: &'static str, message: String },
    #[error("{stage}: internal error: {message}")]
    Internal { stage: &'static str, message: String },
}

impl PipelineError {
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config { .. } | PipelineError::MissingPath { .. } => 1,
            PipelineError::Data { .. } => 2,
            PipelineError::Internal { .. } => 3,
        }
    }
}

fn data(stage: &'static str, e: impl Display) -> PipelineError {
    PipelineError::Data {
        stage,
        message: e.to_string(),
    }
}

fn internal(stage: &'static str, e: impl Display) -> PipelineError {
    PipelineError::Internal {
        stage,
        message: e.to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Ingest,
    Select,
    TagTrain,
    Tag,
    Annotate,
    Freq,
    Tfidf,
    Odds,
    Causetree,
    Sentiment,
    DocClasses,
    Lda,
    Variants,
    ReportAll,
}

impl Subcommand {
    pub fn name(&self) -> &'static str {
        match self {
            Subcommand::Ingest => "ingest",
            Subcommand::Select => "select",
            Subcommand::TagTrain => "tag-train",
            Subcommand::Tag => "tag",
            Subcommand::Annotate => "annotate",
            Subcommand::Freq => "freq",
            Subcommand::Tfidf => "tfidf",
            Subcommand::Odds => "odds",
            Subcommand::Causetree => "causetree",
            Subcommand::Sentiment => "sentiment",
            Subcommand::DocClasses => "doc-classes",
            Subcommand::Lda => "lda",
            Subcommand::Variants => "variants",
            Subcommand::ReportAll => "report-all",
        }
    }
}

/// What one stage reports into the manifest.
struct StageOutcome {
    docs_in: u64,
    docs_out: u64,
    warnings: Vec<String>,
}

struct Ctx<'a> {
    cfg: &'a PipelineConfig,
    hash: String,
}

impl<'a> Ctx<'a> {
    fn new(cfg: &'a PipelineConfig) -> Self {
        Ctx {
            cfg,
            hash: cfg.config_hash(),
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.cfg.output_dir.join(name)
    }

    fn meta(&self, sub: Subcommand) -> Meta {
        Meta::new(sub.name(), &self.hash, self.cfg.rng_seed)
    }

    /// A stage input produced by an earlier subcommand. Missing means the
    /// stages were run out of order: a data error pointing at the producer.
    fn require_artifact(
        &self,
        stage: &'static str,
        name: &str,
        producer: &str,
    ) -> Result<PathBuf, PipelineError> {
        let path = self.path(name);
        if path.exists() {
            Ok(path)
        } else {
            Err(data(
                stage,
                format!(
                    "{} not found — run `{producer}` first (or set --output-dir)",
                    path.display()
                ),
            ))
        }
    }

    fn read_pair(&self, stage: &'static str) -> Result<CorpusPairFiles, PipelineError> {
        let causal_path = self.require_artifact(stage, "causal.ndjson", "select")?;
        let control_path = self.require_artifact(stage, "control.ndjson", "select")?;
        Ok(CorpusPairFiles {
            causal: artifacts::read_documents(stage, &causal_path)?,
            control: artifacts::read_documents(stage, &control_path)?,
            causal_path,
            control_path,
        })
    }
}

struct CorpusPairFiles {
    causal: Vec<crate::ingest::Document>,
    control: Vec<crate::ingest::Document>,
    causal_path: PathBuf,
    control_path: PathBuf,
}

impl CorpusPairFiles {
    fn total(&self) -> u64 {
        (self.causal.len() + self.control.len()) as u64
    }
}

/// Runs one subcommand end to end: executes the stage (or the full chain
/// for `report-all`), updates the manifest, and saves it.
pub fn run(sub: Subcommand, cfg: &PipelineConfig) -> Result<(), PipelineError> {
    std::fs::create_dir_all(&cfg.output_dir)
        .map_err(|e| internal("setup", format!("{}: {e}", cfg.output_dir.display())))?;
    let ctx = Ctx::new(cfg);
    let mut manifest = if sub == Subcommand::ReportAll {
        RunManifest::new(&ctx.hash, cfg.canonical_items())
    } else {
        RunManifest::load_or_new(&cfg.output_dir, &ctx.hash, cfg.canonical_items())
    };
    if sub == Subcommand::ReportAll {
        let mut chain = vec![
            Subcommand::TagTrain,
            Subcommand::Ingest,
            Subcommand::Select,
            Subcommand::Tag,
        ];
        if !cfg.annotations.is_empty() {
            chain.push(Subcommand::Annotate);
        }
        chain.extend([
            Subcommand::Freq,
            Subcommand::Tfidf,
            Subcommand::Odds,
            Subcommand::Causetree,
            Subcommand::Sentiment,
        ]);
        if cfg.labels.is_some() {
            chain.push(Subcommand::DocClasses);
        }
        chain.push(Subcommand::Lda);
        for stage in chain {
            run_stage(&ctx, &mut manifest, stage)?;
        }
        println!("report-all: {} stages complete", manifest.stages.len());
    } else {
        run_stage(&ctx, &mut manifest, sub)?;
    }
    manifest.save(&cfg.output_dir)?;
    Ok(())
}

fn run_stage(
    ctx: &Ctx,
    manifest: &mut RunManifest,
    sub: Subcommand,
) -> Result<(), PipelineError> {
    let start = Instant::now();
    let outcome = match sub {
        Subcommand::Ingest => stage_ingest(ctx),
        Subcommand::Select => stage_select(ctx),
        Subcommand::TagTrain => stage_tag_train(ctx),
        Subcommand::Tag => stage_tag(ctx),
        Subcommand::Annotate => stage_annotate(ctx),
        Subcommand::Freq => stage_freq(ctx),
        Subcommand::Tfidf => stage_tfidf(ctx),
        Subcommand::Odds => stage_odds(ctx),
        Subcommand::Causetree => stage_causetree(ctx),
        Subcommand::Sentiment => stage_sentiment(ctx),
        Subcommand::DocClasses => stage_doc_classes(ctx),
        Subcommand::Lda => stage_lda(ctx),
        Subcommand::Variants => stage_variants(ctx),
        Subcommand::ReportAll => unreachable!("report-all is expanded in run()"),
    }?;
    manifest.upsert(StageRecord {
        name: sub.name().to_string(),
        docs_in: outcome.docs_in,
        docs_out: outcome.docs_out,
        warnings: outcome.warnings,
        wall_ms: start.elapsed().as_millis() as u64,
    });
    Ok(())
}

fn stage_ingest(ctx: &Ctx) -> Result<StageOutcome, PipelineError> {
    const STAGE: &str = "ingest";
    let cfg = ctx.cfg;
    let input = cfg.required("input", &cfg.input)?;
    let stopword_dir = cfg.required("stopword_dir", &cfg.stopword_dir)?;
    let table = StopwordTable::load_dir(stopword_dir).map_err(|e| data(STAGE, e))?;
    let (docs, report) =
        ingest::ingest_file(input, cfg.preprocess_flags(), &table).map_err(|e| data(STAGE, e))?;
    let out = ctx.path("documents.ndjson");
    artifacts::write_documents(STAGE, &out, &docs)?;
    let mut warnings = Vec::new();
    if report.malformed > 0 {
        warnings.push(format!("{} malformed input lines skipped", report.malformed));
    }
    if report.duplicates > 0 {
        warnings.push(format!("{} duplicate ids dropped", report.duplicates));
    }
    if report.rejected_language > 0 {
        warnings.push(format!(
            "{} documents failed the English gate",
            report.rejected_language
        ));
    }
    println!(
        "ingest: kept {} of {} lines -> {}",
        report.kept,
        report.lines,
        out.display()
    );
    Ok(StageOutcome {
        docs_in: report.lines,
        docs_out: report.kept,
        warnings,
    })
}

fn stage_select(ctx: &Ctx) -> Result<StageOutcome, PipelineError> {
    const STAGE: &str = "select";
    let docs_path = ctx.require_artifact(STAGE, "documents.ndjson", "ingest")?;
    let docs = artifacts::read_documents(STAGE, &docs_path)?;
    let docs_in = docs.len() as u64;
    let pair =
        select::build_corpus_pair(docs, &ctx.cfg.selection_rules()).map_err(|e| data(STAGE, e))?;
    artifacts::write_documents(STAGE, &ctx.path("causal.ndjson"), &pair.causal)?;
    artifacts::write_documents(STAGE, &ctx.path("control.ndjson"), &pair.control)?;
    let rows: Vec<Vec<String>> = pair
        .per_bin_counts
        .iter()
        .map(|(bin, s)| {
            vec![
                bin.to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
                s.causal.to_string(),
                s.control.to_string(),
                s.shortfall.to_string(),
            ]
        })
        .collect();
    artifacts::write_tsv(
        STAGE,
        &ctx.path("bins.tsv"),
        &ctx.meta(Subcommand::Select),
        &[("bin_minutes", ctx.cfg.bin_minutes.to_string())],
        &["bin_start", "causal_count", "control_count", "shortfall"],
        &rows,
    )?;
    let mut warnings = Vec::new();
    if pair.excluded > 0 {
        warnings.push(format!(
            "{} documents excluded (bidirectional stems or repeated cause words)",
            pair.excluded
        ));
    }
    let shortfall = pair.total_shortfall();
    if shortfall > 0 {
        warnings.push(format!("{shortfall} causal documents lack a matched control"));
    }
    println!(
        "select: {} causal + {} control documents across {} bins ({} excluded) -> {}",
        pair.causal.len(),
        pair.control.len(),
        pair.per_bin_counts.len(),
        pair.excluded,
        ctx.cfg.output_dir.display()
    );
    Ok(StageOutcome {
        docs_in,
        docs_out: (pair.causal.len() + pair.control.len()) as u64,
        warnings,
    })
}

fn stage_tag_train(ctx: &Ctx) -> Result<StageOutcome, PipelineError> {
    const STAGE: &str = "tag-train";
    let cfg = ctx.cfg;
    let treebank = cfg.required("treebank", &cfg.treebank)?;
    let sentences = tagger::load_treebank(treebank).map_err(|e| data(STAGE, e))?;
    let model =
        tagger::train(&sentences, cfg.epochs, cfg.rng_seed).map_err(|e| data(STAGE, e))?;
    let out = ctx.path("model.json");
    model.save(&out).map_err(|e| internal(STAGE, e))?;
    let acc = tagger::accuracy(&model, &sentences);
    println!(
        "tag-train: {} sentences, {} epochs, training accuracy {:.4} -> {}",
        sentences.len(),
        cfg.epochs,
        acc,
        out.display()
    );
    Ok(StageOutcome {
        docs_in: sentences.len() as u64,
        docs_out: sentences.len() as u64,
        warnings: Vec::new(),
    })
}

/// Tags documents in place, sharded across up to `threads` scoped threads;
/// the frozen model is shared immutably.
fn tag_corpus(model: &PerceptronModel, docs: &mut [crate::ingest::Document], threads: usize) {
    let threads = threads.clamp(1, docs.len().max(1));
    if threads == 1 {
        for doc in docs.iter_mut() {
            model.tag_document(doc);
        }
        return;
    }
    let chunk = docs.len().div_ceil(threads);
    std::thread::scope(|scope| {
        for shard in docs.chunks_mut(chunk) {
            scope.spawn(move || {
                for doc in shard {
                    model.tag_document(doc);
                }
            });
        }
    });
}

fn stage_tag(ctx: &Ctx) -> Result<StageOutcome, PipelineError> {
    const STAGE: &str = "tag";
    let model_path = ctx.require_artifact(STAGE, "model.json", "tag-train")?;
    let model = PerceptronModel::load(&model_path).map_err(|e| data(STAGE, e))?;
    let mut pair = ctx.read_pair(STAGE)?;
    tag_corpus(&model, &mut pair.causal, ctx.cfg.threads);
    tag_corpus(&model, &mut pair.control, ctx.cfg.threads);
    artifacts::write_documents(STAGE, &pair.causal_path, &pair.causal)?;
    artifacts::write_documents(STAGE, &pair.control_path, &pair.control)?;
    println!(
        "tag: attached POS tags to {} causal + {} control documents",
        pair.causal.len(),
        pair.control.len()
    );
    Ok(StageOutcome {
        docs_in: pair.total(),
        docs_out: pair.total(),
        warnings: Vec::new(),
    })
}

fn stage_annotate(ctx: &Ctx) -> Result<StageOutcome, PipelineError> {
    const STAGE: &str = "annotate";
    let cfg = ctx.cfg;
    if cfg.annotations.is_empty() {
        return Err(PipelineError::Config {
            field: "annotations".into(),
            message: "required by this subcommand but not set".into(),
        });
    }
    for path in &cfg.annotations {
        PipelineConfig::require_path("annotations", path)?;
    }
    let mut pair = ctx.read_pair(STAGE)?;
    let boundary = pair.causal.len();
    let mut all = std::mem::take(&mut pair.causal);
    all.append(&mut pair.control);
    let mut warnings = Vec::new();
    for path in &cfg.annotations {
        let files = tagger::load_annotation_files(path).map_err(|e| data(STAGE, e))?;
        for file in &files {
            let report = tagger::import_annotations(&mut all, file);
            let kind = match file.kind {
                tagger::AnnotationKind::Pos => "POS",
                tagger::AnnotationKind::Ne => "NE",
            };
            for (id, toks, tags) in &report.length_mismatches {
                warnings.push(format!(
                    "{kind} tags for {id} skipped: {tags} tags for {toks} tokens"
                ));
            }
            if !report.unknown_ids.is_empty() {
                warnings.push(format!(
                    "{} {kind} ids match no document",
                    report.unknown_ids.len()
                ));
            }
            println!(
                "annotate: {} {kind} annotations attached from {} (coverage {:.3})",
                report.attached,
                path.display(),
                report.coverage
            );
        }
    }
    pair.control = all.split_off(boundary);
    pair.causal = all;
    artifacts::write_documents(STAGE, &pair.causal_path, &pair.causal)?;
    artifacts::write_documents(STAGE, &pair.control_path, &pair.control)?;
    Ok(StageOutcome {
        docs_in: pair.total(),
        docs_out: pair.total(),
        warnings,
    })
}

fn count_corpus(
    stage: &'static str,
    docs: &[crate::ingest::Document],
    kind: TableKind,
    threads: usize,
) -> Result<stats::FrequencyTable, PipelineError> {
    stats::count_sharded(docs, kind, threads).map_err(|e| data(stage, e))
}

fn stage_freq(ctx: &Ctx) -> Result<StageOutcome, PipelineError> {
    const STAGE: &str = "freq";
    let cfg = ctx.cfg;
    let pair = ctx.read_pair(STAGE)?;
    for (corpus, docs) in [("causal", &pair.causal), ("control", &pair.control)] {
        let table = count_corpus(STAGE, docs, cfg.kind, cfg.threads)?;
        let rows: Vec<Vec<String>> = table
            .items_by_count()
            .iter()
            .map(|&(item, f)| {
                vec![
                    item.to_string(),
                    f.to_string(),
                    table.doc_freq_of(item).to_string(),
                ]
            })
            .collect();
        let name = format!("freq_{corpus}.tsv");
        artifacts::write_tsv(
            STAGE,
            &ctx.path(&name),
            &ctx.meta(Subcommand::Freq),
            &[
                ("corpus", corpus.to_string()),
                ("kind", cfg.kind.to_string()),
                ("num_docs", table.num_docs.to_string()),
                ("total", table.total.to_string()),
            ],
            &["item", "count", "doc_freq"],
            &rows,
        )?;
        println!(
            "freq: {} distinct {} items over {} {} documents -> {}",
            table.len(),
            cfg.kind,
            docs.len(),
            corpus,
            ctx.path(&name).display()
        );
    }
    Ok(StageOutcome {
        docs_in: pair.total(),
        docs_out: pair.total(),
        warnings: Vec::new(),
    })
}

fn stage_tfidf(ctx: &Ctx) -> Result<StageOutcome, PipelineError> {
    const STAGE: &str = "tfidf";
    let cfg = ctx.cfg;
    let pair = ctx.read_pair(STAGE)?;
    for (corpus, docs) in [("causal", &pair.causal), ("control", &pair.control)] {
        let table = count_corpus(STAGE, docs, cfg.kind, cfg.threads)?;
        let records = stats::tfidf_records(&table, cfg.percentile, cfg.top_k)
            .map_err(|e| data(STAGE, e))?;
        let selected = records.iter().filter(|r| r.selected).count();
        let rows: Vec<Vec<String>> = records
            .iter()
            .map(|r| {
                vec![
                    r.item.clone(),
                    r.f.to_string(),
                    r.df.to_string(),
                    fmt_f64(r.tfidf),
                    r.selected.to_string(),
                ]
            })
            .collect();
        let name = format!("tfidf_{corpus}.tsv");
        artifacts::write_tsv(
            STAGE,
            &ctx.path(&name),
            &ctx.meta(Subcommand::Tfidf),
            &[
                ("corpus", corpus.to_string()),
                ("kind", cfg.kind.to_string()),
                ("percentile", fmt_f64(cfg.percentile)),
                ("top_k", cfg.top_k.to_string()),
            ],
            &["item", "f", "df", "tfidf", "selected"],
            &rows,
        )?;
        println!(
            "tfidf: {selected} of {} items selected ({corpus}) -> {}",
            records.len(),
            ctx.path(&name).display()
        );
    }
    Ok(StageOutcome {
        docs_in: pair.total(),
        docs_out: pair.total(),
        warnings: Vec::new(),
    })
}

fn stage_odds(ctx: &Ctx) -> Result<StageOutcome, PipelineError> {
    const STAGE: &str = "odds";
    let cfg = ctx.cfg;
    let pair = ctx.read_pair(STAGE)?;
    let cause = count_corpus(STAGE, &pair.causal, cfg.kind, cfg.threads)?;
    let control = count_corpus(STAGE, &pair.control, cfg.kind, cfg.threads)?;
    // Unigram candidates come from the tf-idf filter; tag alphabets are
    // small, so POS/NE runs compare every item seen in either corpus.
    let items: BTreeSet<String> = match cfg.kind {
        TableKind::Unigram => {
            stats::pooled_candidates(&cause, &control, cfg.percentile, cfg.top_k, cfg.pool)
                .map_err(|e| data(STAGE, e))?
        }
        TableKind::Pos | TableKind::Ne => cause
            .iter()
            .chain(control.iter())
            .map(|(item, _)| item.to_string())
            .collect(),
    };
    let records = stats::odds_ratios_with(&cause, &control, &items, &cfg.odds_options())
        .map_err(|e| data(STAGE, e))?;
    let odds_rows: Vec<Vec<String>> = records
        .iter()
        .map(|r| {
            vec![
                r.item.clone(),
                r.a.to_string(),
                r.b.to_string(),
                r.c.to_string(),
                r.d.to_string(),
                fmt_f64(r.or),
                fmt_f64(r.ci_low),
                fmt_f64(r.ci_high),
                r.significant.to_string(),
                r.degenerate.to_string(),
            ]
        })
        .collect();
    let extra = [
        ("kind", cfg.kind.to_string()),
        ("alpha", fmt_f64(cfg.alpha)),
        ("haldane", cfg.haldane.to_string()),
    ];
    artifacts::write_tsv(
        STAGE,
        &ctx.path("odds.tsv"),
        &ctx.meta(Subcommand::Odds),
        &extra,
        &["item", "a", "b", "c", "d", "or", "ci_low", "ci_high", "significant", "degenerate"],
        &odds_rows,
    )?;
    // Forest rows plot on the log scale, so the interval bounds are logged too.
    let forest_rows: Vec<Vec<String>> = records
        .iter()
        .map(|r| {
            vec![
                r.item.clone(),
                fmt_f64(r.log_or),
                fmt_f64(r.ci_low.ln()),
                fmt_f64(r.ci_high.ln()),
            ]
        })
        .collect();
    artifacts::write_tsv(
        STAGE,
        &ctx.path("forest.tsv"),
        &ctx.meta(Subcommand::Odds),
        &extra,
        &["item", "log_or", "ci_low", "ci_high"],
        &forest_rows,
    )?;
    let degenerate = records.iter().filter(|r| r.degenerate).count();
    let significant = records.iter().filter(|r| r.significant).count();
    let mut warnings = Vec::new();
    if degenerate > 0 {
        warnings.push(format!("{degenerate} items have a zero cell (degenerate OR)"));
    }
    println!(
        "odds: {} items, {significant} significant, {degenerate} degenerate -> {} and {}",
        records.len(),
        ctx.path("odds.tsv").display(),
        ctx.path("forest.tsv").display()
    );
    Ok(StageOutcome {
        docs_in: pair.total(),
        docs_out: pair.total(),
        warnings,
    })
}

fn stage_causetree(ctx: &Ctx) -> Result<StageOutcome, PipelineError> {
    const STAGE: &str = "causetree";
    let cfg = ctx.cfg;
    let causal_path = ctx.require_artifact(STAGE, "causal.ndjson", "select")?;
    let causal = artifacts::read_documents(STAGE, &causal_path)?;
    let index = causetree::build_index(&causal, cfg.max_n).map_err(|e| data(STAGE, e))?;
    let mut rate_rows: Vec<Vec<String>> = Vec::new();
    let mut trees = 0;
    for root in &cfg.tree_roots {
        for direction in [Direction::Forward, Direction::Backward] {
            let tree = causetree::grow_tree_with(
                &index,
                root,
                direction,
                cfg.max_depth,
                cfg.branch,
                cfg.rate_mode,
            )
            .map_err(|e| data(STAGE, e))?;
            let dir_name = match direction {
                Direction::Forward => "forward",
                Direction::Backward => "backward",
            };
            let name = format!("causetree_{root}_{dir_name}.json");
            artifacts::write_json(STAGE, &ctx.path(&name), &ctx.meta(Subcommand::Causetree), &tree)?;
            for (ngram, rate) in &tree.rates {
                let tokens: Vec<String> = ngram.split(' ').map(str::to_string).collect();
                let count = match cfg.rate_mode {
                    causetree::RateMode::Occurrences => index.count(&tokens),
                    causetree::RateMode::Documents => index.docs_containing(&tokens),
                };
                rate_rows.push(vec![
                    root.clone(),
                    dir_name.to_string(),
                    ngram.clone(),
                    count.to_string(),
                    fmt_f64(*rate),
                ]);
            }
            trees += 1;
        }
    }
    artifacts::write_tsv(
        STAGE,
        &ctx.path("causetree_rates.tsv"),
        &ctx.meta(Subcommand::Causetree),
        &[
            ("max_depth", cfg.max_depth.to_string()),
            ("branch", cfg.branch.to_string()),
            ("num_docs", causal.len().to_string()),
        ],
        &["root", "direction", "ngram", "count", "rate"],
        &rate_rows,
    )?;
    println!(
        "causetree: {trees} trees over {} causal documents, {} deep n-gram rates -> {}",
        causal.len(),
        rate_rows.len(),
        ctx.cfg.output_dir.display()
    );
    Ok(StageOutcome {
        docs_in: causal.len() as u64,
        docs_out: causal.len() as u64,
        warnings: Vec::new(),
    })
}

fn stage_sentiment(ctx: &Ctx) -> Result<StageOutcome, PipelineError> {
    const STAGE: &str = "sentiment";
    let cfg = ctx.cfg;
    let lexicon_path = cfg.required("lexicon", &cfg.lexicon)?;
    let lex = SentimentLexicon::load(lexicon_path).map_err(|e| data(STAGE, e))?;
    let pair = ctx.read_pair(STAGE)?;
    let spec = HistogramSpec::from_lexicon(&lex, cfg.hist_bins).map_err(|e| data(STAGE, e))?;
    let options = DistributionOptions {
        pos_filter: cfg.pos_filter,
        type_weighted: cfg.type_weighted,
    };
    let mut samples = Vec::new();
    let mut summary_rows = Vec::new();
    for (corpus, docs) in [("causal", &pair.causal), ("control", &pair.control)] {
        let table = count_corpus(STAGE, docs, TableKind::Unigram, cfg.threads)?;
        let vocab = ScoredVocabulary::build(corpus, &table, &lex, cfg.percentile)
            .map_err(|e| data(STAGE, e))?;
        let mean =
            sentiment::corpus_mean_score(&table, &vocab, &lex).map_err(|e| data(STAGE, e))?;
        let sample = ScoreSample::from_table(&table, &vocab, &lex);
        let hist = sentiment::score_distribution_with(docs, &vocab, &lex, spec, &options)
            .map_err(|e| data(STAGE, e))?;
        let rows: Vec<Vec<String>> = (0..spec.bins)
            .map(|b| {
                let (lo, hi) = spec.edges(b);
                vec![fmt_f64(lo), fmt_f64(hi), fmt_f64(hist.weights[b])]
            })
            .collect();
        let name = format!("sentiment_hist_{corpus}.tsv");
        artifacts::write_tsv(
            STAGE,
            &ctx.path(&name),
            &ctx.meta(Subcommand::Sentiment),
            &[
                ("corpus", corpus.to_string()),
                (
                    "pos_filter",
                    cfg.pos_filter.map(|c| c.label().to_string()).unwrap_or_else(|| "none".into()),
                ),
                ("type_weighted", cfg.type_weighted.to_string()),
                ("filter_coverage", fmt_f64(hist.filter_coverage)),
            ],
            &["bin_low", "bin_high", "weight"],
            &rows,
        )?;
        summary_rows.push((corpus.to_string(), mean, sample.n, vocab.coverage));
        samples.push(sample);
        println!(
            "sentiment: {corpus} mean {:.4} over {} scored tokens (vocabulary {} words) -> {}",
            mean,
            sample.n,
            vocab.words.len(),
            ctx.path(&name).display()
        );
    }
    let test =
        sentiment::mean_difference_test(&samples[0], &samples[1]).map_err(|e| data(STAGE, e))?;
    let rows: Vec<Vec<String>> = summary_rows
        .iter()
        .map(|(corpus, mean, n, coverage)| {
            vec![
                corpus.clone(),
                fmt_f64(*mean),
                n.to_string(),
                fmt_f64(*coverage),
                fmt_f64(test.t),
                fmt_f64(test.p),
            ]
        })
        .collect();
    artifacts::write_tsv(
        STAGE,
        &ctx.path("sentiment_summary.tsv"),
        &ctx.meta(Subcommand::Sentiment),
        &[("percentile", fmt_f64(cfg.percentile))],
        &["corpus", "mean", "n_tokens", "coverage", "t", "p"],
        &rows,
    )?;
    println!(
        "sentiment: mean difference t = {:.4}, p = {:.6} -> {}",
        test.t,
        test.p,
        ctx.path("sentiment_summary.tsv").display()
    );
    Ok(StageOutcome {
        docs_in: pair.total(),
        docs_out: pair.total(),
        warnings: Vec::new(),
    })
}

fn stage_doc_classes(ctx: &Ctx) -> Result<StageOutcome, PipelineError> {
    const STAGE: &str = "doc-classes";
    let cfg = ctx.cfg;
    let labels_path = cfg.required("labels", &cfg.labels)?;
    let labels = sentiment::DocSentimentLabels::load(labels_path).map_err(|e| data(STAGE, e))?;
    let pair = ctx.read_pair(STAGE)?;
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for (corpus, docs) in [("causal", &pair.causal), ("control", &pair.control)] {
        let dist = sentiment::class_distribution(&labels, docs).map_err(|e| data(STAGE, e))?;
        let mut row = vec![corpus.to_string()];
        row.extend(dist.proportions.iter().map(|p| fmt_f64(*p)));
        row.push(dist.labeled.to_string());
        row.push(dist.unlabeled.to_string());
        row.push(dist.unknown_ids.to_string());
        rows.push(row);
        if dist.unlabeled > 0 {
            warnings.push(format!("{corpus}: {} documents have no label", dist.unlabeled));
        }
    }
    let header: Vec<&str> = std::iter::once("corpus")
        .chain(SENTIMENT_CLASSES.iter().map(|c| c.key()))
        .chain(["labeled", "unlabeled", "unknown_ids"])
        .collect();
    artifacts::write_tsv(
        STAGE,
        &ctx.path("doc_classes.tsv"),
        &ctx.meta(Subcommand::DocClasses),
        &[],
        &header,
        &rows,
    )?;
    println!(
        "doc-classes: class proportions for both corpora -> {}",
        ctx.path("doc_classes.tsv").display()
    );
    Ok(StageOutcome {
        docs_in: pair.total(),
        docs_out: pair.total(),
        warnings,
    })
}

#[derive(Serialize)]
struct InvariantCheck {
    sweep: u64,
    ok: bool,
}

#[derive(Serialize)]
struct LdaMeta {
    config: crate::lda::LdaConfig,
    top_m: usize,
    num_docs: usize,
    vocab_size: usize,
    num_tokens: u64,
    hyperparameter_optimization: bool,
    invariant_checks: Vec<InvariantCheck>,
}

fn stage_lda(ctx: &Ctx) -> Result<StageOutcome, PipelineError> {
    const STAGE: &str = "lda";
    let cfg = ctx.cfg;
    let causal_path = ctx.require_artifact(STAGE, "causal.ndjson", "select")?;
    let causal = artifacts::read_documents(STAGE, &causal_path)?;
    let lda_cfg = cfg.lda_config();
    let mut sampler = GibbsSampler::new(&causal, &lda_cfg).map_err(|e| data(STAGE, e))?;
    let mut checks = Vec::new();
    let verify = |sampler: &GibbsSampler| -> Result<InvariantCheck, PipelineError> {
        sampler
            .state()
            .check_invariants()
            .map_err(|e| internal(STAGE, e))?;
        Ok(InvariantCheck {
            sweep: sampler.sweeps_done(),
            ok: true,
        })
    };
    checks.push(verify(&sampler)?);
    let check_every = (lda_cfg.iterations / 10).max(1);
    for i in 1..=lda_cfg.iterations {
        sampler.sweep();
        if i % check_every == 0 || i == lda_cfg.iterations {
            checks.push(verify(&sampler)?);
        }
    }
    let state = sampler.into_state();
    let report = lda::report(&state, cfg.lda_top_m).map_err(|e| data(STAGE, e))?;
    let word_rows: Vec<Vec<String>> = report
        .top_words
        .iter()
        .enumerate()
        .flat_map(|(topic, words)| {
            words.iter().enumerate().map(move |(rank, tw)| {
                vec![
                    topic.to_string(),
                    (rank + 1).to_string(),
                    tw.word.clone(),
                    fmt_f64(tw.phi),
                ]
            })
        })
        .collect();
    artifacts::write_tsv(
        STAGE,
        &ctx.path("lda_top_words.tsv"),
        &ctx.meta(Subcommand::Lda),
        &[("topics", lda_cfg.topics.to_string())],
        &["topic", "rank", "word", "phi"],
        &word_rows,
    )?;
    let theta_header_owned: Vec<String> = std::iter::once("doc_id".to_string())
        .chain((0..lda_cfg.topics).map(|t| format!("topic_{t}")))
        .collect();
    let theta_header: Vec<&str> = theta_header_owned.iter().map(String::as_str).collect();
    let theta_rows: Vec<Vec<String>> = report
        .doc_ids
        .iter()
        .zip(&report.theta)
        .map(|(id, row)| {
            std::iter::once(id.clone())
                .chain(row.iter().map(|p| fmt_f64(*p)))
                .collect()
        })
        .collect();
    artifacts::write_tsv(
        STAGE,
        &ctx.path("lda_theta.tsv"),
        &ctx.meta(Subcommand::Lda),
        &[],
        &theta_header,
        &theta_rows,
    )?;
    let meta_payload = LdaMeta {
        config: lda_cfg.clone(),
        top_m: cfg.lda_top_m,
        num_docs: causal.len(),
        vocab_size: state.vocabulary.len(),
        num_tokens: state.num_tokens(),
        hyperparameter_optimization: false,
        invariant_checks: checks,
    };
    artifacts::write_json(
        STAGE,
        &ctx.path("lda_meta.json"),
        &ctx.meta(Subcommand::Lda),
        &meta_payload,
    )?;
    println!(
        "lda: {} topics over {} documents ({} word vocabulary, {} sweeps) -> {}",
        lda_cfg.topics,
        causal.len(),
        state.vocabulary.len(),
        lda_cfg.iterations,
        ctx.cfg.output_dir.display()
    );
    Ok(StageOutcome {
        docs_in: causal.len() as u64,
        docs_out: causal.len() as u64,
        warnings: Vec::new(),
    })
}

fn stage_variants(ctx: &Ctx) -> Result<StageOutcome, PipelineError> {
    const STAGE: &str = "variants";
    let cfg = ctx.cfg;
    let input = cfg.required("input", &cfg.input)?;
    let stopword_dir = cfg.required("stopword_dir", &cfg.stopword_dir)?;
    let model_path = ctx.require_artifact(STAGE, "model.json", "tag-train")?;
    let model = PerceptronModel::load(&model_path).map_err(|e| data(STAGE, e))?;
    let table = StopwordTable::load_dir(stopword_dir).map_err(|e| data(STAGE, e))?;
    let (raws, _report) = ingest::load_ndjson(input).map_err(|e| data(STAGE, e))?;
    let rules = cfg.selection_rules();
    let mut variants = Vec::new();
    let mut warnings = Vec::new();
    for flags in PreprocessFlags::all_variants() {
        let (docs, _rejected) = ingest::preprocess_and_gate(&raws, flags, &table);
        let pair = select::build_corpus_pair(docs, &rules).map_err(|e| data(STAGE, e))?;
        let shortfall = pair.total_shortfall();
        if shortfall > 0 {
            warnings.push(format!(
                "{}: {shortfall} causal documents lack a matched control",
                flags.label()
            ));
        }
        variants.push((flags, pair));
    }
    let comparisons =
        stats::variant_correlation(&variants, &model, cfg.alpha).map_err(|e| data(STAGE, e))?;
    let rows: Vec<Vec<String>> = comparisons
        .iter()
        .map(|c| {
            vec![
                c.variant_a.clone(),
                c.variant_b.clone(),
                c.keep_casing.to_string(),
                fmt_f64(c.rho),
                c.n_tags.to_string(),
                c.dropped_tags.join(","),
            ]
        })
        .collect();
    artifacts::write_tsv(
        STAGE,
        &ctx.path("variants.tsv"),
        &ctx.meta(Subcommand::Variants),
        &[("alpha", fmt_f64(cfg.alpha))],
        &["variant_a", "variant_b", "keep_casing", "rho", "n_tags", "dropped_tags"],
        &rows,
    )?;
    for c in &comparisons {
        println!(
            "variants: {} vs {} -> rho = {:.4} over {} POS tags",
            c.variant_a, c.variant_b, c.rho, c.n_tags
        );
    }
    Ok(StageOutcome {
        docs_in: raws.len() as u64,
        docs_out: raws.len() as u64,
        warnings,
    })
}
