use clap::{Parser, Subcommand};

use causetext::pipeline::{self, CliOverrides, PipelineConfig};

/// Causal-language corpus analysis: split a document stream into causal and
/// time-matched control corpora and compare them.
#[derive(Parser)]
#[command(name = "causetext", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Clean raw NDJSON input and keep English documents.
    Ingest(CliOverrides),
    /// Split the cleaned corpus into causal and control halves.
    Select(CliOverrides),
    /// Train the averaged-perceptron POS tagger on a treebank.
    #[command(name = "tag-train")]
    TagTrain(CliOverrides),
    /// Attach POS tags to both corpora with the trained model.
    Tag(CliOverrides),
    /// Import external POS/NE annotation files into both corpora.
    Annotate(CliOverrides),
    /// Frequency tables (unigram, POS, or NE) for both corpora.
    Freq(CliOverrides),
    /// tf-idf scores and the salience filter for both corpora.
    Tfidf(CliOverrides),
    /// Odds ratios with Wald confidence intervals, causal vs control.
    Odds(CliOverrides),
    /// Grow n-gram trees around the causation words.
    Causetree(CliOverrides),
    /// Lexicon sentiment: corpus means, histograms, and the mean test.
    Sentiment(CliOverrides),
    /// Compare imported five-class document sentiment labels.
    #[command(name = "doc-classes")]
    DocClasses(CliOverrides),
    /// Fit topics to the causal corpus by collapsed Gibbs sampling.
    Lda(CliOverrides),
    /// Correlate POS odds ratios across the four preprocessing variants.
    Variants(CliOverrides),
    /// Run the whole pipeline in order and write every artifact.
    #[command(name = "report-all")]
    ReportAll(CliOverrides),
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help and --version land here too; only real mistakes are
            // config errors (exit 1).
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let (sub, overrides) = match cli.command {
        Command::Ingest(o) => (pipeline::Subcommand::Ingest, o),
        Command::Select(o) => (pipeline::Subcommand::Select, o),
        Command::TagTrain(o) => (pipeline::Subcommand::TagTrain, o),
        Command::Tag(o) => (pipeline::Subcommand::Tag, o),
        Command::Annotate(o) => (pipeline::Subcommand::Annotate, o),
        Command::Freq(o) => (pipeline::Subcommand::Freq, o),
        Command::Tfidf(o) => (pipeline::Subcommand::Tfidf, o),
        Command::Odds(o) => (pipeline::Subcommand::Odds, o),
        Command::Causetree(o) => (pipeline::Subcommand::Causetree, o),
        Command::Sentiment(o) => (pipeline::Subcommand::Sentiment, o),
        Command::DocClasses(o) => (pipeline::Subcommand::DocClasses, o),
        Command::Lda(o) => (pipeline::Subcommand::Lda, o),
        Command::Variants(o) => (pipeline::Subcommand::Variants, o),
        Command::ReportAll(o) => (pipeline::Subcommand::ReportAll, o),
    };
    let config = match PipelineConfig::resolve(&overrides) {
        Ok(config) => config,
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    };
    if let Err(e) = pipeline::run(sub, &config) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
