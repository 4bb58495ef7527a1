use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rust_decimal::Decimal;

#[derive(Debug, Parser)]
#[command(name = "seedlex", version, about = "Seed-driven lexicons: train embeddings, grow categories, count them in text")]
pub struct Cli {
    /// Random seed for training and any sampling.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Only print errors.
    #[arg(long, short, global = true)]
    pub quiet: bool,
    /// Output format for tabular results.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train skip-gram embeddings on a text corpus, one sentence per line.
    Train(TrainArgs),
    /// Print the words nearest to a word or a set of words.
    Neighbors(NeighborsArgs),
    /// Expand seed words into a category file.
    Generate(GenerateArgs),
    /// Count category words in documents.
    Analyze(AnalyzeArgs),
    /// Compare category rates between two document groups.
    Compare(CompareArgs),
    /// Correlate the per-document counts of two analyses.
    Agree(AgreeArgs),
    /// Crowd validation of category members.
    #[command(subcommand)]
    Crowd(CrowdCommand),
    /// Run the HTTP service.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Output embedding file (text format).
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 150)]
    pub dims: usize,
    #[arg(long, default_value_t = 5)]
    pub window: usize,
    /// Use the full window for every center word instead of a random radius.
    #[arg(long)]
    pub fixed_window: bool,
    #[arg(long, default_value_t = 30)]
    pub min_count: u64,
    #[arg(long, default_value_t = 5)]
    pub negative: usize,
    #[arg(long, default_value_t = 5)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.025)]
    pub learning_rate: f64,
    /// Subsampling threshold for frequent words.
    #[arg(long, default_value_t = 1e-5, conflicts_with = "no_downsample")]
    pub downsample: f64,
    #[arg(long)]
    pub no_downsample: bool,
    /// Words with a log relative frequency above this are dropped.
    #[arg(long, default_value_t = -8.0, allow_hyphen_values = true, conflicts_with = "no_stopwords")]
    pub stopword_logprob: f64,
    #[arg(long)]
    pub no_stopwords: bool,
    /// Worker threads; more than one gives faster, non-reproducible runs.
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
}

#[derive(Debug, Args)]
pub struct NeighborsArgs {
    #[arg(long)]
    pub embeddings: PathBuf,
    /// Query words, summed.
    #[arg(long, value_delimiter = ',', required = true)]
    pub words: Vec<String>,
    #[arg(long, short, default_value_t = 10)]
    pub k: usize,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub embeddings: PathBuf,
    #[arg(long)]
    pub name: String,
    #[arg(long, value_delimiter = ',', required = true)]
    pub seeds: Vec<String>,
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    pub threshold: f64,
    #[arg(long, default_value_t = 200)]
    pub max_terms: usize,
    /// Sum raw rather than unit-length vectors for the query.
    #[arg(long)]
    pub raw_query: bool,
    /// Category file to write; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Category files, or directories of them.
    #[arg(long, required = true)]
    pub categories: Vec<PathBuf>,
    /// CSV with columns doc_id,path; paths are relative to the manifest.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Documents to analyze; the file name is the document id.
    pub files: Vec<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TestKind {
    Welch,
    ChiSquare,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Analysis CSV produced by `analyze`.
    #[arg(long)]
    pub results: PathBuf,
    /// CSV with columns doc_id,group.
    #[arg(long)]
    pub groups: PathBuf,
    /// Numerator group; required when the manifest has more than two groups.
    #[arg(long, requires = "b")]
    pub a: Option<String>,
    #[arg(long, requires = "a")]
    pub b: Option<String>,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = TestKind::Welch)]
    pub test: TestKind,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MeasureKind {
    Raw,
    Normalized,
}

#[derive(Debug, Args)]
pub struct AgreeArgs {
    #[arg(long)]
    pub a: PathBuf,
    #[arg(long)]
    pub b: PathBuf,
    #[arg(long, value_enum, default_value_t = MeasureKind::Raw)]
    pub measure: MeasureKind,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum CrowdCommand {
    /// Write labeling tasks for a category.
    Export(ExportArgs),
    /// Aggregate worker labels and filter the category.
    Import(ImportArgs),
    /// Aggregate worker labels into per-word verdicts.
    Aggregate(AggregateArgs),
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long)]
    pub category: PathBuf,
    #[arg(long, default_value_t = 20)]
    pub words_per_task: usize,
    /// Workers per task, for the cost estimate.
    #[arg(long, default_value_t = 3)]
    pub workers: u64,
    /// Payment per task, for the cost estimate.
    #[arg(long, default_value = "0.14")]
    pub price: Decimal,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ResponseArgs {
    /// Task CSV written by `crowd export`.
    #[arg(long)]
    pub tasks: PathBuf,
    /// Worker labels with columns task_id,worker_id,word,label.
    #[arg(long)]
    pub responses: PathBuf,
    /// Labels per word.
    #[arg(long, default_value_t = 3)]
    pub quorum: usize,
}

#[derive(Debug, Args)]
pub struct ImportArgs {
    #[arg(long)]
    pub category: PathBuf,
    #[command(flatten)]
    pub labels: ResponseArgs,
    /// Filtered category file; defaults to overwriting --category.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AggregateArgs {
    #[command(flatten)]
    pub labels: ResponseArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub embeddings: PathBuf,
    #[arg(long)]
    pub categories: PathBuf,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    /// Overridden by SEEDLEX_PORT.
    #[arg(long, default_value_t = seedlex_service::DEFAULT_PORT)]
    pub port: u16,
    #[arg(long, default_value_t = seedlex_service::DEFAULT_MAX_TEXT_BYTES)]
    pub max_text_bytes: usize,
}
