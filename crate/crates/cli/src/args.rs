use std::path::PathBuf;

use botsift_core::features::SimilarityAlgorithm;
use botsift_core::models::ModelKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Parser, Serialize)]
#[command(name = "botsift", version, about = "Bot account detection for platform event archives")]
pub struct Cli {
    /// Master seed for every random draw (default 42).
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// error, warn, info, debug or trace.
    #[arg(long, global = true, default_value = "info")]
    pub log_level: String,

    #[command(subcommand)]
    pub command: Command,
}

impl Cli {
    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Generate a synthetic corpus with ground-truth labels.
    Synth(SynthArgs),
    /// Parse event archives into a timelines file.
    Ingest(IngestArgs),
    /// Compute the feature table from a timelines file.
    Extract(ExtractArgs),
    /// Serve the annotation API.
    LabelServe(ServeArgs),
    /// Grid-search, cross-validate and fit a bagging ensemble.
    Train(TrainArgs),
    /// Label accounts with a trained model.
    Predict(PredictArgs),
    /// Score a model against labeled features.
    Evaluate(EvaluateArgs),
    /// Rank features by importance.
    Importance(ImportanceArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SynthArgs {
    /// Output directory for events.jsonl, profiles.csv and labels.csv.
    #[arg(long)]
    pub out: PathBuf,
    /// JSON corpus spec; flags below override its fields.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub humans: Option<usize>,
    #[arg(long)]
    pub bots_per_archetype: Option<usize>,
    #[arg(long)]
    pub repositories: Option<usize>,
    /// Observation window as `start,end`.
    #[arg(long)]
    pub window: Option<String>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct IngestArgs {
    /// Line-delimited JSON archives, plain or gzip.
    #[arg(required = true)]
    pub archives: Vec<PathBuf>,
    /// Profile CSV (login,name,bio,email,tag,followers,following).
    #[arg(long)]
    pub profiles: Option<PathBuf>,
    /// Observation window as `start,end`.
    #[arg(long)]
    pub window: String,
    /// Keep accounts with more than this many events.
    #[arg(long, default_value_t = 10)]
    pub min_events: usize,
    /// Keep other accounts with this probability instead of the event filter.
    #[arg(long)]
    pub sample_rate: Option<f64>,
    /// With --sample-rate, accounts above this many events are always kept.
    #[arg(long, default_value_t = 100)]
    pub active_threshold: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ExtractArgs {
    #[arg(long)]
    pub timelines: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Comma-separated lexicon terms.
    #[arg(long)]
    pub lexicon: Option<String>,
    /// jaccard, cosine or tfidf.
    #[arg(long, default_value = "tfidf")]
    #[serde(serialize_with = "as_display")]
    pub similarity: SimilarityAlgorithm,
    /// Ground-truth CSV or label journal to fill the label columns.
    #[arg(long)]
    pub labels: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ServeArgs {
    #[arg(long)]
    pub features: PathBuf,
    /// Label journal; created when missing.
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    /// Timelines file providing profiles, events and comments as evidence.
    #[arg(long)]
    pub timelines: Option<PathBuf>,
    /// Directory of the built UI bundle.
    #[arg(long)]
    pub ui_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TrainArgs {
    #[arg(long)]
    pub features: PathBuf,
    /// Ground-truth CSV or label journal overriding the feature labels.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long)]
    pub model: PathBuf,
    /// CV report CSV (default: model path with `.cv.csv`).
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// tree, forest, logreg, gnb or knn.
    #[arg(long, default_value = "forest")]
    #[serde(serialize_with = "as_display")]
    pub base: ModelKind,
    /// JSON object of parameter lists (default: built-in grid for the base).
    #[arg(long)]
    pub grid: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[arg(long, default_value_t = 5)]
    pub repeats: usize,
    /// Bagging members.
    #[arg(long, default_value_t = 11)]
    pub members: usize,
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    /// Train on the imbalanced data as is.
    #[arg(long)]
    pub no_undersample: bool,
    /// Fit every member on the full training part instead of a bootstrap resample.
    #[arg(long)]
    pub no_bootstrap: bool,
    /// Hold out this fraction (stratified) and report metrics on it.
    #[arg(long)]
    pub holdout: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Vote-fraction threshold overriding the model's.
    #[arg(long)]
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub roc: Option<PathBuf>,
    #[arg(long)]
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ImportanceMethod {
    Permutation,
    Impurity,
    Chi2,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ImportanceArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "permutation")]
    pub method: ImportanceMethod,
    /// Shuffles per feature for the permutation method.
    #[arg(long, default_value_t = 10)]
    pub repeats: usize,
    /// Quantile bins for numeric columns in the chi2 method.
    #[arg(long, default_value_t = 4)]
    pub bins: usize,
    /// CSV output (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn as_display<T: std::fmt::Display, S: serde::Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}
