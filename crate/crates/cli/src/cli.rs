//! Argument definitions and subcommand dispatch.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands;

#[derive(Parser)]
#[command(
    name = "graphite",
    version,
    about = "Train-free graph-based keyphrase recommender"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Build a model from a JSONL training file
    Train(TrainArgs),
    /// Predict keyphrases for every title in a JSONL file
    Predict(PredictArgs),
    /// Predict with a per-title decision trace
    Explain(ExplainArgs),
    /// Evaluate a model on a labeled JSONL test file
    Eval(EvalArgs),
    /// Generate the synthetic exact-match dataset
    Synth(SynthArgs),
    /// Measure training time, model size, and inference latency
    Bench(BenchArgs),
    /// Serve a model over HTTP
    Serve(ServeArgs),
}

/// Flags shared by the inference-driven subcommands. Precedence:
/// explicit flag, then the --config file, then (for --workers) the
/// GRAPHITE_WORKERS environment variable, then the built-in default.
#[derive(Args, Clone, Default)]
pub struct InferFlags {
    /// Predictions per title (default 10)
    #[arg(long)]
    pub k: Option<usize>,
    /// Ranking strategy: default, jaccard-wmr, missing-ratio, wmr-first, merge-top2
    #[arg(long)]
    pub strategy: Option<String>,
    /// Maximum instances retrieved before tier completion (default 1000)
    #[arg(long)]
    pub budget: Option<usize>,
    /// Worker threads for batch prediction (default: available cores)
    #[arg(long)]
    pub workers: Option<usize>,
    /// TOML file providing defaults for k, strategy, budget, workers
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args)]
pub struct TrainArgs {
    /// Training JSONL ({"title", "keyphrases"} per line)
    #[arg(long)]
    pub input: PathBuf,
    /// Output model file
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Args)]
pub struct PredictArgs {
    /// Model file (not needed with --oracle)
    #[arg(long, required_unless_present = "oracle")]
    pub model: Option<PathBuf>,
    /// Titles JSONL; keyphrases fields are ignored
    #[arg(long)]
    pub input: PathBuf,
    /// Output JSONL path (default: stdout)
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Use the brute-force reference predictor instead of a model (slow;
    /// for debugging). Requires --train.
    #[arg(long, requires = "train")]
    pub oracle: bool,
    /// Training JSONL re-encoded on the fly for --oracle
    #[arg(long)]
    pub train: Option<PathBuf>,
    #[command(flatten)]
    pub infer: InferFlags,
}

#[derive(Args)]
pub struct ExplainArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    /// Output JSONL path (default: stdout)
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub infer: InferFlags,
}

#[derive(Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Labeled test JSONL
    #[arg(long)]
    pub test: PathBuf,
    /// Cutoffs for Precision@k / Recall@k; predictions are requested to the
    /// deepest cutoff (at least the AVP ground-truth cap)
    #[arg(long, value_delimiter = ',', default_value = "1,5,10")]
    pub k: Vec<usize>,
    /// Ranking strategy: default, jaccard-wmr, missing-ratio, wmr-first, merge-top2
    #[arg(long)]
    pub strategy: Option<String>,
    /// Maximum instances retrieved before tier completion (default 1000)
    #[arg(long)]
    pub budget: Option<usize>,
    /// Worker threads for batch prediction (default: available cores)
    #[arg(long)]
    pub workers: Option<usize>,
    /// TOML file providing defaults for strategy, budget, workers
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 500_000)]
    pub train_n: usize,
    #[arg(long, default_value_t = 10_000)]
    pub test_n: usize,
    #[arg(long, default_value_t = 10_000)]
    pub valid_n: usize,
    #[arg(long, default_value_t = 200_000)]
    pub label_n: usize,
    #[arg(long, default_value_t = 10)]
    pub title_len: usize,
    #[arg(long, default_value_t = 10)]
    pub labels_per: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Directory for train.jsonl, test.jsonl, valid.jsonl
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Args)]
pub struct BenchArgs {
    /// Training JSONL
    #[arg(long)]
    pub input: PathBuf,
    /// Titles used for the latency measurement (default: the training titles)
    #[arg(long)]
    pub test: Option<PathBuf>,
    /// Keep the trained model at this path (default: a temporary file)
    #[arg(long)]
    pub model_out: Option<PathBuf>,
    #[command(flatten)]
    pub infer: InferFlags,
}

#[derive(Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Listen address
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub bind: String,
    #[command(flatten)]
    pub infer: InferFlags,
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Train(args) => commands::train(args),
        Command::Predict(args) => commands::predict(args),
        Command::Explain(args) => commands::explain(args),
        Command::Eval(args) => commands::eval(args),
        Command::Synth(args) => commands::synth(args),
        Command::Bench(args) => commands::bench(args),
        Command::Serve(args) => commands::serve(args),
    }
}
