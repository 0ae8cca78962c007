//! `hypervec`: build, train, score and evaluate hierarchical hypernymy
//! embeddings from the command line.
//!
//! Flags take precedence over `HYPERVEC_*` environment variables, which take
//! precedence over the built-in defaults. Machine-readable results go to
//! stdout (or `--out`), human summaries and warnings to stderr.

mod commands;
mod manifest;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "hypervec", version, about = "Hierarchical embeddings for hypernymy")]
struct Cli {
    #[command(flatten)]
    global: Global,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Global {
    /// Base random seed
    #[arg(long, global = true, env = "HYPERVEC_SEED", default_value_t = 1)]
    pub seed: u64,

    /// Training worker threads
    #[arg(long, global = true, env = "HYPERVEC_WORKERS", default_value_t = 1)]
    pub workers: usize,

    /// Force a single worker so that outputs are reproducible bit for bit
    #[arg(long, global = true, env = "HYPERVEC_DETERMINISTIC")]
    pub deterministic: bool,

    /// Log progress to stderr
    #[arg(short, long, global = true)]
    pub verbose: bool,
}

impl Global {
    pub fn effective_workers(&self) -> usize {
        if self.deterministic {
            1
        } else {
            self.workers
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the vocabulary and the co-occurrence index of a corpus
    Build(commands::BuildArgs),
    /// Train embeddings, optionally with a hypernym resource
    Train(commands::TrainArgs),
    /// Score word pairs with HyperScore and predict their direction
    Score(commands::ScoreArgs),
    /// Average precision of one relation against the others
    EvalAp(commands::EvalApArgs),
    /// Directionality accuracy on gold (hyponym, hypernym) pairs
    EvalDir(commands::EvalDirArgs),
    /// Threshold classification with sampled tuning sets
    EvalCls(commands::EvalClsArgs),
    /// Spearman correlation with graded scores
    EvalGraded(commands::EvalGradedArgs),
    /// Fit a linear map from a source space into a target space
    Map(commands::MapArgs),
    /// Project a source store through a fitted map
    Project(commands::ProjectArgs),
    /// Export pair features for an external classifier
    Features(commands::FeaturesArgs),
    /// Generate a synthetic taxonomy corpus with resource and datasets
    Synth(commands::SynthArgs),
}

/// Exit status for a failed run.
fn exit_code(err: &anyhow::Error) -> u8 {
    use hypervec::Error;
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::Io { .. } | Error::Stream(_) => 1,
                Error::InvalidArgument(_) => 2,
                Error::ZeroNorm | Error::Numeric(_) => 4,
                Error::Format { .. }
                | Error::Data(_)
                | Error::UnknownToken(_)
                | Error::Cycle(_)
                | Error::MemoryBudget { .. } => 3,
            };
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.global.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    if cli.global.deterministic && cli.global.workers > 1 {
        log::warn!("--deterministic overrides --workers {}", cli.global.workers);
    }

    let g = &cli.global;
    let result = match &cli.command {
        Command::Build(a) => commands::build(g, a),
        Command::Train(a) => commands::train(g, a),
        Command::Score(a) => commands::score(g, a),
        Command::EvalAp(a) => commands::eval_ap(g, a),
        Command::EvalDir(a) => commands::eval_dir(g, a),
        Command::EvalCls(a) => commands::eval_cls(g, a),
        Command::EvalGraded(a) => commands::eval_graded(g, a),
        Command::Map(a) => commands::map(g, a),
        Command::Project(a) => commands::project(g, a),
        Command::Features(a) => commands::features(g, a),
        Command::Synth(a) => commands::synth(g, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {:#}", e);
            ExitCode::from(exit_code(&e))
        }
    }
}
