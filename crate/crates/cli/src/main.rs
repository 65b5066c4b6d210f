//! `plangen`: command-line driver for plan-guided recipe generation.

mod artifact;
mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Ctx;
use config::{ConfigFile, Global};

#[derive(Parser, Debug)]
#[command(
    name = "plangen",
    version,
    about = "Stage tagging, content planning and plan-aware recipe generation"
)]
struct Cli {
    /// TOML config file; sections are named after subcommands plus [global].
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every random choice.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for per-example commands (0 = all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a stage-disjoint synthetic corpus and its generating plans.
    Synth(commands::data::SynthArgs),
    /// Filter, split and index a raw JSONL corpus.
    Preprocess(commands::data::PreprocessArgs),
    /// Tag every recipe's instructions with stage labels.
    Tag(commands::data::TagArgs),
    /// Train the content planner.
    TrainPlanner(commands::train::TrainPlannerArgs),
    /// Train the partial-instruction stage classifier.
    TrainClassifier(commands::train::TrainClassifierArgs),
    /// Print stage distributions for lines of text.
    Classify(commands::infer::ClassifyArgs),
    /// Train the n-gram language model.
    TrainLm(commands::train::TrainLmArgs),
    /// Predict a plan for every prompt.
    Plan(commands::infer::PlanArgs),
    /// Generate instructions for every prompt.
    Generate(commands::infer::GenerateArgs),
    /// Score generations or plans against references.
    Evaluate(commands::evaluate::EvaluateArgs),
}

fn run(cli: Cli) -> error::CliResult<()> {
    let file = ConfigFile::load(cli.config.as_deref())?;
    #[derive(serde::Serialize)]
    struct GlobalFlags {
        seed: Option<u64>,
        jobs: Option<usize>,
    }
    let global: Global = config::resolve(
        &file,
        "global",
        &GlobalFlags {
            seed: cli.seed,
            jobs: cli.jobs,
        },
    )?;
    let ctx = Ctx { file, global };
    match &cli.command {
        Command::Synth(a) => commands::data::synth(&ctx, a),
        Command::Preprocess(a) => commands::data::preprocess(&ctx, a),
        Command::Tag(a) => commands::data::tag(&ctx, a),
        Command::TrainPlanner(a) => commands::train::train_planner(&ctx, a),
        Command::TrainClassifier(a) => commands::train::train_classifier(&ctx, a),
        Command::Classify(a) => commands::infer::classify(&ctx, a),
        Command::TrainLm(a) => commands::train::train_lm(&ctx, a),
        Command::Plan(a) => commands::infer::plan(&ctx, a),
        Command::Generate(a) => commands::infer::generate(&ctx, a),
        Command::Evaluate(a) => commands::evaluate::evaluate(&ctx, a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json_line());
            ExitCode::from(1)
        }
    }
}
