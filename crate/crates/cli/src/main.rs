//! `movrptw` drives the full workflow over files on disk: generate problem
//! instances, build a Pareto approximation set for a pilot instance, pick
//! target vectors, derive goal weights, solve sibling instances with the
//! goal-driven GA, and report the quality metrics.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or invalid parameter combinations (exit 1).
    Usage(String),
    /// Unreadable or malformed files (exit 2).
    Io(String),
    /// A run itself failed (exit 3).
    Run(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io(_) => 2,
            CliError::Run(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Io(m) | CliError::Run(m) => m,
        }
    }
}

impl From<movrptw::Error> for CliError {
    fn from(e: movrptw::Error) -> Self {
        match e {
            movrptw::Error::InvalidInput(_) => CliError::Usage(e.to_string()),
            movrptw::Error::Parse { .. } | movrptw::Error::Io { .. } => CliError::Io(e.to_string()),
            movrptw::Error::Coverage(_) | movrptw::Error::Degenerate(_) => {
                CliError::Run(e.to_string())
            }
        }
    }
}

#[derive(Parser)]
#[command(
    name = "movrptw",
    version,
    about = "Multiobjective VRPTW toolkit: pilot approximation sets, goal targets, fast goal-driven solves"
)]
struct Cli {
    /// JSON configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads for parallel runs (defaults to available parallelism).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a benchmark-style instance file.
    Generate(commands::GenerateArgs),
    /// Build the Pareto approximation set for a pilot instance.
    Pilot(commands::PilotArgs),
    /// Inspect an archive and write chosen targets as goal files.
    SelectTarget(commands::SelectTargetArgs),
    /// Derive a weight vector for a WV goal from the archive.
    DeriveWeights(commands::DeriveWeightsArgs),
    /// Solve instances against goal files with the single-objective GA.
    Solve(commands::SolveArgs),
    /// Summarize run tables against a goal: achievement, gaps, comparison.
    Report(commands::ReportArgs),
    /// Correlations, ranges and scatter export for an archive.
    Analyze(commands::AnalyzeArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(1);
        }
        // ignore the error if a pool already exists (tests call main twice)
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }
    let config = match config::ToolConfig::load(cli.config.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}", e.message());
            return ExitCode::from(e.code());
        }
    };
    let outcome = match cli.command {
        Command::Generate(args) => commands::generate(args, &config),
        Command::Pilot(args) => commands::pilot(args, &config),
        Command::SelectTarget(args) => commands::select_target(args, &config),
        Command::DeriveWeights(args) => commands::derive_weights(args, &config),
        Command::Solve(args) => commands::solve(args, &config),
        Command::Report(args) => commands::report(args, &config),
        Command::Analyze(args) => commands::analyze(args, &config),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
