//! Batch front-end for haptic exploration analysis: conditions trace
//! directories into cue tables, runs the similarity and recognition time
//! models, reproduces detection statistics, fits skin moduli and
//! psychometric curves, and generates synthetic trials.

mod commands;
mod config;
mod report;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::ConfigMap;

#[derive(Parser)]
#[command(
    name = "palpate",
    version,
    about = "Analysis pipelines for haptic softness-exploration data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Plain-text key=value defaults file whose keys mirror the long
    /// flags; explicit flags win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Write the JSON report to this path instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Seed for every random procedure in the command.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Omit the generated_at_unix field so identical runs produce
    /// byte-identical reports.
    #[arg(long, global = true)]
    no_timestamp: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Per-trial cue table (force-rate, displacement, stiffness, work)
    /// for a directory of trace CSVs.
    Cues(commands::cues::Args),
    /// Minimum discrimination time between two stimuli by the curve
    /// dissimilarity sweep.
    FrechetTime(commands::frechet_time::Args),
    /// Minimum recognition time within one exploration by the recursive
    /// stiffness update.
    RecognizeTime(commands::recognize_time::Args),
    /// Hit / false-alarm / sensitivity table from a same-different
    /// response log.
    Dprime(commands::dprime::Args),
    /// Maximum-likelihood psychometric curve fit.
    Psychfit(commands::psychfit::Args),
    /// Fit the skin modulus scale to measured compression curves.
    Skinfit(commands::skinfit::Args),
    /// Contact-print area from a digitized boundary polygon.
    Area(commands::area::Args),
    /// Generate synthetic spring or contact trials.
    Synth(commands::synth::Args),
    /// Seeded k-means partitioning of a numeric table.
    Cluster(commands::cluster::Args),
    /// Rank correlation, rank-sum test, effect size, or bootstrap
    /// interval over table columns.
    Stats(commands::stats::Args),
}

/// Shared per-invocation context resolved from the global flags.
pub struct Ctx {
    pub config: ConfigMap,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub timestamp: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match &cli.config {
        Some(path) => match ConfigMap::load(path) {
            Ok(cfg) => cfg,
            Err(e) => {
                eprintln!("error: {e:#}");
                return ExitCode::from(2);
            }
        },
        None => ConfigMap::default(),
    };
    let seed = match config.resolve(cli.seed, "seed", 0) {
        Ok(seed) => seed,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let ctx = Ctx {
        config,
        out: cli.out.clone(),
        seed,
        timestamp: !cli.no_timestamp,
    };
    let result = match cli.command {
        Command::Cues(args) => commands::cues::run(&args, &ctx),
        Command::FrechetTime(args) => commands::frechet_time::run(&args, &ctx),
        Command::RecognizeTime(args) => commands::recognize_time::run(&args, &ctx),
        Command::Dprime(args) => commands::dprime::run(&args, &ctx),
        Command::Psychfit(args) => commands::psychfit::run(&args, &ctx),
        Command::Skinfit(args) => commands::skinfit::run(&args, &ctx),
        Command::Area(args) => commands::area::run(&args, &ctx),
        Command::Synth(args) => commands::synth::run(&args, &ctx),
        Command::Cluster(args) => commands::cluster::run(&args, &ctx),
        Command::Stats(args) => commands::stats::run(&args, &ctx),
    };
    match result {
        Ok(0) => ExitCode::SUCCESS,
        Ok(_) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
