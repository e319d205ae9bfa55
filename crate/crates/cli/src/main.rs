use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod manifest;

use commands::Failure;

/// Exact analysis of generalized probabilistic theories.
#[derive(Debug, Parser)]
#[command(name = "gptkit", version)]
struct Cli {
    /// Directory receiving the artifacts and `manifest.json`.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Reduce a probability table to a coordinate representation.
    Reduce { table: PathBuf },
    /// Validate a system and report norms, E^max, no-restriction and joint measurability.
    Analyze {
        system: PathBuf,
        /// Always enumerate E^max, ignoring the size threshold.
        #[arg(long)]
        enumerate: bool,
        /// Enumerate E^max only when dim × state vertices is at most this.
        #[arg(long, default_value_t = 64)]
        emax_threshold: usize,
        /// Membership tolerance for numeric systems.
        #[arg(long)]
        tolerance: Option<f64>,
        /// Seed for sampling numeric systems.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of sampled pure states for numeric systems.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Compose two systems into a joint system.
    Compose {
        left: PathBuf,
        right: PathBuf,
        /// One of min, max, genmax.
        #[arg(long, default_value = "min")]
        rule: String,
        /// Enumerate extremal joint states when they are not already known.
        #[arg(long)]
        enumerate: bool,
        /// Largest n·m for which enumeration is attempted.
        #[arg(long, default_value_t = gptkit::compose::DEFAULT_ENUMERATION_LIMIT)]
        limit: usize,
        /// Cap on intermediate rays during enumeration.
        #[arg(long, default_value_t = 100_000)]
        max_rays: usize,
    },
    /// Evaluate the CHSH value of a joint state, or maximize it.
    Chsh {
        joint: PathBuf,
        measurements: PathBuf,
        /// Joint state `{"coords": [[...], ...]}` to evaluate.
        #[arg(long, required_unless_present = "maximize")]
        state: Option<PathBuf>,
        /// Maximize over all normalized joint states.
        #[arg(long)]
        maximize: bool,
    },
    /// Write a built-in model: gbit, restricted-gbit, classical:N, polygon:N,
    /// holevo, qubit, boxworld, gbit-measurements, classical-measurements,
    /// pr-box, table1.
    Export {
        model: String,
        /// Membership tolerance written into numeric models.
        #[arg(long)]
        tolerance: Option<f64>,
    },
}

fn run(cli: Cli) -> Result<(), Failure> {
    std::fs::create_dir_all(&cli.out).map_err(Failure::other)?;
    let out = cli.out.as_path();
    match cli.command {
        Command::Reduce { table } => commands::reduce(out, &table),
        Command::Analyze { system, enumerate, emax_threshold, tolerance, seed, samples } => {
            commands::analyze(out, &system, &commands::AnalyzeOptions { enumerate, emax_threshold, tolerance, seed, samples })
        }
        Command::Compose { left, right, rule, enumerate, limit, max_rays } => {
            commands::compose(out, &left, &right, &rule, enumerate, limit, max_rays)
        }
        Command::Chsh { joint, measurements, state, maximize } => {
            commands::chsh(out, &joint, &measurements, state.as_deref(), maximize)
        }
        Command::Export { model, tolerance } => commands::export(out, &model, tolerance),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
