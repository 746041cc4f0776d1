//! `spdc`: tuning curves, delay scans, polarization correlations, state
//! reports and counting budgets for beamlike type-II down-conversion.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RunConfig;
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "spdc", version, about = "Beamlike type-II SPDC simulator")]
struct Cli {
    /// Flat JSON configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output file (written atomically); standard output when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Seed for the counting simulation.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Override one configuration key, e.g. `--set theta_p_deg=49.2`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Emission angle versus wavelength for both polarizations (CSV).
    TuningCurve,
    /// Normalized coincidence rate versus delay (CSV plus JSON sidecar).
    HomScan,
    /// Coincidence probability versus the second analyzer angle (CSV plus JSON sidecar).
    PolCorrelation {
        /// Rotate the first analyzer together with the second.
        #[arg(long)]
        track: bool,
    },
    /// Two-photon state report for the configured scheme (JSON).
    State,
    /// Efficiency budget and seeded counting simulation (table).
    Counts,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut overrides = cli.set.clone();
    if let Some(seed) = cli.seed {
        overrides.push(format!("seed={seed}"));
    }
    let cfg = RunConfig::load(cli.config.as_deref(), &overrides)?;
    let out = cli.out.or_else(|| cfg.out.as_ref().map(PathBuf::from));
    let out = out.as_deref();
    match cli.command {
        Command::TuningCurve => commands::emit(&commands::tuning_curve(&cfg)?, out),
        Command::HomScan => commands::emit(&commands::hom_scan_cmd(&cfg)?, out),
        Command::PolCorrelation { track } => commands::emit(&commands::pol_correlation(&cfg, track)?, out),
        Command::State => commands::emit(&commands::state(&cfg)?, out),
        Command::Counts => {
            let (table, summary) = commands::counts(&cfg)?;
            print!("{table}");
            if let Some(path) = out {
                output::write_atomic(path, &(serde_json::to_string_pretty(&summary)? + "\n"))?;
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
