//! `sentinel`: security index, canonical forms, attack detection and
//! correction from the command line.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sentinel_core::polyalg::Mode;
use sentinel_core::Error;

/// Exit statuses. Every outcome maps to exactly one.
pub mod status {
    pub const OK: u8 = 0;
    pub const ATTACK_DETECTED: u8 = 1;
    pub const DOMAIN_ERROR: u8 = 2;
    pub const MAJORITY_TIE: u8 = 3;
    pub const USAGE: u8 = 64;
    pub const IO: u8 = 74;
}

#[derive(Parser, Debug)]
#[command(name = "sentinel", version, about = "Sensor-attack detection and correction for LTI systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the security report as JSON.
    Index(SystemArgs),
    /// Write `canonical.json` and `observers.json`.
    Canon(OutArgs),
    /// Check a received signal; exit 1 when an attack is detected.
    Detect(DetectArgs),
    /// Reconstruct the attack-free outputs of a received signal.
    Correct(CorrectArgs),
    /// Run a scenario file and write every signal of the run.
    Simulate(SimulateArgs),
}

#[derive(Args, Debug)]
struct Tuning {
    /// Coefficient field; defaults to the system file's choice.
    #[arg(long)]
    mode: Option<Mode>,
    /// Relative zero threshold for tolerant polynomial arithmetic.
    #[arg(long, value_parser = positive)]
    eps_zero: Option<f64>,
    /// Relative threshold for signal equality in tolerant mode.
    #[arg(long, value_parser = positive)]
    eps_sig: Option<f64>,
}

#[derive(Args, Debug)]
struct SystemArgs {
    /// System JSON: kernel, state_space, md or sampled.
    #[arg(long)]
    system: PathBuf,
    #[command(flatten)]
    tuning: Tuning,
}

#[derive(Args, Debug)]
struct OutArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// Directory for the output files.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct DetectArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// CSV with header `t,y1,...,yN`.
    #[arg(long)]
    signals: PathBuf,
    /// Also write `residual.csv` and `verdict.json` here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CorrectArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// CSV with header `t,y1,...,yN`.
    #[arg(long)]
    signals: PathBuf,
    /// Directory for `corrected.csv`, `observers.csv` and `result.json`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Scenario JSON: system, attack, horizon and seed.
    #[arg(long)]
    scenario: PathBuf,
    /// Replaces the scenario's system.
    #[arg(long)]
    system: Option<PathBuf>,
    /// Run directory for the CSV signals and `result.json`.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    tuning: Tuning,
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(v) => Err(format!("must be positive and finite, got {v}")),
        Err(e) => Err(e.to_string()),
    }
}

/// Exit status for a failed command.
pub fn error_status(err: &Error) -> u8 {
    match err {
        Error::Parse(_) => status::USAGE,
        Error::Io(_) => status::IO,
        Error::MajorityTie { .. } => status::MAJORITY_TIE,
        _ => status::DOMAIN_ERROR,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { status::USAGE } else { status::OK });
        }
    };
    let outcome = match cli.command {
        Command::Index(a) => commands::index(&a),
        Command::Canon(a) => commands::canon(&a),
        Command::Detect(a) => commands::detect(&a),
        Command::Correct(a) => commands::correct(&a),
        Command::Simulate(a) => commands::simulate(&a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("sentinel: {e}");
            ExitCode::from(error_status(&e))
        }
    }
}
