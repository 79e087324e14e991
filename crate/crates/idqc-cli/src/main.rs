use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use idqc_cli::run::run;

/// Indirect quantum control: check, simulate, synthesize, and validate
/// accessor-steered control scenarios.
#[derive(Parser)]
#[command(name = "idqc", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Scenario file (JSON).
    scenario: PathBuf,
    /// Output directory for result.json and trajectory.csv.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Seed override for the schedule search.
    #[arg(long)]
    seed: Option<u64>,
    /// Samples per cycle in exported trajectories.
    #[arg(long)]
    samples: Option<usize>,
    /// Force the general optimizer even for the spin preset.
    #[arg(long)]
    general: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Validate the plant: non-demolition condition and controllability.
    Check(CommonArgs),
    /// Run a schedule and export the trajectory.
    Simulate(CommonArgs),
    /// Find a schedule steering the initial state to the target.
    Synthesize(CommonArgs),
    /// Cross-check conditional evolution against the full joint evolution.
    Validate(CommonArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, args) = match &cli.command {
        Command::Check(args) => ("check", args),
        Command::Simulate(args) => ("simulate", args),
        Command::Synthesize(args) => ("synthesize", args),
        Command::Validate(args) => ("validate", args),
    };
    match run(
        name,
        &args.scenario,
        &args.out,
        args.seed,
        args.samples,
        args.general,
    ) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
