//! `cavspin` command line: one subcommand per experiment, CSV plus a JSON
//! manifest per run. Exit codes: 0 success, 2 bad input, 3 numerical failure.

mod config;
mod experiments;
mod failure;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Experiment, Flags, RunConfig};
use failure::Failure;

#[derive(Debug, Parser)]
#[command(name = "cavspin", version, about = "Cavity-coupled spin ensemble experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Cavity field after a kick, with the closed forms that apply.
    #[command(allow_negative_numbers = true)]
    Decay(Flags),
    /// Collective means, excess variances and relaxation from a tilted spin state.
    #[command(allow_negative_numbers = true)]
    Moments(Flags),
    /// Reflection and transmission of a weak probe against its detuning.
    #[command(allow_negative_numbers = true)]
    Spectrum(Flags),
    /// Analytic and numeric stability verdicts over a (g_ens, kappa) grid.
    #[command(allow_negative_numbers = true)]
    StabilitySweep(Flags),
    /// Slow and fast poles of a Gaussian line.
    #[command(allow_negative_numbers = true)]
    Pole(Flags),
}

fn execute(experiment: Experiment, flags: &Flags) -> Result<(), Failure> {
    let cfg = RunConfig::resolve(experiment, flags)?;
    let table = experiments::run(&cfg)?;
    let manifest = output::write_run(&table, experiment.name(), &cfg.out, cfg.config_file.as_deref())?;
    eprintln!("wrote {} rows to {} ({})", table.rows.len(), cfg.out.display(), manifest.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, flags) = match &cli.command {
        Command::Decay(f) => (Experiment::Decay, f),
        Command::Moments(f) => (Experiment::Moments, f),
        Command::Spectrum(f) => (Experiment::Spectrum, f),
        Command::StabilitySweep(f) => (Experiment::StabilitySweep, f),
        Command::Pole(f) => (Experiment::Pole, f),
    };
    match execute(experiment, flags) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cavspin {}: {e}", experiment.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
