use std::process::ExitCode;
use std::time::SystemTime;

use clap::{Parser, Subcommand};

use quasiweb_cli::commands::run;
use quasiweb_cli::config::{Flags, RunConfig};
use quasiweb_cli::output::deliver;
use quasiweb_cli::CliError;

/// Quasienergy states, Husimi fields and classical web sections of a
/// resonantly driven harmonic oscillator.
#[derive(Parser)]
#[command(name = "quasiweb", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List resonance cells on a ladder
    #[command(allow_negative_numbers = true)]
    Cells(Flags),
    /// Quasienergy spectrum and ground states of one cell
    #[command(allow_negative_numbers = true)]
    Qe(Flags),
    /// Husimi field of the cell's ground state(s)
    #[command(allow_negative_numbers = true)]
    Husimi(Flags),
    /// Stroboscopic sections of the classical motion
    #[command(allow_negative_numbers = true)]
    Classical(Flags),
    /// Combined quantum/classical symmetry report with pass/fail checks
    #[command(allow_negative_numbers = true)]
    Report(Flags),
}

fn execute(cli: Cli) -> Result<Option<String>, CliError> {
    let started = SystemTime::now();
    let (name, flags) = match cli.command {
        Command::Cells(f) => ("cells", f),
        Command::Qe(f) => ("qe", f),
        Command::Husimi(f) => ("husimi", f),
        Command::Classical(f) => ("classical", f),
        Command::Report(f) => ("report", f),
    };
    let cfg = RunConfig::resolve(name, flags)?;
    let emission = run(&cfg)?;
    deliver(cfg.out.as_deref(), &emission, started)?;
    Ok(emission.failure)
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(msg)) => {
            eprintln!("quasiweb: {msg}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("quasiweb: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
