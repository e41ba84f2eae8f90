//! `spinchain` command-line front end.
//!
//! Exit codes: 0 success, 1 computation or verification failure, 2 invalid
//! configuration, 3 instance too large, 4 I/O error.

use std::fmt;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod output;
mod svg;

use commands::Figure;
use config::{Flags, RunConfig};

#[derive(Parser, Debug)]
#[command(
    name = "spinchain",
    version,
    about = "Thermal entanglement of spin-s Heisenberg rings by exact diagonalization"
)]
struct Cli {
    #[command(flatten)]
    flags: Flags,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Energy levels and degeneracies.
    Spectrum,
    /// Thermal energy, second moment and variance at each temperature.
    Thermal,
    /// Energy witness W = <H> - E_min at each temperature.
    Witness,
    /// Negativity of the nearest-neighbour reduced state.
    Negativity {
        /// Report the temperature above which the two-site negativity vanishes.
        #[arg(long)]
        threshold: bool,
    },
    /// Characteristic temperature where the witness changes sign.
    Tc,
    /// Tables behind the figures.
    Scan {
        #[arg(value_enum)]
        figure: Figure,
    },
    /// Minimum product-state energy and the minimizing state.
    Emin,
    /// Run the built-in reference checks.
    Verify,
}

/// A failure carrying its process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError { code: 2, message: message.into() }
    }

    pub fn io(message: impl Into<String>) -> Self {
        CliError { code: 4, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<spinchain::Error> for CliError {
    fn from(e: spinchain::Error) -> Self {
        use spinchain::Error as E;
        let (code, field) = match &e {
            E::InvalidSpin { .. } => (2, Some("spin")),
            E::InvalidTemperature(_) => (2, Some("temperature")),
            E::InvalidCoupling(_) => (2, Some("coupling")),
            E::InvalidChain(_) => (2, None),
            E::TooLarge { .. } => (3, None),
            E::Io(_) => (4, None),
            _ => (1, None),
        };
        let message = match field {
            Some(f) => format!("{f}: {e}"),
            None => e.to_string(),
        };
        CliError { code, message }
    }
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    let cfg = RunConfig::resolve(&cli.flags)?;
    let outcome = match &cli.command {
        Command::Spectrum => commands::spectrum(&cfg)?,
        Command::Thermal => commands::thermal(&cfg)?,
        Command::Witness => commands::witness_cmd(&cfg)?,
        Command::Negativity { threshold } => commands::negativity_cmd(&cfg, *threshold)?,
        Command::Tc => commands::tc(&cfg)?,
        Command::Scan { figure } => commands::scan(&cfg, *figure)?,
        Command::Emin => commands::emin(&cfg)?,
        Command::Verify => commands::verify_cmd(&cfg)?,
    };
    output::emit(&outcome.report, cfg.format, cfg.out.as_deref())?;
    Ok(outcome.ok)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: one or more checks failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
