//! `qdad`: construct quasi-Dirac delay-amplitude distributions and emit
//! figure-ready data files for their weights, moments, transmitted
//! envelopes, transmission amplitudes, and post-selection reports.

mod commands;
mod config;
mod emit;

use clap::Parser;
use std::process::ExitCode;

#[derive(Debug)]
pub enum CliError {
    Param(String),
    Precision { required: u32, got: u32 },
    Io(std::io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Param(msg) => write!(f, "{msg}"),
            CliError::Precision { required, got } => write!(
                f,
                "working precision of {got} digits is insufficient; rerun with --digits {required} or higher"
            ),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<qdad::Error> for CliError {
    fn from(e: qdad::Error) -> Self {
        match e {
            qdad::Error::PrecisionInsufficient { required, got } => {
                CliError::Precision { required, got }
            }
            other => CliError::Param(other.to_string()),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Param(_) => 1,
            CliError::Precision { .. } => 2,
            CliError::Io(_) => 3,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "qdad",
    version,
    about = "Quasi-Dirac delay-amplitude distributions, superoscillatory transmission amplitudes, and shifted pulse envelopes",
    after_help = "Numbers accept decimals (-15.5, 2.5e-3) and fractions (31/2); both are read exactly.\n\
                  Exit codes: 0 success, 1 parameter error, 2 insufficient precision, 3 I/O error."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Subcommand)]
enum Command {
    /// Weight table eta_m of the distribution, one file per shift in a list
    Dad(config::CommonArgs),
    /// Moment table: n-th moment against alpha^n, one file per order K
    Moments(config::CommonArgs),
    /// Transmitted envelope over a coordinate grid, with the shifted target
    Envelope(config::CommonArgs),
    /// Transmission amplitude over a momentum grid, with the target
    /// exponential, spectral amplitude, and superoscillatory windows
    Transmission(config::CommonArgs),
    /// Optimal pre/post-selection: weights, probabilities, state pair
    Postselect(config::CommonArgs),
}

fn run(cli: Cli) -> Result<Vec<std::path::PathBuf>, CliError> {
    match &cli.command {
        Command::Dad(args) => commands::cmd_dad(&args.resolve("dad")?),
        Command::Moments(args) => commands::cmd_moments(&args.resolve("moments")?),
        Command::Envelope(args) => commands::cmd_envelope(&args.resolve("envelope")?),
        Command::Transmission(args) => commands::cmd_transmission(&args.resolve("transmission")?),
        Command::Postselect(args) => commands::cmd_postselect(&args.resolve("postselect")?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version are not errors
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
