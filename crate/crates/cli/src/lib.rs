//! Command-line front end for `squeeze-core`.
//!
//! Human-facing values are in dB and MHz; everything handed to the library
//! is linear and in Hz. Outputs are CSV or JSON files that are byte-identical
//! for identical inputs unless `--provenance` is given.

pub mod args;
pub mod commands;
pub mod error;
pub mod format;

use clap::{Parser, Subcommand};

pub use error::{CliError, Result};

#[derive(Parser, Debug)]
#[command(name = "squeeze", version)]
#[command(
    about = "Squeezed-vacuum analysis: loss inference, Fock matrices, Wigner grids, OPO spectra, homodyne simulation"
)]
pub struct Cli {
    /// Add tool version, arguments and a timestamp to every output file.
    #[arg(long, global = true)]
    pub provenance: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    Analyze(commands::analyze::AnalyzeArgs),
    Fock(commands::fock::FockArgs),
    Wigner(commands::wigner::WignerArgs),
    #[command(subcommand)]
    Spectrum(commands::spectrum::SpectrumCommand),
    Simulate(commands::simulate::SimulateArgs),
}

pub fn run(cli: Cli) -> Result<()> {
    let p = cli.provenance;
    match cli.command {
        Command::Analyze(args) => commands::analyze::run(args, p),
        Command::Fock(args) => commands::fock::run(args, p),
        Command::Wigner(args) => commands::wigner::run(args, p),
        Command::Spectrum(cmd) => commands::spectrum::run(cmd, p),
        Command::Simulate(args) => commands::simulate::run(args, p),
    }
}

/// Parses `args` (program name first) and runs the command, as the binary
/// does.
pub fn run_from<I, T>(args: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli =
        Cli::try_parse_from(args).map_err(|e| CliError::invalid("arguments", e.to_string()))?;
    run(cli)
}
