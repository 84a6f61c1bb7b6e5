//! Command-line front end for the walker control stack.
//!
//! The binary is a thin wrapper over [`run`]; each subcommand is also
//! callable directly from [`commands`].

use std::io::Write;

pub mod args;
pub mod commands;
pub mod error;
pub mod profile;
pub mod replay;

pub use args::{Cli, Command};
pub use error::CliError;

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Calibrate(a) => commands::calibrate(a, out).map(drop),
        Command::Simulate(a) => commands::simulate(a, out).map(drop),
        Command::Infer(a) => commands::infer(a, out).map(drop),
        Command::Analyze(a) => commands::analyze(a, out),
    }
}
