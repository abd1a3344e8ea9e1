//! Command-line front end for `fisherlab`: product curves for the
//! Hermite-Gaussian family, long-time decay fits for arbitrary initial
//! states, parameter sweeps and a self-check suite.

pub mod check;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod state;

use std::ffi::OsString;

use clap::Parser;

use crate::commands::{Cli, Command};
use crate::error::exit;

/// Parses `args` (program name first) and runs the command, returning the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() { exit::USAGE } else { exit::OK };
        }
    };
    let result = match &cli.command {
        Command::Reproduce(a) => commands::reproduce(a),
        Command::Conjecture(a) => commands::conjecture(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Check(a) => check::check(a),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}
