//! `logsupmod` command-line interface.

mod args;
mod commands;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::Cli;

/// Exit statuses.
pub mod exit {
    pub const SUCCESS: u8 = 0;
    /// Unknown flag or other command-line misuse.
    pub const USAGE: u8 = 2;
    /// Unreadable or inconsistent input data.
    pub const DATA: u8 = 3;
    /// Numerical failure, including a failing self-test.
    pub const NUMERICAL: u8 = 4;
    /// A flag or configuration value that does not parse or is out of range.
    pub const MALFORMED_VALUE: u8 = 5;
    pub const MISSING_SUBCOMMAND: u8 = 6;
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => exit::SUCCESS,
                ErrorKind::InvalidValue | ErrorKind::ValueValidation => exit::MALFORMED_VALUE,
                ErrorKind::MissingSubcommand | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    exit::MISSING_SUBCOMMAND
                }
                _ => exit::USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
