//! Library side of the `qcldpc` command-line tool.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;

use std::io::Write;

use args::{Cli, Command};
pub use error::{CliError, CliResult};

pub fn run(cli: &Cli, out: &mut dyn Write) -> CliResult<()> {
    match &cli.command {
        Command::Code(a) => commands::cmd_code(a, out),
        Command::Simulate(a) => commands::cmd_simulate(a, out),
        Command::Floor(a) => commands::cmd_floor(a, out),
        Command::Bound(a) => commands::cmd_bound(a, out),
    }
}
