//! The `linag` command line: `refine`, `satisfy`, `extend`, `casestudy` and
//! `export`, each producing a JSON report that embeds a [`RunManifest`].

pub mod args;
pub mod commands;
pub mod error;
pub mod files;
pub mod manifest;

use std::io::Write;

use linag_core::Execution;

pub use args::Cli;
pub use error::{CliError, Exit};
pub use manifest::RunManifest;

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<Exit, CliError> {
    let exec = if cli.sequential { Execution::Sequential } else { Execution::Parallel };
    match &cli.command {
        args::Command::Refine(a) => commands::refine(a, exec, out),
        args::Command::Satisfy(a) => commands::satisfy(a, exec, out),
        args::Command::Extend(a) => commands::extend(a, out),
        args::Command::Casestudy(a) => commands::casestudy(a, exec, out),
        args::Command::Export(a) => commands::export(a, out),
    }
}
