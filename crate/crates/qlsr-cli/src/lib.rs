//! Command implementations behind the `qlsr` binary.
//!
//! Every command writes to the given sink and returns whether its check
//! passed; usage and parse problems come back as [`CliError::Usage`].

pub mod args;
pub mod bench;
pub mod commands;
mod report;

use std::io::Write;

use thiserror::Error;

pub use args::Cli;
pub use bench::{run_bench, BenchRow};

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad arguments or unreadable input; exit code 2.
    #[error("{0}")]
    Usage(String),
    /// The command ran but could not finish; exit code 1.
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failed(_) => 1,
        }
    }
}

/// Runs one parsed command; `Ok(true)` maps to exit code 0, `Ok(false)` to 1.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<bool, CliError> {
    use args::Command::*;
    match cli.command {
        Check(a) => commands::check(&a, out),
        Reduce(a) => commands::reduce(&a, out),
        H2(a) => commands::h2(&a, out),
        Bode(a) => commands::bode(&a, out),
        Gen(a) => commands::gen(&a, out),
        Bench(a) => bench::bench(&a, out),
    }
}
