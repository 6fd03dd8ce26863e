//! The `topicsim` executable: every subcommand is a thin adapter over
//! `topicsim-core`, plus the HTTP generation service.

pub mod args;
mod commands;
pub mod config;
pub mod service;

use std::ffi::OsString;

use clap::Parser;

pub use args::Cli;
pub use commands::execute;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad combination of flags; exit code 2.
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] topicsim_core::Error),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid TOML: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            match &e {
                CliError::Usage(msg) => {
                    eprintln!("error: {msg}\n\nFor more information, try '--help'.")
                }
                other => eprintln!("error: {other}"),
            }
            e.exit_code()
        }
    }
}
