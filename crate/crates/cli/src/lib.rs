//! Command-line front end of `admg-learn`.
//!
//! Exit codes: 0 on success, 1 for usage and input errors, 2 for numerical
//! or convergence failures. Runtime errors are reported on stderr as a JSON
//! object `{"error": kind, "message": text}`.

mod args;
mod commands;
mod files;

use std::ffi::OsString;

use clap::Parser;

pub use args::Cli;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERIC: i32 = 2;

/// Error carried to the top level with its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, kind: "usage", message: message.into() }
    }
}

impl From<admg_learn::Error> for CliError {
    fn from(e: admg_learn::Error) -> Self {
        use admg_learn::Error as E;
        let kind = match &e {
            E::Numeric(_) => "numeric",
            E::OptimizationFailure { .. } => "optimization_failure",
            E::DiscoveryFailure { .. } => "discovery_failure",
            E::GenerationFailure { .. } => "generation_failure",
            E::Io(_) => "io",
            E::Json(_) | E::Csv(_) | E::Parse(_) => "parse",
            E::InvalidGraph(_) => "invalid_graph",
            E::NotFixable { .. } => "not_fixable",
            E::Domain(_) => "domain",
            E::InvalidArgument(_) => "invalid_argument",
        };
        let code = if e.is_numeric() { EXIT_NUMERIC } else { EXIT_USAGE };
        Self { code, kind, message: e.to_string() }
    }
}

/// Parses `argv` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match commands::dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let body = serde_json::json!({ "error": e.kind, "message": e.message });
            eprintln!("{body}");
            e.code
        }
    }
}
