//! Command-line front end for `cbi-core`.
//!
//! Exit codes: 0 on success, 1 on usage, parse, domain or I/O errors,
//! 2 when a classification is inconclusive.

pub mod args;
pub mod config;
pub mod format;
pub mod run;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::Parser;
use thiserror::Error;

pub use args::{Cli, Sub};
pub use config::{Command, ExperimentConfig, Format};
pub use run::{run, Report, RunOutcome};

/// Environment variable naming the default report directory.
pub const REPORT_DIR_ENV: &str = "CBI_REPORT_DIR";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] cbi_core::Error),
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(format!("json: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(format!("csv: {e}"))
    }
}

fn write_reports(reports: &[Report]) -> Result<(), CliError> {
    for r in reports {
        match &r.path {
            Some(p) => {
                if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
                }
                std::fs::write(p, &r.contents).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
            }
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(r.contents.as_bytes()).map_err(|e| CliError::Io(e.to_string()))?;
            }
        }
    }
    Ok(())
}

fn execute(cli: Cli, report_dir: Option<PathBuf>) -> Result<i32, CliError> {
    let config = match cli.command.into_config() {
        Ok(c) => c,
        Err(path) => ExperimentConfig::from_file(&path)?,
    };
    let outcome = run(&config, report_dir.as_deref())?;
    write_reports(&outcome.reports)?;
    Ok(outcome.exit_code)
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let report_dir = std::env::var_os(REPORT_DIR_ENV).map(PathBuf::from);
    match execute(cli, report_dir) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
