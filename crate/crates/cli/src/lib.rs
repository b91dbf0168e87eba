//! Command-line front end: argument parsing, report envelopes and exit
//! codes. The numerical work lives in `diskinterp`.
//!
//! Exit codes: 0 success, 1 contradiction between conditions that all
//! converged, 2 rejected parameters or malformed input, 3 non-convergence,
//! 4 internal or I/O error.

pub mod args;
pub mod commands;
pub mod input;
pub mod output;

use std::ffi::OsString;

use clap::Parser;
use serde_json::json;

use args::{Cli, Command};
use output::{csv_path, write_csv, write_json, Envelope, Status};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Core(#[from] diskinterp::Error),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("internal error: {0}")]
    Internal(String),
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONTRADICTION: i32 = 1;
pub const EXIT_PARAMETER: i32 = 2;
pub const EXIT_NON_CONVERGENCE: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use diskinterp::Error as E;
        match self {
            CliError::Core(E::NonConvergence { .. } | E::ConstraintViolation { .. }) => EXIT_NON_CONVERGENCE,
            CliError::Core(_) | CliError::Input(_) => EXIT_PARAMETER,
            CliError::Io(_) | CliError::Internal(_) => EXIT_INTERNAL,
        }
    }
}

fn status_code(status: Status) -> i32 {
    match status {
        Status::Ok => EXIT_OK,
        Status::NonConverged => EXIT_NON_CONVERGENCE,
        Status::Contradiction => EXIT_CONTRADICTION,
    }
}

fn dispatch(command: &Command) -> Result<commands::Outcome, CliError> {
    match command {
        Command::Gen(a) => commands::gen(a),
        Command::Metrics(a) => commands::metrics(a),
        Command::Carleson(a) => commands::carleson(a),
        Command::Inner(a) => commands::inner(a),
        Command::Seminorm(a) => commands::seminorm(a),
        Command::Interpolate(a) => commands::interpolate(a),
        Command::Theorem21(a) => commands::theorem21(a),
        Command::Theorem32(a) => commands::theorem32(a),
        Command::Zhu(a) => commands::zhu(a),
        Command::Forelli(a) => commands::forelli(a),
        Command::Closure(a) => commands::closure(a),
        Command::Logtempered(a) => commands::logtempered(a),
        Command::Prop22(a) => commands::prop22(a),
    }
}

fn execute(cli: &Cli) -> Result<i32, CliError> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(CliError::Input("--jobs must be at least 1".to_string()));
        }
        // Fails only if the global pool already exists, which happens when
        // `run` is called twice in one process; the first setting stands.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    let outcome = dispatch(&cli.command)?;
    let out = cli.out.as_deref();
    if let Some(raw) = &outcome.raw {
        match out {
            Some(path) => std::fs::write(path, raw).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?,
            None => print!("{raw}"),
        }
        return Ok(EXIT_OK);
    }
    let config = json!({
        "arguments": serde_json::to_value(&cli.command).map_err(|e| CliError::Internal(e.to_string()))?,
        "resolved": outcome.resolved,
    });
    let envelope = Envelope::new(cli.command.name(), !cli.no_timestamp, outcome.status, config, outcome.report);
    write_json(&envelope, out)?;
    if let Some(path) = csv_path(out, cli.csv.as_deref()) {
        if !outcome.rows.is_empty() {
            write_csv(&path, &outcome.rows)?;
        }
    }
    Ok(status_code(outcome.status))
}

/// Runs the tool on `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARAMETER } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("diskinterp: {e}");
            e.exit_code()
        }
    }
}
