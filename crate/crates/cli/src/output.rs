//! Report envelope, JSON and CSV writers.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use diskinterp::classify::LevelValue;
use diskinterp::report::to_json_string;
use serde::Serialize;

use crate::CliError;

/// Schema identifier written into every report.
pub const SCHEMA: &str = "diskinterp-report/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    /// A numerical step behind some verdict missed its convergence test.
    NonConverged,
    /// Conditions that should agree disagree although every step converged.
    Contradiction,
}

/// One CSV row: a named series of per-level values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelRow {
    pub series: String,
    pub level: u32,
    pub value: f64,
}

pub fn rows(series: &str, levels: &[LevelValue]) -> Vec<LevelRow> {
    levels
        .iter()
        .map(|l| LevelRow {
            series: series.to_string(),
            level: l.level,
            value: l.value,
        })
        .collect()
}

#[derive(Debug, Serialize)]
pub struct Envelope<'a> {
    pub schema: &'static str,
    pub tool_version: &'static str,
    pub command: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generated_unix: Option<u64>,
    pub status: Status,
    pub config: serde_json::Value,
    pub report: serde_json::Value,
}

impl<'a> Envelope<'a> {
    pub fn new(command: &'a str, timestamp: bool, status: Status, config: serde_json::Value, report: serde_json::Value) -> Self {
        let generated_unix = timestamp.then(|| {
            SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0)
        });
        Envelope {
            schema: SCHEMA,
            tool_version: env!("CARGO_PKG_VERSION"),
            command,
            generated_unix,
            status,
            config,
            report,
        }
    }
}

pub fn write_json(envelope: &Envelope, out: Option<&Path>) -> Result<(), CliError> {
    let text = to_json_string(envelope).map_err(|e| CliError::Internal(format!("serialization failed: {e}")))?;
    match out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(format!("cannot write to stdout: {e}"))),
    }
}

/// CSV path: explicit, or next to the JSON output.
pub fn csv_path(out: Option<&Path>, csv: Option<&Path>) -> Option<PathBuf> {
    csv.map(Path::to_path_buf).or_else(|| out.map(|p| p.with_extension("csv")))
}

pub fn write_csv(path: &Path, rows: &[LevelRow]) -> Result<(), CliError> {
    let io = |e: csv::Error| CliError::Io(format!("cannot write {}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(["series", "level", "value"]).map_err(io)?;
    for r in rows {
        let level = r.level.to_string();
        let value = diskinterp::report::format_f64(r.value);
        w.write_record([r.series.as_str(), level.as_str(), value.as_str()]).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}
