//! Reading sequences, functions and target values from files.

use std::fs;
use std::path::Path;

use diskinterp::blaschke::BlaschkeProduct;
use diskinterp::sequences::DiskSequence;
use diskinterp::spaces::AnalyticFunction;
use diskinterp::Complex64;

use crate::CliError;

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

/// Sequences come as text (`re im` per line), as JSON accepted by
/// [`DiskSequence::from_json`], or as a report written by `gen`.
pub fn load_sequence(path: &Path) -> Result<DiskSequence, CliError> {
    let text = read(path)?;
    let name = path.display();
    let trimmed = text.trim_start();
    if !(trimmed.starts_with('[') || trimmed.starts_with('{')) {
        return DiskSequence::from_text(&text).map_err(|e| CliError::Input(format!("{name}: {e}")));
    }
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{name}: malformed JSON: {e}")))?;
    let inner = match value.get("report") {
        Some(report) => report.clone(),
        None => value,
    };
    DiskSequence::from_json(&inner.to_string()).map_err(|e| {
        // Line numbers refer to the re-serialized value and mean nothing here.
        let detail = match e {
            diskinterp::Error::Parse { message, .. } => message,
            other => other.to_string(),
        };
        CliError::Input(format!("{name}: field `points`: {detail}"))
    })
}

/// `identity`, `log`, inline JSON (`{"kind": ...}`) or a JSON file.
pub fn parse_function(spec: &str) -> Result<AnalyticFunction, CliError> {
    let json = match spec {
        "identity" => return Ok(AnalyticFunction::identity()),
        "log" | "log_branch" => return Ok(AnalyticFunction::LogBranch),
        s if s.trim_start().starts_with('{') => s.to_string(),
        path => read(Path::new(path))?,
    };
    let f: AnalyticFunction =
        serde_json::from_str(&json).map_err(|e| CliError::Input(format!("function {spec:?}: {e}")))?;
    f.validate().map_err(CliError::Core)?;
    Ok(f)
}

pub fn load_function(function: Option<&str>, zeros: Option<&Path>) -> Result<AnalyticFunction, CliError> {
    match (function, zeros) {
        (_, Some(path)) => Ok(AnalyticFunction::blaschke(BlaschkeProduct::from_sequence(&load_sequence(path)?))),
        (Some(spec), None) => parse_function(spec),
        (None, None) => Err(CliError::Input("one of --function or --zeros is required".to_string())),
    }
}

/// JSON array of `[re, im]` pairs.
pub fn load_values(path: &Path) -> Result<Vec<Complex64>, CliError> {
    let text = read(path)?;
    let pairs: Vec<[f64; 2]> = serde_json::from_str(&text)
        .map_err(|e| CliError::Input(format!("{}: expected an array of [re, im] pairs: {e}", path.display())))?;
    Ok(pairs.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
}
