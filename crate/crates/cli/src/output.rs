//! Artifact envelopes, atomic writes and error reporting.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or input files; exit code 2.
    Usage(String),
    /// A numerical routine failed; exit code 1.
    Compute(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Compute(_) => 1,
        }
    }

    pub fn to_json(&self) -> Value {
        let (kind, message) = match self {
            CliError::Usage(m) => ("usage", m),
            CliError::Compute(m) => ("compute", m),
        };
        json!({ "error": { "kind": kind, "code": self.code(), "message": message } })
    }
}

impl From<diracspec::Error> for CliError {
    fn from(e: diracspec::Error) -> Self {
        use diracspec::Error::*;
        match e {
            InvalidArgument(_) | Domain(_) | DimensionMismatch { .. } | MemoryCap { .. } => {
                CliError::Usage(e.to_string())
            }
            Singular(_) | EigenFailure | Overflow(_) => CliError::Compute(e.to_string()),
        }
    }
}

pub fn usage<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Usage(msg.into()))
}

/// Everything needed to replay a run.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub params: Value,
    pub seed: u64,
    pub out: Option<String>,
    pub format: String,
}

/// A command's result plus the property verdict deciding the exit code.
pub struct Outcome {
    pub result: Value,
    pub csv: Option<String>,
    pub violation: Option<String>,
}

impl Outcome {
    pub fn ok<T: Serialize>(result: &T) -> Result<Self, CliError> {
        Ok(Self { result: to_value(result)?, csv: None, violation: None })
    }

    pub fn checked<T: Serialize>(result: &T, violation: Option<String>) -> Result<Self, CliError> {
        Ok(Self { result: to_value(result)?, csv: None, violation })
    }
}

pub fn to_value<T: Serialize>(v: &T) -> Result<Value, CliError> {
    serde_json::to_value(v).map_err(|e| CliError::Compute(format!("serialization failed: {e}")))
}

pub fn envelope(config: &RunConfig, result: Value) -> Value {
    json!({
        "version": diracspec::VERSION,
        "seed": config.seed,
        "config": config,
        "result": result,
    })
}

/// Write through a sibling temporary file and rename into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let io = |e: std::io::Error| CliError::Usage(format!("cannot write {}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

pub fn emit(config: &RunConfig, outcome: &Outcome) -> Result<(), CliError> {
    let text = match &outcome.csv {
        Some(csv) if config.format == "csv" => csv.clone(),
        _ => {
            let mut s = serde_json::to_string_pretty(&envelope(config, outcome.result.clone()))
                .map_err(|e| CliError::Compute(e.to_string()))?;
            s.push('\n');
            s
        }
    };
    match &config.out {
        Some(path) => write_atomic(Path::new(path), &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
