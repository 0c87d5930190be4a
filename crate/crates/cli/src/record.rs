//! Exit statuses and the machine-readable run record.

use std::fmt;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_REFUSED: i32 = 2;
pub const EXIT_CHECK_FAILED: i32 = 3;

/// Why a run did not produce a result.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, unreadable or malformed input.
    Usage(String),
    Engine(specmult::Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Engine(e) if e.is_refusal() => EXIT_REFUSED,
            Failure::Engine(_) => EXIT_USAGE,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => f.write_str(m),
            Failure::Engine(e) => write!(f, "{e}"),
        }
    }
}

impl From<specmult::Error> for Failure {
    fn from(e: specmult::Error) -> Self {
        Failure::Engine(e)
    }
}

impl From<String> for Failure {
    fn from(m: String) -> Self {
        Failure::Usage(m)
    }
}

/// A finished computation: its primary output and whether its check held.
pub struct Outcome {
    pub output: String,
    pub passed: bool,
    pub summary: Value,
}

impl Outcome {
    pub fn new(output: String, passed: bool, summary: Value) -> Self {
        Outcome { output, passed, summary }
    }
}

#[derive(Serialize)]
pub struct Metadata {
    pub timestamp_unix_ms: u128,
}

#[derive(Serialize)]
pub struct RunRecord {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: Value,
    pub exit_code: i32,
    pub result: Value,
    pub error: Option<String>,
    /// Everything that may differ between identical runs lives here.
    pub metadata: Metadata,
}

impl RunRecord {
    pub fn new(command: String, config: Value, exit_code: i32, result: Value, error: Option<String>) -> Self {
        let timestamp_unix_ms = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_millis())
            .unwrap_or(0);
        RunRecord {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            config,
            exit_code,
            result,
            error,
            metadata: Metadata { timestamp_unix_ms },
        }
    }
}
