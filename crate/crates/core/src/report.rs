//! Self-describing run reports emitted by the command-line tool.

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

/// What a report was computed from.
#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub file: String,
    pub sha256: String,
    pub beta: Option<f64>,
    pub overrides: Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    pub inputs: InputDigest,
    pub results: Value,
    pub warnings: Vec<String>,
}

impl RunReport {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
