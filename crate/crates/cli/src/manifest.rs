//! Run manifests: what was run, on which inputs, and what came out.

use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

impl InputDigest {
    pub fn of(path: &str, bytes: &[u8]) -> InputDigest {
        InputDigest { path: path.to_string(), sha256: hex::encode(Sha256::digest(bytes)) }
    }
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: Vec<String>,
    pub parameters: Value,
    pub version: &'static str,
    pub timestamp: String,
    pub inputs: Vec<InputDigest>,
    pub result: Value,
    /// Scheduling-dependent counters, kept out of `result`.
    #[serde(skip_serializing_if = "Value::is_null")]
    pub stats: Value,
}

impl RunManifest {
    pub fn new(command: Vec<String>, parameters: Value, inputs: Vec<InputDigest>, result: Value, stats: Value) -> Self {
        RunManifest {
            command,
            parameters,
            version: env!("CARGO_PKG_VERSION"),
            timestamp: chrono::Utc::now().to_rfc3339(),
            inputs,
            result,
            stats,
        }
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, serde_json::to_string_pretty(self).expect("manifest serialises") + "\n")?;
        fs::rename(tmp, path)
    }
}
