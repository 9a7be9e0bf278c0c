use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use chrono::{DateTime, SecondsFormat, Utc};
use serde::Serialize;
use serde_json::Value;

/// Sidecar record describing one invocation and the files it wrote.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub seed: Option<u64>,
    pub started: String,
    pub finished: String,
    pub config: Value,
    pub outputs: Vec<String>,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub results: Value,
}

pub fn timestamp(t: DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Millis, true)
}

/// `results.csv` → `results.manifest.json`.
pub fn default_path(output: &Path) -> PathBuf {
    output.with_extension("manifest.json")
}

impl RunManifest {
    pub fn new(
        command: &'static str,
        seed: Option<u64>,
        started: DateTime<Utc>,
        config: Value,
    ) -> Self {
        RunManifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed,
            started: timestamp(started),
            finished: String::new(),
            config,
            outputs: Vec::new(),
            results: Value::Null,
        }
    }

    pub fn write(mut self, path: &Path) -> Result<()> {
        self.finished = timestamp(Utc::now());
        let text = serde_json::to_string_pretty(&self)?;
        fs::write(path, text + "\n").with_context(|| format!("writing manifest {}", path.display()))
    }
}
