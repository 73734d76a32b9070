//! Run manifests: what ran, on which inputs, and what it wrote.

use crate::config::sha256_hex;
use crate::error::{CliError, CliResult};
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    /// SHA-256 of the ingested config bytes.
    pub config_hash: String,
    pub seed: u64,
    pub inputs: Vec<InputDigest>,
    pub timings: Vec<StageTiming>,
    /// Paths relative to the manifest's directory.
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, config_hash: String, seed: u64) -> Self {
        Self {
            command: command.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash,
            seed,
            inputs: Vec::new(),
            timings: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn input(&mut self, path: &Path, bytes: &[u8]) {
        self.inputs.push(InputDigest {
            path: path.display().to_string(),
            sha256: sha256_hex(bytes),
        });
    }

    /// Records the wall time since `start` under `stage`.
    pub fn stage(&mut self, stage: &str, start: Instant) {
        self.timings.push(StageTiming {
            stage: stage.to_string(),
            seconds: start.elapsed().as_secs_f64(),
        });
    }

    pub fn output(&mut self, name: impl Into<String>) {
        self.outputs.push(name.into());
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        let json = serde_json::to_vec_pretty(self)
            .map_err(|e| CliError::Internal(format!("manifest: {e}")))?;
        write_atomic(path, &json)
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let bytes = std::fs::read(path).map_err(|e| CliError::input(path, e))?;
        serde_json::from_slice(&bytes)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
    }
}

/// Writes via a temporary file in the same directory and a rename, so a
/// reader never sees a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| CliError::io(&dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}
