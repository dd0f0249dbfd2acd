//! Run manifests: every command serializes its resolved flags, seed and
//! input digest next to its outputs so a run can be replayed exactly.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use crate::error::{CmdError, CmdResult};

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub seed: Option<u64>,
    pub flags: BTreeMap<String, serde_json::Value>,
    pub input_digest: Option<String>,
    pub started_at: String,
    pub finished_at: String,
    pub outputs: Vec<String>,
    pub failures: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: None,
            flags: BTreeMap::new(),
            input_digest: None,
            started_at: chrono::Utc::now().to_rfc3339(),
            finished_at: String::new(),
            outputs: Vec::new(),
            failures: Vec::new(),
        }
    }

    pub fn flag(&mut self, name: &str, value: impl Serialize) {
        self.flags.insert(
            name.to_string(),
            serde_json::to_value(value).expect("flag serializes"),
        );
    }

    pub fn record_output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    /// Finalize and write `manifest_<command>.json` into `dir`.
    pub fn write(mut self, dir: &Path) -> CmdResult<()> {
        self.finished_at = chrono::Utc::now().to_rfc3339();
        let path = dir.join(format!("manifest_{}.json", self.command));
        let body = serde_json::to_string_pretty(&self)
            .map_err(|e| CmdError::Io(format!("manifest serialization: {e}")))?;
        std::fs::write(&path, body)
            .map_err(|e| CmdError::Io(format!("writing {}: {e}", path.display())))?;
        Ok(())
    }
}

/// SHA-256 digest of a file's raw bytes.
pub fn file_digest(path: &Path) -> CmdResult<String> {
    use sha2::{Digest, Sha256};
    let bytes = std::fs::read(path)
        .map_err(|e| CmdError::Io(format!("reading {}: {e}", path.display())))?;
    Ok(hex::encode(Sha256::digest(bytes)))
}
