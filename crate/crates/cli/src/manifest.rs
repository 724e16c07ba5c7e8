//! Run manifests: what was run, with which resolved configuration, and
//! digests of every file the run wrote.

use std::path::Path;

use chrono::{SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: Vec<String>,
    pub config: serde_json::Value,
    pub version: String,
    pub seed: u64,
    pub started: String,
    pub finished: String,
    pub outputs: Vec<OutputDigest>,
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

impl RunManifest {
    pub fn start(command: Vec<String>, config: serde_json::Value, seed: u64) -> Self {
        let t = now();
        RunManifest {
            command,
            config,
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            started: t.clone(),
            finished: t,
            outputs: Vec::new(),
        }
    }

    pub fn finish(&mut self) {
        self.finished = now();
    }

    pub fn record_file(&mut self, path: &Path) -> std::io::Result<()> {
        let bytes = std::fs::read(path)?;
        self.outputs.push(OutputDigest {
            path: path.display().to_string(),
            sha256: sha256_hex(&bytes),
        });
        Ok(())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Sidecar manifest path for a result file: `<path>.manifest.json`.
pub fn sidecar(path: &Path) -> std::path::PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".manifest.json");
    name.into()
}
