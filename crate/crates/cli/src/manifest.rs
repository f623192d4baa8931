use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::CliResult;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InputDigest {
    pub role: String,
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

impl InputDigest {
    /// Digest of a file, or of every file directly inside a directory in
    /// name order.
    pub fn of(role: &str, path: &Path) -> CliResult<Vec<Self>> {
        let mut files = Vec::new();
        if path.is_dir() {
            let mut entries: Vec<_> =
                std::fs::read_dir(path)?.filter_map(|e| e.ok()).map(|e| e.path()).filter(|p| p.is_file()).collect();
            entries.sort();
            files.extend(entries);
        } else {
            files.push(path.to_path_buf());
        }
        files
            .into_iter()
            .map(|f| {
                let data = std::fs::read(&f)?;
                Ok(InputDigest {
                    role: role.to_string(),
                    path: f.display().to_string(),
                    bytes: data.len() as u64,
                    sha256: hex::encode(Sha256::digest(&data)),
                })
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StageStatus {
    Ok,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StageRecord {
    pub name: String,
    pub status: StageStatus,
    /// Paths relative to the output directory.
    pub outputs: Vec<String>,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    /// Wall-clock seconds, recorded only on request so that repeated runs
    /// produce identical manifests.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seconds: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub config: RunConfig,
    pub inputs: Vec<InputDigest>,
    pub stages: Vec<StageRecord>,
}

impl RunManifest {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        let mut snapshot = config.clone();
        snapshot.out = None;
        RunManifest {
            tool: "savor".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            seed: config.seed,
            config: snapshot,
            inputs: Vec::new(),
            stages: Vec::new(),
        }
    }

    /// Records the digest of an input unless it was already recorded.
    pub fn add_input(&mut self, role: &str, path: &Path) -> CliResult<()> {
        for d in InputDigest::of(role, path)? {
            if !self.inputs.iter().any(|i| i.path == d.path) {
                self.inputs.push(d);
            }
        }
        Ok(())
    }
}
