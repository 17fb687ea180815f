use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{HarnessError, Parameters, Preset};

/// One output file, held in memory until the run succeeds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub preset: Preset,
    pub seed: u64,
    pub tool_version: String,
    pub parameters: Parameters,
    pub artifacts: Vec<ArtifactEntry>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl RunManifest {
    pub fn new(preset: Preset, seed: u64, parameters: &Parameters, artifacts: &[Artifact]) -> Self {
        let mut entries: Vec<ArtifactEntry> = artifacts
            .iter()
            .map(|a| ArtifactEntry {
                path: a.name.clone(),
                sha256: sha256_hex(&a.bytes),
                bytes: a.bytes.len() as u64,
            })
            .collect();
        entries.sort_by(|a, b| a.path.cmp(&b.path));
        Self {
            preset,
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            parameters: parameters.clone(),
            artifacts: entries,
        }
    }

    pub fn to_json(&self) -> Vec<u8> {
        let mut bytes = serde_json::to_vec_pretty(self).expect("manifest serializes");
        bytes.push(b'\n');
        bytes
    }

    pub fn write(&self, out: &Path, artifacts: &[Artifact]) -> Result<(), HarnessError> {
        let io = |what: &Path, e: std::io::Error| HarnessError::Output(format!("{}: {e}", what.display()));
        fs::create_dir_all(out).map_err(|e| io(out, e))?;
        for a in artifacts {
            let path = out.join(&a.name);
            fs::write(&path, &a.bytes).map_err(|e| io(&path, e))?;
        }
        let path = out.join(MANIFEST_FILE);
        fs::write(&path, self.to_json()).map_err(|e| io(&path, e))
    }
}
