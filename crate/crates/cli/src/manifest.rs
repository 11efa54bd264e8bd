use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ConfigSnapshot;

#[derive(Debug, Clone, Serialize)]
pub struct ArtifactEntry {
    pub name: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Run record written next to the artifacts. Contains no timestamps, so
/// identical runs produce byte-identical manifests.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub tool_version: &'static str,
    pub command: String,
    pub config: ConfigSnapshot,
    pub artifacts: Vec<ArtifactEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

pub fn sha256_file(path: &Path) -> anyhow::Result<String> {
    let bytes =
        std::fs::read(path).map_err(|e| anyhow::anyhow!("cannot hash {}: {e}", path.display()))?;
    Ok(sha256_hex(&bytes))
}

impl Manifest {
    pub fn new(command: &str, config: ConfigSnapshot) -> Self {
        Manifest {
            tool: "textcbn",
            tool_version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            config,
            artifacts: Vec::new(),
        }
    }

    /// Hashes an artifact that was just written and records it.
    pub fn record(&mut self, path: &Path) -> anyhow::Result<()> {
        let bytes = std::fs::metadata(path)
            .map_err(|e| anyhow::anyhow!("cannot stat {}: {e}", path.display()))?
            .len();
        self.artifacts.push(ArtifactEntry {
            name: path
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string()),
            sha256: sha256_file(path)?,
            bytes,
        });
        Ok(())
    }

    pub fn write(&self, output_dir: &Path) -> anyhow::Result<PathBuf> {
        let path = output_dir.join("manifest.json");
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(&path, json)
            .map_err(|e| anyhow::anyhow!("cannot write {}: {e}", path.display()))?;
        Ok(path)
    }
}
