use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Provenance of one invocation. Everything but `wall_seconds` is
/// deterministic for a given configuration.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub name: String,
    pub command: String,
    pub config_sha256: String,
    pub version: String,
    pub seed: Option<u64>,
    pub outputs: Vec<String>,
    pub wall_seconds: f64,
}

pub fn config_hash(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

impl RunManifest {
    pub fn new(name: &str, command: &str, config_text: &str, seed: Option<u64>) -> Self {
        Self {
            name: name.to_owned(),
            command: command.to_owned(),
            config_sha256: config_hash(config_text),
            version: env!("CARGO_PKG_VERSION").to_owned(),
            seed,
            outputs: Vec::new(),
            wall_seconds: 0.0,
        }
    }

    pub fn add(&mut self, dir: &Path, path: &Path) {
        let rel: PathBuf = path.strip_prefix(dir).map(Path::to_path_buf).unwrap_or_else(|_| path.to_path_buf());
        self.outputs.push(rel.to_string_lossy().into_owned());
    }

    pub fn write(&self, dir: &Path) -> std::io::Result<PathBuf> {
        let path = dir.join("manifest.json");
        std::fs::write(&path, serde_json::to_string_pretty(self).expect("manifest serializes") + "\n")?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_is_stable() {
        assert_eq!(
            config_hash(""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
        assert_eq!(config_hash("a = 1"), config_hash("a = 1"));
        assert_ne!(config_hash("a = 1"), config_hash("a = 2"));
    }
}
