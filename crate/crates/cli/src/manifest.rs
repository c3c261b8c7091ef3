use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// Versions of the producing binaries and formats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub roughflow: String,
    pub cli: String,
    pub field_format: u32,
}

/// `manifest.json`: enough to re-run the command that produced a directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub argv: Vec<String>,
    /// Resolved config, defaults and overrides applied.
    pub config: serde_json::Value,
    /// SHA-256 of the compact JSON of `config`.
    pub config_sha256: String,
    pub seed: Option<u64>,
    pub jobs: usize,
    pub strict: bool,
    pub versions: Versions,
    pub wall_time_s: f64,
    /// Files written, relative to the output directory.
    pub outputs: Vec<String>,
    pub warnings: Vec<String>,
}

pub fn config_hash(config: &serde_json::Value) -> String {
    let bytes = serde_json::to_vec(config).expect("JSON value serialises");
    hex::encode(Sha256::digest(&bytes))
}

impl Manifest {
    pub fn versions() -> Versions {
        Versions {
            roughflow: roughflow::VERSION.into(),
            cli: env!("CARGO_PKG_VERSION").into(),
            field_format: roughflow::io::FIELD_VERSION,
        }
    }

    pub fn write(&self, dir: &Path) -> CliResult<()> {
        let s = serde_json::to_string_pretty(self).map_err(CliError::runtime)?;
        std::fs::write(dir.join("manifest.json"), s + "\n").map_err(CliError::runtime)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_depends_on_content_only() {
        let a = serde_json::json!({"x": 1, "y": [1.5, 2]});
        let b: serde_json::Value = serde_json::from_str("{ \"x\" : 1, \"y\" : [1.5, 2] }").unwrap();
        assert_eq!(config_hash(&a), config_hash(&b));
        assert_ne!(config_hash(&a), config_hash(&serde_json::json!({"x": 2, "y": [1.5, 2]})));
        assert_eq!(config_hash(&a).len(), 64);
    }
}
