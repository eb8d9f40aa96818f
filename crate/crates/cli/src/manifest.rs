use std::path::Path;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Serialize)]
pub struct InputFile {
    pub path: String,
    pub sha256: String,
}

/// Provenance written into every output file. Wall time goes to standard
/// output only, so reruns stay byte-identical.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub inputs: Vec<InputFile>,
    pub config: Value,
    pub tool_version: String,
}

impl RunManifest {
    pub fn new(subcommand: &str, config: Value) -> Self {
        RunManifest {
            subcommand: subcommand.to_string(),
            inputs: Vec::new(),
            config,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn add_input(&mut self, path: &Path, bytes: &[u8]) {
        self.inputs.push(InputFile {
            path: path.display().to_string(),
            sha256: hex::encode(Sha256::digest(bytes)),
        });
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("manifest serializes")
    }

    /// `# manifest {...}` header line for CSV outputs.
    pub fn csv_header(&self) -> String {
        format!("# manifest {}\n", serde_json::to_string(self).expect("manifest serializes"))
    }
}
