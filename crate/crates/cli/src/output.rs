//! Output directories: every file written through [`OutputDir`] is hashed into
//! `manifest.json`, next to the echoed `config.toml`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{RunConfig, SCHEMA_VERSION};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Clone, Debug, Serialize)]
pub struct InputRecord {
    pub name: String,
    pub sha256: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub schema: u32,
    pub command: String,
    pub seed: u64,
    pub config_sha256: String,
    /// Input files by name and content hash; their directory is not recorded.
    pub inputs: Vec<InputRecord>,
    pub outputs: BTreeMap<String, String>,
}

pub struct OutputDir {
    root: PathBuf,
    outputs: BTreeMap<String, String>,
    inputs: Vec<InputRecord>,
    /// Prepended to `config.toml` and `manifest.json`, for single-file outputs
    /// that share a directory with other files.
    prefix: String,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<OutputDir> {
        fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
        Ok(OutputDir { root: root.to_path_buf(), outputs: BTreeMap::new(), inputs: Vec::new(), prefix: String::new() })
    }

    pub fn with_prefix(mut self, prefix: &str) -> OutputDir {
        self.prefix = format!("{prefix}.");
        self
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Writes `name` (a relative path) and records its hash.
    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.root.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.outputs.insert(name.to_string(), sha256_hex(bytes));
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    pub fn record_input(&mut self, path: &Path, bytes: &[u8]) {
        let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        self.inputs.push(InputRecord { name, sha256: sha256_hex(bytes) });
    }

    /// Writes `config.toml` and `manifest.json`.
    pub fn finish(mut self, command: &str, config: &RunConfig) -> Result<Manifest> {
        let echo = config.echo();
        self.write(&format!("{}config.toml", self.prefix), echo.as_bytes())?;
        let manifest = Manifest {
            tool: "onetwo",
            version: TOOL_VERSION,
            schema: SCHEMA_VERSION,
            command: command.to_string(),
            seed: config.seed,
            config_sha256: sha256_hex(echo.as_bytes()),
            inputs: std::mem::take(&mut self.inputs),
            outputs: self.outputs.clone(),
        };
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        fs::write(self.root.join(format!("{}manifest.json", self.prefix)), text)?;
        Ok(manifest)
    }
}
