use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::output::sha256_file;

/// Provenance of one run: enough to repeat it and check the outputs byte for byte.
#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Arguments after the program name, without `--manifest`.
    pub argv: Vec<String>,
    pub parameters: serde_json::Value,
    pub seed: Option<u64>,
    pub version: String,
    pub outputs: Vec<PathBuf>,
    /// Lowercase hex SHA-256 per output path.
    pub checksums: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn checksum_outputs(&mut self) -> std::io::Result<()> {
        for p in &self.outputs {
            self.checksums.insert(p.display().to_string(), sha256_file(p)?);
        }
        Ok(())
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        let mut s = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
        s.push('\n');
        fs::write(path, s)
    }

    pub fn read(path: &Path) -> std::io::Result<Self> {
        serde_json::from_str(&fs::read_to_string(path)?).map_err(std::io::Error::other)
    }
}

/// Drops `--manifest FILE` / `--manifest=FILE` from an argument list.
pub fn strip_manifest_flag(args: &[String]) -> Vec<String> {
    let mut out = Vec::with_capacity(args.len());
    let mut skip = false;
    for a in args {
        if skip {
            skip = false;
            continue;
        }
        if a == "--manifest" {
            skip = true;
            continue;
        }
        if a.starts_with("--manifest=") {
            continue;
        }
        out.push(a.clone());
    }
    out
}
