//! `run_record.json`: config echo, version, timestamps, reports and a
//! checksum manifest of every emitted file.

use std::fs;
use std::path::{Path, PathBuf};

use quench_core::bounds::BoundsReport;
use quench_core::dynamics::QuenchReport;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::failure::Failure;

pub const RECORD_FILE: &str = "run_record.json";

#[derive(Debug, Serialize)]
pub struct ManifestEntry {
    /// Relative to the output directory, `/`-separated.
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunRecord {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub started: String,
    pub finished: String,
    pub config: RunConfig,
    pub quench: Option<QuenchReport>,
    pub bounds: Option<BoundsReport>,
    pub manifest: Vec<ManifestEntry>,
}

pub fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn manifest(out: &Path, files: &[PathBuf]) -> Result<Vec<ManifestEntry>, Failure> {
    let mut entries = Vec::with_capacity(files.len());
    for f in files {
        let bytes = fs::read(f)?;
        let rel = f.strip_prefix(out).unwrap_or(f);
        entries.push(ManifestEntry {
            path: rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/"),
            bytes: bytes.len() as u64,
            sha256: sha256_hex(&bytes),
        });
    }
    entries.sort_by(|a, b| a.path.cmp(&b.path));
    Ok(entries)
}

impl RunRecord {
    pub fn write(&self, out: &Path) -> Result<(), Failure> {
        fs::write(out.join(RECORD_FILE), serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_of_empty_input() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
