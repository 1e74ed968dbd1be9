//! Run directories: CSV tables, JSON artifacts and `manifest.json`.

use std::fs;
use std::io;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::experiments::{Check, Outcome, Table};

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, Serialize)]
pub struct FileEntry {
    pub name: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckEntry {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl From<&Check> for CheckEntry {
    fn from(c: &Check) -> Self {
        CheckEntry { name: c.name.clone(), passed: c.passed, detail: c.detail.clone() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub command: String,
    pub library_version: &'static str,
    pub config: Value,
    pub started_unix: u64,
    pub wall_time_s: f64,
    pub status: String,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub numeric_failure: Option<String>,
    pub checks: Vec<CheckEntry>,
    pub summary: Value,
    pub files: Vec<FileEntry>,
}

pub fn table_bytes(t: &Table) -> io::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&t.header)?;
    for row in &t.rows {
        w.write_record(row)?;
    }
    w.into_inner().map_err(|e| io::Error::other(e.to_string()))
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> io::Result<FileEntry> {
    fs::write(dir.join(name), bytes)?;
    Ok(FileEntry { name: name.to_string(), sha256: format!("{:x}", Sha256::digest(bytes)), bytes: bytes.len() })
}

/// Writes every artifact of `outcome` into `dir`, returning the file list
/// for the manifest.
pub fn write_artifacts(dir: &Path, outcome: &Outcome) -> io::Result<Vec<FileEntry>> {
    fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    for t in &outcome.tables {
        files.push(write_file(dir, &t.name, &table_bytes(t)?)?);
    }
    for (name, v) in &outcome.json {
        let mut bytes = serde_json::to_vec_pretty(v).map_err(io::Error::other)?;
        bytes.push(b'\n');
        files.push(write_file(dir, name, &bytes)?);
    }
    Ok(files)
}

pub fn write_manifest(dir: &Path, m: &Manifest) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let mut bytes = serde_json::to_vec_pretty(m).map_err(io::Error::other)?;
    bytes.push(b'\n');
    fs::write(dir.join(MANIFEST), bytes)
}
