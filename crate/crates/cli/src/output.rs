// SPDX-License-Identifier: MIT OR Apache-2.0

//! Run directories, provenance headers and file writing.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// Crate version plus `git describe` of the build tree when available.
pub const VERSION: &str = env!("UAND_BUILD_VERSION");

pub const OUT_DIR_ENV: &str = "UAND_OUT_DIR";
pub const THREADS_ENV: &str = "UAND_THREADS";

/// `UAND_OUT_DIR`, else the configured directory, else `./uand-out`.
pub fn output_root(configured: Option<&Path>) -> PathBuf {
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir),
        _ => configured.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("uand-out")),
    }
}

/// First 16 hex digits of the SHA-256 of the compact JSON encoding.
/// Object keys are sorted, so equal configs hash equally.
pub fn config_hash(config: &Value) -> String {
    let digest = Sha256::digest(config.to_string().as_bytes());
    let mut hex = String::with_capacity(16);
    for byte in &digest[..8] {
        let _ = write!(hex, "{byte:02x}");
    }
    hex
}

/// Resolved config and build version, embedded in every artifact.
#[derive(Debug, Clone)]
pub struct Provenance {
    pub config: Value,
    pub hash: String,
}

impl Provenance {
    pub fn new(config: Value) -> Self {
        let hash = config_hash(&config);
        Self { config, hash }
    }

    pub fn header(&self) -> String {
        json!({ "version": VERSION, "config": self.config }).to_string()
    }

    pub fn csv(&self, header_row: &str, body: &str) -> String {
        format!("# {}\n{header_row}\n{body}", self.header())
    }
}

pub fn create_dir(path: &Path) -> CliResult<()> {
    fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}

pub fn write(path: &Path, contents: impl AsRef<[u8]>) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Config(e.to_string()))?;
    write(path, text + "\n")
}

/// Strips everything up to and including the first line if it is a
/// provenance comment.
pub fn strip_comment(csv: &str) -> &str {
    match csv.strip_prefix("# ") {
        Some(rest) => rest.split_once('\n').map_or("", |(_, body)| body),
        None => csv,
    }
}

pub fn read_config<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}
