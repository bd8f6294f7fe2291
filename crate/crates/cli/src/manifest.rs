use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::Loaded;
use crate::error::CliResult;

#[derive(Serialize)]
struct FileEntry {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    subcommand: &'a str,
    config_sha256: &'a str,
    config: &'a str,
    #[serde(skip_serializing_if = "serde_json::Value::is_null")]
    details: serde_json::Value,
    files: Vec<FileEntry>,
}

fn relative(root: &Path, path: &Path) -> String {
    path.strip_prefix(root)
        .unwrap_or(path)
        .components()
        .map(|c| c.as_os_str().to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join("/")
}

/// Writes `manifest.json` into `root`: the effective configuration, its
/// hash, and a checksum for every file the run produced.
pub fn write<T>(
    root: &Path,
    subcommand: &str,
    loaded: &Loaded<T>,
    details: serde_json::Value,
    mut files: Vec<PathBuf>,
) -> CliResult<()> {
    files.sort();
    let files = files
        .iter()
        .map(|p| {
            Ok(FileEntry {
                path: relative(root, p),
                sha256: hex::encode(Sha256::digest(fs::read(p)?)),
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        subcommand,
        config_sha256: &loaded.sha256,
        config: &loaded.canonical,
        details,
        files,
    };
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    fs::write(root.join("manifest.json"), text)?;
    Ok(())
}
