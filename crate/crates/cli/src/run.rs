//! Writing a figure's files and its manifest, all or nothing.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use qndsim_core::{ExperimentConfig, RunMode};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config;
use crate::error::{Category, CliError};
use crate::figures::{render, Artifact, Figure};

pub const MANIFEST: &str = "manifest.json";
pub const RESOLVED_CONFIG: &str = "config.resolved";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub figure: String,
    pub mode: String,
    pub seed: u64,
    pub trials: u64,
    pub timestamp: String,
    /// Every configuration key with its resolved value.
    pub config: BTreeMap<String, String>,
    pub files: Vec<FileEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn mode_name(mode: RunMode) -> &'static str {
    match mode {
        RunMode::Exact => "exact",
        RunMode::MonteCarlo => "mc",
    }
}

fn resolved_map(text: &str) -> BTreeMap<String, String> {
    text.lines()
        .filter_map(|l| l.split_once(" = "))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

/// Removes every file written so far (and the directory if this run created it)
/// unless disarmed.
struct Cleanup {
    dir: PathBuf,
    created_dir: bool,
    written: Vec<PathBuf>,
    armed: bool,
}

impl Drop for Cleanup {
    fn drop(&mut self) {
        if !self.armed {
            return;
        }
        for p in &self.written {
            let _ = fs::remove_file(p);
        }
        if self.created_dir {
            let _ = fs::remove_dir(&self.dir);
        }
    }
}

/// Render `figure` and write its CSVs, the resolved config and the manifest into `out`.
pub fn run_figure(figure: Figure, cfg: &ExperimentConfig, out: &Path) -> Result<Manifest, CliError> {
    let mut artifacts = render(figure, cfg)?;
    let resolved = config::serialize(cfg);
    artifacts.push(Artifact {
        name: RESOLVED_CONFIG.into(),
        contents: resolved.clone(),
    });

    let created_dir = !out.exists();
    fs::create_dir_all(out).map_err(|e| CliError::io(out.display(), e))?;
    let mut guard = Cleanup {
        dir: out.to_path_buf(),
        created_dir,
        written: Vec::new(),
        armed: true,
    };

    let mut files = Vec::new();
    for a in &artifacts {
        let path = out.join(&a.name);
        guard.written.push(path.clone());
        fs::write(&path, &a.contents).map_err(|e| CliError::io(path.display(), e))?;
        files.push(FileEntry {
            name: a.name.clone(),
            sha256: sha256_hex(a.contents.as_bytes()),
            bytes: a.contents.len() as u64,
        });
    }

    let manifest = Manifest {
        tool: "qndsim".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        figure: figure.name().into(),
        mode: mode_name(cfg.mode).into(),
        seed: cfg.seed,
        trials: cfg.trials,
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        config: resolved_map(&resolved),
        files,
    };
    let path = out.join(MANIFEST);
    guard.written.push(path.clone());
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::new(Category::Io, e.to_string()))?;
    fs::write(&path, json + "\n").map_err(|e| CliError::io(path.display(), e))?;

    guard.armed = false;
    Ok(manifest)
}

pub fn read_manifest(path: &Path) -> Result<Manifest, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path.display(), e))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::new(Category::Schema, format!("{}: not a run manifest: {e}", path.display())))
}
