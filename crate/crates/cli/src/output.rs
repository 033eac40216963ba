//! Artifacts are collected in memory and written at the end of a command,
//! each through a temporary file and a rename.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Value};

pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    /// Pretty JSON with a `metadata` field holding the only nondeterministic bytes.
    pub fn json(name: &str, command: &str, body: &impl Serialize) -> Result<Self> {
        let mut value = serde_json::to_value(body)?;
        if let Value::Object(map) = &mut value {
            map.insert("metadata".into(), metadata(command));
        }
        let mut bytes = serde_json::to_vec_pretty(&value)?;
        bytes.push(b'\n');
        Ok(Artifact {
            name: name.into(),
            bytes,
        })
    }

    pub fn csv(name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Self> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for row in rows {
            w.write_record(&row)?;
        }
        Ok(Artifact {
            name: name.into(),
            bytes: w.into_inner().context("flushing CSV")?,
        })
    }
}

fn metadata(command: &str) -> Value {
    let secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    json!({
        "tool": "greenchain",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "generated_unix_secs": secs,
    })
}

/// Format a number for CSV; `None` and non-finite values become empty cells.
pub fn cell(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => format!("{x}"),
        _ => String::new(),
    }
}

pub fn write_all(dir: &Path, artifacts: &[Artifact]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    artifacts
        .iter()
        .map(|a| write_atomic(&dir.join(&a.name), &a.bytes))
        .collect()
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<PathBuf> {
    let tmp = path.with_file_name(format!(
        ".{}.tmp",
        path.file_name().and_then(|n| n.to_str()).unwrap_or("artifact")
    ));
    let mut f = fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
    f.write_all(bytes)?;
    f.sync_all()?;
    fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(path.to_path_buf())
}
