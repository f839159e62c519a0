//! File handling: dataset loading, atomic writes and digests.

use std::fs::{self, File};
use std::io::{BufReader, Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use flate2::read::GzDecoder;
use idsfeat_core::dataset::{parse_kdd, write_kdd, Dataset, Schema};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::UsageError;

/// Fails with a usage error when any input is missing, before anything is
/// written.
pub fn require_inputs<'a>(paths: impl IntoIterator<Item = &'a Path>) -> Result<()> {
    for p in paths {
        if !p.is_file() {
            return Err(UsageError(format!("input file not found: {}", p.display())).into());
        }
    }
    Ok(())
}

/// Reads KDD CSV, transparently gunzipping `.gz` files.
pub fn load_kdd(path: &Path) -> Result<Dataset> {
    require_inputs([path])?;
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let reader: Box<dyn Read> = if path.extension().is_some_and(|e| e == "gz") {
        Box::new(GzDecoder::new(file))
    } else {
        Box::new(file)
    };
    let d = parse_kdd(BufReader::with_capacity(1 << 20, reader), &Schema::kdd())
        .with_context(|| format!("reading {}", path.display()))?;
    Ok(d.with_source(path.display().to_string()))
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut h = Sha256::new();
    std::io::copy(&mut file, &mut h)?;
    Ok(hex::encode(h.finalize()))
}

pub fn sha256_bytes(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Artifact {
    pub path: String,
    pub sha256: String,
}

/// An output directory. Every file goes through a temporary sibling and a
/// rename, so readers never see a partial file.
pub struct OutDir {
    dir: PathBuf,
    written: Vec<Artifact>,
}

impl OutDir {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Writes a reproducible artifact and records its digest.
    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        atomic_write(&self.path(name), bytes)?;
        self.written.retain(|a| a.path != name);
        self.written.push(Artifact {
            path: name.to_string(),
            sha256: sha256_bytes(bytes),
        });
        Ok(())
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    pub fn dataset(&mut self, name: &str, d: &Dataset) -> Result<()> {
        let mut buf = Vec::new();
        write_kdd(d, &mut buf)?;
        self.write(name, &buf)
    }

    /// Writes a file kept out of the artifact list: wall-clock timings, which
    /// are not reproducible, and the manifest itself.
    pub fn sidecar<T: Serialize + ?Sized>(&self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        atomic_write(&self.path(name), text.as_bytes())
    }

    pub fn artifacts(&self) -> &[Artifact] {
        &self.written
    }
}

pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path
        .file_name()
        .with_context(|| format!("not a file path: {}", path.display()))?;
    let tmp = path.with_file_name(format!(".{}.tmp", name.to_string_lossy()));
    let mut f = File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
    f.write_all(bytes)?;
    f.sync_all()?;
    drop(f);
    fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}
