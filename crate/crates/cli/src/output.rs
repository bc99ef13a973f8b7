//! Output staging and run metadata.

use std::fmt::Display;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use tempfile::TempDir;

use crate::error::{input, Result};

/// Files are written to a hidden directory inside the output directory and
/// moved into place only by [`Staging::commit`]; dropping it uncommitted
/// removes everything written so far.
pub struct Staging {
    out: PathBuf,
    dir: TempDir,
    names: Vec<String>,
}

impl Staging {
    pub fn new(out: &Path) -> Result<Self> {
        fs::create_dir_all(out)
            .map_err(|e| input(format!("cannot create output directory {}: {e}", out.display())))?;
        let dir = tempfile::Builder::new()
            .prefix(".staging-")
            .tempdir_in(out)
            .map_err(|e| input(format!("output directory {} is not writable: {e}", out.display())))?;
        Ok(Staging {
            out: out.to_owned(),
            dir,
            names: Vec::new(),
        })
    }

    /// Staged location for the output file `name`.
    pub fn file(&mut self, name: &str) -> PathBuf {
        if !self.names.iter().any(|n| n == name) {
            self.names.push(name.to_owned());
        }
        self.dir.path().join(name)
    }

    pub fn commit(self) -> Result<Vec<PathBuf>> {
        let mut placed = Vec::with_capacity(self.names.len());
        for name in &self.names {
            let target = self.out.join(name);
            fs::rename(self.dir.path().join(name), &target)
                .map_err(|e| input(format!("cannot move {name} into {}: {e}", self.out.display())))?;
            placed.push(target);
        }
        Ok(placed)
    }
}

/// Flat `key=value` lines, in insertion order.
#[derive(Debug, Default)]
pub struct Meta {
    entries: Vec<(String, String)>,
}

impl Meta {
    pub fn new(command: &str) -> Self {
        let mut meta = Meta::default();
        meta.set("command", command);
        meta.set("version", env!("CARGO_PKG_VERSION"));
        meta
    }

    pub fn set(&mut self, key: impl Into<String>, value: impl Display) {
        let value = value.to_string().replace(['\n', '\r'], " ");
        self.entries.push((key.into(), value));
    }

    pub fn set_f64(&mut self, key: impl Into<String>, value: f64) {
        self.set(key, mweica::harness::format_value(value));
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text: String = self
            .entries
            .iter()
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect();
        fs::write(path, text).map_err(|e| input(format!("cannot write {}: {e}", path.display())))
    }
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut file = fs::File::open(path)
        .map_err(|e| input(format!("cannot read {}: {e}", path.display())))?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 1 << 16];
    loop {
        let n = file
            .read(&mut buf)
            .map_err(|e| input(format!("cannot read {}: {e}", path.display())))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}
