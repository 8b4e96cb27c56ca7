//! Locked output directory, headed data files and the run manifest.

use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
const LOCK: &str = ".lock";

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Locale-independent, 12 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.11e}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Converged,
    NotConverged,
}

impl Status {
    pub fn from_flag(ok: bool) -> Self {
        if ok {
            Status::Converged
        } else {
            Status::NotConverged
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::NotConverged => "not_converged",
        }
    }
}

pub struct RunDir {
    root: PathBuf,
    command: String,
    config_text: String,
    config_hash: String,
    files: Vec<(String, String, usize)>,
    statuses: Vec<(String, Status)>,
    timings: Vec<(String, Duration)>,
    locked: bool,
}

impl RunDir {
    /// Creates the directory and takes its lock; fails if another run holds it.
    /// Headers carry the hash of `settings`, the manifest echoes `config_text`.
    pub fn open(root: &Path, command: &str, config_text: &str, settings: &str) -> io::Result<Self> {
        fs::create_dir_all(root)?;
        OpenOptions::new()
            .write(true)
            .create_new(true)
            .open(root.join(LOCK))
            .map_err(|e| {
                if e.kind() == io::ErrorKind::AlreadyExists {
                    io::Error::new(e.kind(), format!("{} is locked by another run", root.display()))
                } else {
                    e
                }
            })?;
        Ok(Self {
            root: root.to_path_buf(),
            command: command.to_string(),
            config_text: config_text.to_string(),
            config_hash: sha256_hex(settings.as_bytes()),
            files: Vec::new(),
            statuses: Vec::new(),
            timings: Vec::new(),
            locked: true,
        })
    }

    pub fn path(&self) -> &Path {
        &self.root
    }

    fn header(&self) -> String {
        format!(
            "# loglap {VERSION}\n# command {}\n# config sha256 {}\n",
            self.command, self.config_hash
        )
    }

    /// Writes `columns` and `rows` below the comment header.
    pub fn write_table(&mut self, name: &str, columns: &str, rows: &[String]) -> io::Result<()> {
        let mut text = self.header();
        text.push_str(columns);
        text.push('\n');
        for r in rows {
            text.push_str(r);
            text.push('\n');
        }
        self.write_raw(name, text.as_bytes())
    }

    /// Writes a headed free-form text body.
    pub fn write_text(&mut self, name: &str, body: &str) -> io::Result<()> {
        let text = format!("{}{body}", self.header());
        self.write_raw(name, text.as_bytes())
    }

    pub fn write_raw(&mut self, name: &str, bytes: &[u8]) -> io::Result<()> {
        atomic_write(&self.root.join(name), bytes)?;
        self.files.push((name.to_string(), sha256_hex(bytes), bytes.len()));
        Ok(())
    }

    pub fn status(&mut self, task: &str, status: Status) {
        self.statuses.push((task.to_string(), status));
    }

    pub fn timing(&mut self, task: &str, elapsed: Duration) {
        self.timings.push((task.to_string(), elapsed));
    }

    pub fn all_converged(&self) -> bool {
        self.statuses.iter().all(|(_, s)| *s == Status::Converged)
    }

    /// Writes `status.json` and `manifest.json` and releases the lock.
    pub fn finish(mut self) -> io::Result<bool> {
        let ok = self.all_converged();
        let mut statuses = Map::new();
        for (t, s) in &self.statuses {
            statuses.insert(t.clone(), Value::from(s.as_str()));
        }
        let status = json!({
            "command": self.command,
            "status": if ok { "converged" } else { "not_converged" },
            "tasks": statuses,
        });
        self.write_raw("status.json", pretty(&status).as_bytes())?;

        let files: Vec<Value> = self
            .files
            .iter()
            .map(|(n, h, b)| json!({ "name": n, "sha256": h, "bytes": b }))
            .collect();
        let mut timings = Map::new();
        for (t, d) in &self.timings {
            timings.insert(t.clone(), Value::from(d.as_secs_f64()));
        }
        let manifest = json!({
            "version": VERSION,
            "command": self.command,
            "config": self.config_text,
            "config_sha256": self.config_hash,
            "files": files,
            "statuses": statuses,
            "timings_seconds": timings,
        });
        atomic_write(&self.root.join("manifest.json"), pretty(&manifest).as_bytes())?;
        self.release();
        Ok(ok)
    }

    /// Records a failure in `status.json` and releases the lock.
    pub fn fail(mut self, message: &str) -> io::Result<()> {
        let status = json!({
            "command": self.command,
            "status": "error",
            "message": message,
        });
        atomic_write(&self.root.join("status.json"), pretty(&status).as_bytes())?;
        self.release();
        Ok(())
    }

    fn release(&mut self) {
        if self.locked {
            let _ = fs::remove_file(self.root.join(LOCK));
            self.locked = false;
        }
    }
}

impl Drop for RunDir {
    fn drop(&mut self) {
        self.release();
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

fn atomic_write(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let tmp = path.with_extension("partial");
    {
        let mut f = File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(tmp, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lock_is_exclusive_and_released() {
        let dir = tempfile::tempdir().unwrap();
        let run = RunDir::open(dir.path(), "eig", "mesh.n = 8\n", "").unwrap();
        assert!(RunDir::open(dir.path(), "eig", "", "").is_err());
        drop(run);
        let mut run = RunDir::open(dir.path(), "eig", "", "").unwrap();
        run.write_table("t.csv", "a,b", &["1,2".into()]).unwrap();
        run.status("t", Status::Converged);
        assert!(run.finish().unwrap());
        assert!(!dir.path().join(LOCK).exists());
        let text = fs::read_to_string(dir.path().join("t.csv")).unwrap();
        assert!(text.starts_with("# loglap "));
        let manifest: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
        assert_eq!(manifest["files"][0]["sha256"], sha256_hex(text.as_bytes()));
    }

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(num(1.0 / 3.0), "3.33333333333e-1");
        assert_eq!(num(-2.5), "-2.50000000000e0");
    }
}
