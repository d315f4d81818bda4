//! Run configuration, number formatting and atomic persistence.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Round-trip exact decimal rendering (17 significant digits).
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `contents` to a sibling temp file and renames it over `path`.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let name = path
        .file_name()
        .ok_or_else(|| Error::Io(format!("{} has no file name", path.display())))?
        .to_string_lossy()
        .into_owned();
    let tmp = path.with_file_name(format!(".{name}.tmp{}", std::process::id()));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })?;
    Ok(())
}

/// Flat `key = value` configuration. Later sources override earlier ones.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    entries: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn new() -> Self {
        RunConfig::default()
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value, got '{raw}'", no + 1)))?;
            let k = k.trim();
            if k.is_empty() {
                return Err(Error::Config(format!("line {}: empty key", no + 1)));
            }
            cfg.entries.insert(k.to_string(), v.trim().to_string());
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        RunConfig::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn merge(&mut self, other: &RunConfig) {
        for (k, v) in &other.entries {
            self.entries.insert(k.clone(), v.clone());
        }
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.entries
    }

    /// Parses `key` with `FromStr`, falling back to `default` when absent.
    pub fn get<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.entries.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| Error::Config(format!("cannot parse {key} = '{v}'"))),
        }
    }

    /// A strictly positive tolerance.
    pub fn tolerance(&self, key: &str, default: f64) -> Result<f64> {
        let v: f64 = self.get(key, default)?;
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Config(format!("{key} must be a positive number, got {v}")));
        }
        Ok(v)
    }

    /// An angle strictly inside `(0, π/2)`.
    pub fn angle(&self, key: &str, default: f64) -> Result<f64> {
        let v: f64 = self.get(key, default)?;
        if !(v > 0.0 && v < std::f64::consts::FRAC_PI_2) {
            return Err(Error::Config(format!("{key} must lie in (0, pi/2), got {v}")));
        }
        Ok(v)
    }

    /// Inclusive integer range written `a..b`, `a-b` or a single `a`.
    pub fn range(&self, key: &str, default: (u32, u32)) -> Result<(u32, u32)> {
        let Some(v) = self.entries.get(key) else {
            return Ok(default);
        };
        let bad = || Error::Config(format!("cannot parse range {key} = '{v}'"));
        let (a, b) = if let Some((a, b)) = v.split_once("..") {
            (a, b.trim_start_matches('='))
        } else if let Some((a, b)) = v.split_once('-') {
            (a, b)
        } else {
            (v.as_str(), v.as_str())
        };
        let a: u32 = a.trim().parse().map_err(|_| bad())?;
        let b: u32 = b.trim().parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        Ok((a, b))
    }
}

/// Manifest written next to every command's payload files.
///
/// Only this manifest carries the timestamp, so payload files stay
/// byte-identical across reruns of the same configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultBundle {
    pub command: String,
    pub version: String,
    pub timestamp_unix: u64,
    pub config: BTreeMap<String, String>,
    pub files: Vec<String>,
    pub status: String,
    pub messages: Vec<String>,
}

impl ResultBundle {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        let timestamp_unix = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        ResultBundle {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp_unix,
            config: config.entries.clone(),
            files: vec![],
            status: "ok".into(),
            messages: vec![],
        }
    }

    /// Writes one payload file under `dir` and records it.
    pub fn write(&mut self, dir: &Path, name: &str, contents: &[u8]) -> Result<PathBuf> {
        let path = dir.join(name);
        write_atomic(&path, contents)?;
        self.files.push(name.to_string());
        Ok(path)
    }

    pub fn finish(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(format!("{}.bundle.json", self.command));
        write_atomic(&path, serde_json::to_string_pretty(self)?.as_bytes())?;
        Ok(path)
    }
}
