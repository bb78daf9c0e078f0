//! Persistence: atomic JSON records and a single JSON-lines appender.
//!
//! Every file is written to a temporary sibling and renamed into place, so
//! a reader never sees a partial file.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::suites::Verdict;
use crate::HarnessError;

pub const VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

/// Everything needed to re-run an experiment and recompute its bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub version: String,
    pub config: ExperimentConfig,
    pub complete: bool,
    /// Experiment-specific summary (coverage report, diagnostics, tables).
    pub summary: serde_json::Value,
    /// File holding the per-trial JSON lines, relative to the record.
    pub trials_file: Option<String>,
    pub verdicts: Vec<Verdict>,
}

impl ExperimentRecord {
    pub fn passed(&self) -> bool {
        self.complete && self.verdicts.iter().all(|v| v.pass)
    }
}

fn temp_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".tmp");
    path.with_file_name(name)
}

/// Writes `bytes` to `path` through a temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), HarnessError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let tmp = temp_path(path);
    {
        let mut f = File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), HarnessError> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

/// Sole writer of a JSON-lines file. Lines go to a temporary file that is
/// renamed over the target by [`JsonlAppender::finish`].
pub struct JsonlAppender {
    path: PathBuf,
    tmp: PathBuf,
    out: BufWriter<File>,
    lines: usize,
}

impl JsonlAppender {
    pub fn create(path: &Path) -> Result<Self, HarnessError> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        let tmp = temp_path(path);
        let out = BufWriter::new(File::create(&tmp)?);
        Ok(JsonlAppender { path: path.to_path_buf(), tmp, out, lines: 0 })
    }

    pub fn push<T: Serialize>(&mut self, item: &T) -> Result<(), HarnessError> {
        serde_json::to_writer(&mut self.out, item)?;
        self.out.write_all(b"\n")?;
        self.lines += 1;
        Ok(())
    }

    pub fn finish(self) -> Result<usize, HarnessError> {
        let file = self.out.into_inner().map_err(|e| e.into_error())?;
        file.sync_all()?;
        fs::rename(&self.tmp, &self.path)?;
        Ok(self.lines)
    }
}

/// Reads every `*.record.json` in `dir`, sorted by file name.
pub fn load_records(dir: &Path) -> Result<Vec<(String, ExperimentRecord)>, HarnessError> {
    let mut names: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.to_string_lossy().ends_with(".record.json"))
        .collect();
    names.sort();
    names
        .into_iter()
        .map(|p| {
            let text = fs::read_to_string(&p)?;
            let rec: ExperimentRecord = serde_json::from_str(&text)?;
            let stem = p.file_name().unwrap().to_string_lossy().trim_end_matches(".record.json").to_string();
            Ok((stem, rec))
        })
        .collect()
}
