//! JSON / JSON-lines file helpers and the on-disk profile store.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use polaris_core::policy::Scenario;
use polaris_core::profiling::ProfileStore;
use polaris_core::simulator::SpectrumEvent;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum FileError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: {message}")]
    Format { path: PathBuf, line: usize, message: String },
    #[error("{path}: {message}")]
    Invalid { path: PathBuf, message: String },
}

impl FileError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io { path: path.to_path_buf(), source }
    }

    pub fn is_io(&self) -> bool {
        matches!(self, Self::Io { .. })
    }
}

pub fn create(path: &Path) -> Result<BufWriter<File>, FileError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| FileError::io(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| FileError::io(path, e))
}

pub fn open(path: &Path) -> Result<BufReader<File>, FileError> {
    File::open(path).map(BufReader::new).map_err(|e| FileError::io(path, e))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), FileError> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| FileError::io(path, e.into()))?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| FileError::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, FileError> {
    let text = fs::read_to_string(path).map_err(|e| FileError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| FileError::Format {
        path: path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })
}

pub fn write_jsonl<'a, T: Serialize + 'a, I: IntoIterator<Item = &'a T>>(path: &Path, items: I) -> Result<(), FileError> {
    let mut w = create(path)?;
    for item in items {
        serde_json::to_writer(&mut w, item).map_err(|e| FileError::io(path, e.into()))?;
        writeln!(w).map_err(|e| FileError::io(path, e))?;
    }
    w.flush().map_err(|e| FileError::io(path, e))
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, FileError> {
    let mut out = Vec::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(|e| FileError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| FileError::Format {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}

/// Reads a profile store and checks every profile against its samples.
pub fn load_store(path: &Path) -> Result<ProfileStore, FileError> {
    let store: ProfileStore = read_json(path)?;
    store.verify().map_err(|e| FileError::Invalid {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    Ok(store)
}

/// Spectrum event as stored on disk: the scenario is referenced by name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventLine {
    pub time_ms: f64,
    pub carrier_id: String,
    pub scenario: String,
}

pub fn read_events(path: &Path, resolve: impl Fn(&str) -> Option<Scenario>) -> Result<Vec<SpectrumEvent>, FileError> {
    let lines: Vec<EventLine> = read_jsonl(path)?;
    lines
        .into_iter()
        .enumerate()
        .map(|(i, l)| {
            let scenario = resolve(&l.scenario).ok_or_else(|| FileError::Format {
                path: path.to_path_buf(),
                line: i + 1,
                message: format!("unknown scenario {:?}", l.scenario),
            })?;
            Ok(SpectrumEvent {
                time_ms: l.time_ms,
                carrier_id: l.carrier_id,
                scenario,
            })
        })
        .collect()
}
