//! Append-only assessment history, one JSON record per line.
//!
//! Single writer; concurrent readers are fine. No cross-process locking.
//! A torn final line (crash mid-append) is skipped on read, and the next
//! append starts on a fresh line.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Read, Seek, SeekFrom, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::model::CompositeAssessment;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("IO_FAILURE: {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("SERIALIZATION_FAILURE: {0}")]
    Serialization(#[from] serde_json::Error),
}

impl StoreError {
    pub fn code(&self) -> &'static str {
        match self {
            StoreError::Io { .. } => "IO_FAILURE",
            StoreError::Serialization(_) => "SERIALIZATION_FAILURE",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryRecord {
    pub schema_version: u32,
    pub host_label: String,
    pub assessment: CompositeAssessment,
}

impl HistoryRecord {
    pub fn new(host_label: impl Into<String>, assessment: CompositeAssessment) -> Self {
        HistoryRecord {
            schema_version: SCHEMA_VERSION,
            host_label: host_label.into(),
            assessment,
        }
    }
}

/// Records read back from a history file plus the number of lines skipped.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct History {
    pub records: Vec<HistoryRecord>,
    pub skipped: usize,
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Appends one record as a single line and flushes it to disk.
pub fn append_record(path: &Path, record: &HistoryRecord) -> Result<(), StoreError> {
    let mut line = serde_json::to_string(record)?;
    line.push('\n');

    let mut file = OpenOptions::new()
        .create(true)
        .read(true)
        .append(true)
        .open(path)
        .map_err(io(path))?;
    if ends_mid_line(&mut file).map_err(io(path))? {
        line.insert(0, '\n');
    }
    // One write call per record keeps a concurrent reader from seeing
    // anything but whole lines or a torn tail.
    file.write_all(line.as_bytes()).map_err(io(path))?;
    file.sync_data().map_err(io(path))?;
    Ok(())
}

fn ends_mid_line(file: &mut File) -> std::io::Result<bool> {
    let len = file.metadata()?.len();
    if len == 0 {
        return Ok(false);
    }
    file.seek(SeekFrom::Start(len - 1))?;
    let mut last = [0u8; 1];
    file.read_exact(&mut last)?;
    Ok(last[0] != b'\n')
}

/// Reads every record in file order, optionally keeping only one host.
///
/// Blank lines are ignored. Lines that do not parse, or were written by a
/// newer schema, are skipped and counted.
pub fn load_history(path: &Path, host_filter: Option<&str>) -> Result<History, StoreError> {
    let file = File::open(path).map_err(io(path))?;
    let mut history = History::default();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: HistoryRecord = match serde_json::from_str(&line) {
            Ok(r) => r,
            Err(e) => {
                log::warn!(
                    "{}:{}: skipping unreadable record: {e}",
                    path.display(),
                    idx + 1
                );
                history.skipped += 1;
                continue;
            }
        };
        if record.schema_version > SCHEMA_VERSION {
            log::warn!(
                "{}:{}: skipping record with schema_version {}",
                path.display(),
                idx + 1,
                record.schema_version
            );
            history.skipped += 1;
            continue;
        }
        if host_filter.is_some_and(|h| h != record.host_label) {
            continue;
        }
        history.records.push(record);
    }
    Ok(history)
}
