//! Append-only record logs.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use thiserror::Error;

use crate::records::Record;

const HEADER: &str = r#"{"format":"a4f-store","version":1}"#;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("store i/o failed: {0}")]
    Io(#[from] std::io::Error),
    #[error("store is corrupt at line {line}: {reason}")]
    Corrupt { line: usize, reason: String },
}

/// A durable sequence of records. Appends are serialized by the caller.
pub trait Store: Send + Sync {
    fn load(&self) -> Result<Vec<Record>, StoreError>;
    fn append(&self, record: &Record) -> Result<(), StoreError>;
    fn health(&self) -> Result<(), StoreError>;
}

#[derive(Default)]
pub struct MemoryStore {
    records: Mutex<Vec<Record>>,
}

impl Store for MemoryStore {
    fn load(&self) -> Result<Vec<Record>, StoreError> {
        Ok(self.records.lock().expect("store lock").clone())
    }

    fn append(&self, record: &Record) -> Result<(), StoreError> {
        self.records.lock().expect("store lock").push(record.clone());
        Ok(())
    }

    fn health(&self) -> Result<(), StoreError> {
        Ok(())
    }
}

/// JSON lines behind a header line; one record per line.
pub struct FileStore {
    path: PathBuf,
    writer: Mutex<Writer>,
}

struct Writer {
    file: File,
    /// Bytes known to be in the file.
    written: u64,
}

impl FileStore {
    pub fn open(path: impl AsRef<Path>) -> Result<Self, StoreError> {
        let path = path.as_ref().to_path_buf();
        let mut file = OpenOptions::new().create(true).append(true).read(true).open(&path)?;
        let mut written = file.metadata()?.len();
        if written == 0 {
            writeln!(file, "{HEADER}")?;
            file.sync_data()?;
            written = HEADER.len() as u64 + 1;
        }
        Ok(FileStore {
            path,
            writer: Mutex::new(Writer { file, written }),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

fn check_header(line: Option<std::io::Result<String>>) -> Result<(), StoreError> {
    match line {
        Some(Ok(l)) if l == HEADER => Ok(()),
        Some(Err(e)) => Err(e.into()),
        _ => Err(StoreError::Corrupt {
            line: 1,
            reason: "missing store header".into(),
        }),
    }
}

impl Store for FileStore {
    fn load(&self) -> Result<Vec<Record>, StoreError> {
        let reader = BufReader::new(File::open(&self.path)?);
        let mut lines = reader.lines();
        check_header(lines.next())?;
        let mut out = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let record = serde_json::from_str(&line).map_err(|e| StoreError::Corrupt {
                line: i + 2,
                reason: e.to_string(),
            })?;
            out.push(record);
        }
        Ok(out)
    }

    fn append(&self, record: &Record) -> Result<(), StoreError> {
        let mut line = serde_json::to_string(record).expect("records serialize");
        line.push('\n');
        let mut w = self.writer.lock().expect("writer lock");
        w.file.write_all(line.as_bytes())?;
        w.file.flush()?;
        w.written += line.len() as u64;
        Ok(())
    }

    fn health(&self) -> Result<(), StoreError> {
        let w = self.writer.lock().expect("writer lock");
        let len = std::fs::metadata(&self.path)?.len();
        if len < w.written {
            return Err(StoreError::Corrupt {
                line: 0,
                reason: format!("file shrank from {} to {len} bytes", w.written),
            });
        }
        let reader = BufReader::new(File::open(&self.path)?);
        check_header(reader.lines().next())
    }
}
