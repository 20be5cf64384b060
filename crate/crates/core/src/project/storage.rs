//! Append-only project logs.
//!
//! Each record is framed as `<len> <crc32>\n<json>\n`, where `len` is the
//! byte length of the JSON and `crc32` its checksum in lowercase hex.

use std::fs::{self, File, OpenOptions};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use super::{Project, ProjectError, Record};

/// Framed bytes for one record.
pub fn encode_record(record: &Record) -> Vec<u8> {
    let json = serde_json::to_vec(record).expect("records serialize");
    let mut out = format!("{} {:08x}\n", json.len(), crc32fast::hash(&json)).into_bytes();
    out.extend_from_slice(&json);
    out.push(b'\n');
    out
}

#[derive(Debug)]
pub struct Decoded {
    pub records: Vec<(u64, Record)>,
    /// Length of the intact prefix; bytes beyond it belonged to a torn record.
    pub valid_len: u64,
    pub torn_tail: Option<String>,
}

pub fn decode_records(bytes: &[u8]) -> Result<Decoded, ProjectError> {
    let mut records = Vec::new();
    let mut offset = 0usize;
    let corrupt = |offset: usize, reason: String| ProjectError::CorruptLog { offset: offset as u64, reason };
    while offset < bytes.len() {
        let rest = &bytes[offset..];
        let torn = |reason: &str| Decoded {
            records: Vec::new(),
            valid_len: offset as u64,
            torn_tail: Some(format!("{reason} at byte {offset}")),
        };
        let Some(newline) = rest.iter().position(|&b| b == b'\n') else {
            return Ok(Decoded { records, ..torn("unterminated header") });
        };
        let header = std::str::from_utf8(&rest[..newline]).map_err(|_| corrupt(offset, "header is not UTF-8".into()))?;
        let (len, crc) = header
            .split_once(' ')
            .and_then(|(len, crc)| Some((len.parse::<usize>().ok()?, u32::from_str_radix(crc, 16).ok()?)))
            .ok_or_else(|| corrupt(offset, format!("malformed header {header:?}")))?;
        let body_start = newline + 1;
        let end = body_start.checked_add(len).ok_or_else(|| corrupt(offset, "length overflow".into()))?;
        if end + 1 > rest.len() {
            return Ok(Decoded { records, ..torn("truncated record") });
        }
        let body = &rest[body_start..end];
        let is_last = end + 1 == rest.len();
        if crc32fast::hash(body) != crc {
            if is_last {
                return Ok(Decoded { records, ..torn("checksum mismatch in final record") });
            }
            return Err(corrupt(offset, "checksum mismatch".into()));
        }
        if rest[end] != b'\n' {
            return Err(corrupt(offset, "missing record terminator".into()));
        }
        let record: Record = serde_json::from_slice(body).map_err(|e| corrupt(offset, e.to_string()))?;
        records.push((offset as u64, record));
        offset += end + 1;
    }
    Ok(Decoded { records, valid_len: offset as u64, torn_tail: None })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadReport {
    pub records: usize,
    pub valid_len: u64,
    pub torn_tail: Option<String>,
}

/// Replays a log. Fails on any corruption except a torn final record,
/// which is dropped with a warning.
pub fn load_project(bytes: &[u8]) -> Result<(Project, LoadReport), ProjectError> {
    let decoded = decode_records(bytes)?;
    if let Some(reason) = &decoded.torn_tail {
        log::warn!("dropping torn final record: {reason}");
    }
    let mut records = decoded.records.into_iter();
    let (_, first) = records.next().ok_or_else(|| ProjectError::CorruptLog {
        offset: 0,
        reason: "log contains no complete record".into(),
    })?;
    let mut project = Project::from_record(&first)?;
    let mut count = 1;
    for (offset, record) in records {
        project
            .apply(&record)
            .map_err(|e| ProjectError::CorruptLog { offset, reason: format!("{} record: {e}", record.name()) })?;
        count += 1;
    }
    Ok((project, LoadReport { records: count, valid_len: decoded.valid_len, torn_tail: decoded.torn_tail }))
}

/// A single snapshot record holding the whole project.
pub fn persist_project(project: &Project) -> Vec<u8> {
    encode_record(&Record::Snapshot { project: Box::new(project.snapshot()) })
}

/// An open log file positioned for appends.
#[derive(Debug)]
pub struct LogFile {
    path: PathBuf,
    file: File,
}

impl LogFile {
    /// Writes the first record of a new log; fails if the file exists.
    pub fn create(path: &Path, first: &Record) -> Result<LogFile, ProjectError> {
        let mut file = OpenOptions::new().write(true).create_new(true).open(path)?;
        file.write_all(&encode_record(first))?;
        file.sync_data()?;
        Ok(LogFile { path: path.to_owned(), file })
    }

    /// Loads the project and truncates any torn tail so later appends start clean.
    pub fn open(path: &Path) -> Result<(LogFile, Project, LoadReport), ProjectError> {
        let mut bytes = Vec::new();
        File::open(path)?.read_to_end(&mut bytes)?;
        let (project, report) = load_project(&bytes)?;
        let file = OpenOptions::new().append(true).open(path)?;
        if report.valid_len < bytes.len() as u64 {
            file.set_len(report.valid_len)?;
            file.sync_data()?;
        }
        Ok((LogFile { path: path.to_owned(), file }, project, report))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Appends and syncs one record.
    pub fn append(&mut self, record: &Record) -> Result<(), ProjectError> {
        self.file.write_all(&encode_record(record))?;
        self.file.sync_data()?;
        Ok(())
    }

    /// Replaces the log with a single snapshot of `project`.
    pub fn compact(&mut self, project: &Project) -> Result<(), ProjectError> {
        let tmp = self.path.with_extension("log.tmp");
        {
            let mut out = File::create(&tmp)?;
            out.write_all(&persist_project(project))?;
            out.sync_all()?;
        }
        fs::rename(&tmp, &self.path)?;
        self.file = OpenOptions::new().append(true).open(&self.path)?;
        Ok(())
    }
}
