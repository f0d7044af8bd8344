//! Append-only JSON Lines journal. Each line is one command's events:
//!
//! `{"seq":N,"timestamp":T,"events":[...],"checksum":"<16 hex>"}`
//!
//! The checksum is the first 16 hex digits of SHA-256 over the line with the
//! checksum member removed, i.e. over `{"seq":N,"timestamp":T,"events":[...]}`.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tollgate_core::{DomainEvent, Tick};

use crate::ServiceError;

pub const JOURNAL_FILE: &str = "journal.jsonl";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JournalRecord {
    pub seq: u64,
    pub timestamp: Tick,
    pub events: Vec<DomainEvent>,
}

fn checksum(body: &str) -> String {
    hex::encode(&Sha256::digest(body.as_bytes())[..8])
}

impl JournalRecord {
    /// The record as one journal line, without the trailing newline.
    pub fn to_line(&self) -> String {
        let body = serde_json::to_string(self).expect("journal records serialize");
        let sum = checksum(&body);
        format!("{},\"checksum\":\"{sum}\"}}", &body[..body.len() - 1])
    }

    pub fn from_line(line: &str) -> Result<Self, String> {
        const TAIL: usize = ",\"checksum\":\"0123456789abcdef\"}".len();
        if line.len() < TAIL || !line.is_char_boundary(line.len() - TAIL) {
            return Err("record too short".into());
        }
        let (head, tail) = line.split_at(line.len() - TAIL);
        let sum = tail
            .strip_prefix(",\"checksum\":\"")
            .and_then(|t| t.strip_suffix("\"}"))
            .ok_or("missing checksum")?;
        let body = format!("{head}}}");
        if checksum(&body) != sum {
            return Err("checksum mismatch".into());
        }
        serde_json::from_str(&body).map_err(|e| e.to_string())
    }
}

#[derive(Debug)]
pub struct Journal {
    path: PathBuf,
    file: File,
    last_seq: u64,
}

impl Journal {
    /// Opens (creating if needed) the journal in `dir` and returns all
    /// records. Any unreadable line, including a torn final write, is
    /// reported as corruption with the last sequence number that verified.
    pub fn open(dir: &Path) -> Result<(Self, Vec<JournalRecord>), ServiceError> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(JOURNAL_FILE);
        let records = Self::read(&path)?;
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        let last_seq = records.last().map_or(0, |r| r.seq);
        Ok((Self { path, file, last_seq }, records))
    }

    pub fn read(path: &Path) -> Result<Vec<JournalRecord>, ServiceError> {
        let mut records: Vec<JournalRecord> = Vec::new();
        let file = match File::open(path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(records),
            Err(e) => return Err(e.into()),
        };
        let mut reader = BufReader::new(file);
        let mut line = String::new();
        loop {
            line.clear();
            let n = reader.read_line(&mut line)?;
            if n == 0 {
                break;
            }
            let last_good_seq = records.last().map_or(0, |r| r.seq);
            let corrupt = |reason: String| ServiceError::CorruptJournal { last_good_seq, reason };
            let Some(text) = line.strip_suffix('\n') else {
                return Err(corrupt("final record is truncated".into()));
            };
            let rec = JournalRecord::from_line(text).map_err(&corrupt)?;
            if rec.seq != last_good_seq + 1 {
                return Err(corrupt(format!("expected seq {}, found {}", last_good_seq + 1, rec.seq)));
            }
            records.push(rec);
        }
        Ok(records)
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn last_seq(&self) -> u64 {
        self.last_seq
    }

    /// Appends one record and syncs it. Returns its sequence number.
    pub fn append(&mut self, timestamp: Tick, events: Vec<DomainEvent>) -> Result<u64, ServiceError> {
        let rec = JournalRecord {
            seq: self.last_seq + 1,
            timestamp,
            events,
        };
        let mut line = rec.to_line();
        line.push('\n');
        self.file.write_all(line.as_bytes())?;
        self.file.sync_data()?;
        self.last_seq = rec.seq;
        Ok(rec.seq)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use tollgate_core::{OwnerId, PlazaId};

    fn ev(i: u64) -> DomainEvent {
        DomainEvent::PlazaRegistered {
            plaza_id: PlazaId::new(format!("p{i}")),
        }
    }

    #[test]
    fn line_round_trip_and_tamper_detection() {
        let rec = JournalRecord {
            seq: 4,
            timestamp: 9,
            events: vec![DomainEvent::OwnerRemoved { owner_id: OwnerId(2) }],
        };
        let line = rec.to_line();
        assert!(line.starts_with("{\"seq\":4,\"timestamp\":9,\"events\":["));
        assert_eq!(JournalRecord::from_line(&line).unwrap(), rec);
        let tampered = line.replace("\"timestamp\":9", "\"timestamp\":8");
        assert!(JournalRecord::from_line(&tampered).is_err());
    }

    #[test]
    fn reopen_reads_back() {
        let dir = tempfile::tempdir().unwrap();
        let (mut j, recs) = Journal::open(dir.path()).unwrap();
        assert!(recs.is_empty());
        for i in 0..3 {
            assert_eq!(j.append(i, vec![ev(i)]).unwrap(), i + 1);
        }
        drop(j);
        let (j, recs) = Journal::open(dir.path()).unwrap();
        assert_eq!(recs.len(), 3);
        assert_eq!(j.last_seq(), 3);
        assert_eq!(recs[2].events, vec![ev(2)]);
    }

    #[test]
    fn torn_write_reports_last_good_seq() {
        let dir = tempfile::tempdir().unwrap();
        let (mut j, _) = Journal::open(dir.path()).unwrap();
        for i in 0..5 {
            j.append(i, vec![ev(i)]).unwrap();
        }
        let path = j.path().to_path_buf();
        drop(j);
        let bytes = std::fs::read(&path).unwrap();
        let cut = bytes.len() - 20;
        std::fs::write(&path, &bytes[..cut]).unwrap();
        match Journal::open(dir.path()) {
            Err(ServiceError::CorruptJournal { last_good_seq, .. }) => assert_eq!(last_good_seq, 4),
            other => panic!("expected corruption, got {other:?}"),
        }
    }

    #[test]
    fn sequence_gap_is_corruption() {
        let dir = tempfile::tempdir().unwrap();
        let a = JournalRecord { seq: 1, timestamp: 0, events: vec![ev(1)] };
        let c = JournalRecord { seq: 3, timestamp: 0, events: vec![ev(3)] };
        std::fs::write(dir.path().join(JOURNAL_FILE), format!("{}\n{}\n", a.to_line(), c.to_line())).unwrap();
        assert!(matches!(
            Journal::open(dir.path()),
            Err(ServiceError::CorruptJournal { last_good_seq: 1, .. })
        ));
    }
}
