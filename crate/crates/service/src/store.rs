//! Append-only JSON-lines event log with periodic snapshots.
//!
//! Layout of a store directory:
//!
//! * `events.jsonl`: one [`Event`] per line, sequences 1, 2, 3, ...
//! * `snapshot.json`: the folded [`State`] as of some sequence (optional)
//! * `exports/<id>/`: immutable export bundles

use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::Utc;

use crisis_mt_core::LanguagePair;

use crate::state::{Event, EventBody, State};

pub const EVENTS_FILE: &str = "events.jsonl";
pub const SNAPSHOT_FILE: &str = "snapshot.json";
pub const EXPORTS_DIR: &str = "exports";

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("event log corrupt at line {line} (last valid sequence {last_valid}): {reason}")]
    Corrupt { line: usize, last_valid: u64, reason: String },
    #[error("store {0} is in use by another process")]
    Locked(PathBuf),
    #[error("snapshot unusable: {0}")]
    Snapshot(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_owned(),
        source,
    }
}

/// Parses the whole log, requiring gapless sequences from 1 and a trailing
/// newline after the last entry. A missing file is an empty log.
pub fn read_log(dir: &Path) -> Result<Vec<Event>, StoreError> {
    let path = dir.join(EVENTS_FILE);
    let bytes = match fs::read(&path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(io_err(&path)(e)),
    };
    let mut events = Vec::new();
    let mut rest = &bytes[..];
    let mut line = 0;
    while !rest.is_empty() {
        line += 1;
        let last_valid = events.len() as u64;
        let corrupt = |reason: String| StoreError::Corrupt { line, last_valid, reason };
        let Some(end) = rest.iter().position(|&b| b == b'\n') else {
            return Err(corrupt("truncated entry (no trailing newline)".into()));
        };
        let event: Event = serde_json::from_slice(&rest[..end]).map_err(|e| corrupt(e.to_string()))?;
        if event.sequence != last_valid + 1 {
            return Err(corrupt(format!("expected sequence {}, found {}", last_valid + 1, event.sequence)));
        }
        events.push(event);
        rest = &rest[end + 1..];
    }
    Ok(events)
}

/// Folds the full log from scratch, ignoring any snapshot.
pub fn replay(dir: &Path, pairs: &[LanguagePair]) -> Result<State, StoreError> {
    let mut state = State::new(pairs);
    for (i, event) in read_log(dir)?.iter().enumerate() {
        state.apply(event).map_err(|reason| StoreError::Corrupt {
            line: i + 1,
            last_valid: state.last_sequence,
            reason,
        })?;
    }
    Ok(state)
}

/// The single writer for a store directory.
#[derive(Debug)]
pub struct Store {
    dir: PathBuf,
    log: File,
    snapshot_every: u64,
    snapshot_sequence: u64,
}

impl Store {
    /// Recovers state from `dir`, creating it if needed. The snapshot, when
    /// present and consistent with the log, saves refolding its prefix; every
    /// log entry is still parsed and sequence-checked.
    pub fn open(dir: &Path, pairs: &[LanguagePair], snapshot_every: u64) -> Result<(Store, State), StoreError> {
        fs::create_dir_all(dir.join(EXPORTS_DIR)).map_err(io_err(dir))?;
        let log_path = dir.join(EVENTS_FILE);
        let log = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&log_path)
            .map_err(io_err(&log_path))?;
        match log.try_lock() {
            Ok(()) => {}
            Err(fs::TryLockError::WouldBlock) => return Err(StoreError::Locked(dir.to_owned())),
            Err(fs::TryLockError::Error(e)) => return Err(io_err(&log_path)(e)),
        }
        let events = read_log(dir)?;

        let snapshot_path = dir.join(SNAPSHOT_FILE);
        let mut state = match fs::read(&snapshot_path) {
            Ok(bytes) => {
                let snap: State = serde_json::from_slice(&bytes).map_err(|e| StoreError::Snapshot(e.to_string()))?;
                if snap.last_sequence > events.len() as u64 {
                    return Err(StoreError::Snapshot(format!(
                        "snapshot is at sequence {} but the log ends at {}",
                        snap.last_sequence,
                        events.len()
                    )));
                }
                snap
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => State::default(),
            Err(e) => return Err(io_err(&snapshot_path)(e)),
        };
        let snapshot_sequence = state.last_sequence;
        state.serve(pairs);
        for (i, event) in events.iter().enumerate().skip(snapshot_sequence as usize) {
            state.apply(event).map_err(|reason| StoreError::Corrupt {
                line: i + 1,
                last_valid: state.last_sequence,
                reason,
            })?;
        }

        Ok((
            Store {
                dir: dir.to_owned(),
                log,
                snapshot_every,
                snapshot_sequence,
            },
            state,
        ))
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn exports_dir(&self) -> PathBuf {
        self.dir.join(EXPORTS_DIR)
    }

    /// Durably appends the next event after `state` and applies it. The
    /// caller must have checked that the event is valid for `state`.
    pub fn commit(&mut self, state: &mut State, body: EventBody) -> Result<Event, StoreError> {
        let event = Event {
            sequence: state.last_sequence + 1,
            at: Utc::now(),
            body,
        };
        let mut line = serde_json::to_vec(&event).expect("event serializes");
        line.push(b'\n');
        let path = self.dir.join(EVENTS_FILE);
        self.log.write_all(&line).map_err(io_err(&path))?;
        self.log.sync_data().map_err(io_err(&path))?;
        state
            .apply(&event)
            .unwrap_or_else(|reason| panic!("committed event {} does not apply: {reason}", event.sequence));

        if self.snapshot_every > 0 && state.last_sequence - self.snapshot_sequence >= self.snapshot_every {
            self.snapshot(state)?;
        }
        Ok(event)
    }

    pub fn snapshot(&mut self, state: &State) -> Result<(), StoreError> {
        let tmp = self.dir.join("snapshot.json.tmp");
        let body = serde_json::to_vec(state).expect("state serializes");
        let mut file = File::create(&tmp).map_err(io_err(&tmp))?;
        file.write_all(&body).map_err(io_err(&tmp))?;
        file.sync_data().map_err(io_err(&tmp))?;
        let path = self.dir.join(SNAPSHOT_FILE);
        fs::rename(&tmp, &path).map_err(io_err(&path))?;
        self.snapshot_sequence = state.last_sequence;
        Ok(())
    }
}
