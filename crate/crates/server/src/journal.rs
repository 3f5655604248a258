//! On-disk persistence: an append-only JSON-lines journal of events plus a
//! periodic snapshot.
//!
//! Layout of a data directory:
//!
//! - `snapshot.json`: `{"seq": n, "events": [...]}`, a compacted event list
//!   equivalent to the first `n` events. Written to a temporary file, synced
//!   and renamed into place.
//! - `journal.jsonl`: one `{"seq": i, "event": {...}}` per line, synced
//!   before a write is acknowledged. Lines with `seq <= n` are already
//!   covered by the snapshot and are skipped on replay.
//! - `LOCK`: held exclusively while the directory is open.
//!
//! A final line without its newline (crash mid-append) is dropped on open;
//! any other unreadable line is an error.

use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{ServiceError, ServiceResult};
use crate::store::{Event, Store};

const JOURNAL: &str = "journal.jsonl";
const SNAPSHOT: &str = "snapshot.json";
const LOCK: &str = "LOCK";

/// Journal entries between automatic snapshots.
pub const DEFAULT_SNAPSHOT_EVERY: u64 = 1_000;

#[derive(Serialize, Deserialize)]
struct Line<E> {
    seq: u64,
    event: E,
}

#[derive(Serialize, Deserialize)]
struct Snapshot {
    seq: u64,
    events: Vec<Event>,
}

#[derive(Debug)]
pub struct Journal {
    dir: PathBuf,
    file: File,
    _lock: File,
    since_snapshot: u64,
    snapshot_every: u64,
}

fn corrupt(path: &Path, line: usize, msg: impl std::fmt::Display) -> ServiceError {
    ServiceError::Storage(format!("{}:{line}: {msg}", path.display()))
}

fn sync_dir(dir: &Path) -> std::io::Result<()> {
    // Directory fsync makes renames and creations durable on POSIX systems;
    // elsewhere opening a directory may fail, which is harmless.
    match File::open(dir) {
        Ok(d) => d.sync_all().or(Ok(())),
        Err(_) => Ok(()),
    }
}

impl Journal {
    /// Opens (creating if needed) a data directory and rebuilds the state.
    pub fn open(dir: impl AsRef<Path>) -> ServiceResult<(Journal, Store)> {
        let dir = dir.as_ref().to_path_buf();
        fs::create_dir_all(&dir)?;
        let lock = OpenOptions::new().create(true).truncate(false).write(true).open(dir.join(LOCK))?;
        lock.try_lock().map_err(|_| {
            ServiceError::Storage(format!("{} is in use by another process", dir.display()))
        })?;

        let mut store = Store::new();
        let snap_path = dir.join(SNAPSHOT);
        if snap_path.exists() {
            let snap: Snapshot = serde_json::from_slice(&fs::read(&snap_path)?)
                .map_err(|e| corrupt(&snap_path, 0, e))?;
            for (i, event) in snap.events.iter().enumerate() {
                store.apply(event).map_err(|e| corrupt(&snap_path, i + 1, e))?;
            }
            store.set_seq(snap.seq);
        }

        let journal_path = dir.join(JOURNAL);
        let mut since_snapshot = 0;
        let mut valid_len = 0u64;
        if journal_path.exists() {
            let bytes = fs::read(&journal_path)?;
            for (i, raw) in bytes.split_inclusive(|&b| b == b'\n').enumerate() {
                let Some(body) = raw.strip_suffix(b"\n") else {
                    // Torn tail: never acknowledged, drop it.
                    break;
                };
                let line: Line<Event> =
                    serde_json::from_slice(body).map_err(|e| corrupt(&journal_path, i + 1, e))?;
                valid_len += raw.len() as u64;
                if line.seq <= store.seq() {
                    continue;
                }
                if line.seq != store.seq() + 1 {
                    return Err(corrupt(
                        &journal_path,
                        i + 1,
                        format!("expected seq {}, found {}", store.seq() + 1, line.seq),
                    ));
                }
                store.apply(&line.event).map_err(|e| corrupt(&journal_path, i + 1, e))?;
                since_snapshot += 1;
            }
        }

        let file = OpenOptions::new().create(true).append(true).open(&journal_path)?;
        if file.metadata()?.len() > valid_len {
            file.set_len(valid_len)?;
            file.sync_all()?;
        }
        sync_dir(&dir)?;
        Ok((
            Journal {
                dir,
                file,
                _lock: lock,
                since_snapshot,
                snapshot_every: DEFAULT_SNAPSHOT_EVERY,
            },
            store,
        ))
    }

    pub fn set_snapshot_every(&mut self, n: u64) {
        self.snapshot_every = n.max(1);
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Durably records `event`, which must already be applied to `store`
    /// (so `store.seq()` is its sequence number).
    pub fn append(&mut self, event: &Event, store: &Store) -> ServiceResult<()> {
        let mut buf = serde_json::to_vec(&Line {
            seq: store.seq(),
            event,
        })
        .map_err(|e| ServiceError::Storage(e.to_string()))?;
        buf.push(b'\n');
        let len = self.file.metadata()?.len();
        if let Err(e) = self.file.write_all(&buf).and_then(|()| self.file.sync_data()) {
            // Leave no half-written line for the next append to extend.
            let _ = self.file.set_len(len);
            return Err(e.into());
        }
        self.since_snapshot += 1;
        if self.since_snapshot >= self.snapshot_every {
            // The event is already durable; a failed snapshot only means a
            // longer replay next time.
            if let Err(e) = self.snapshot(store) {
                eprintln!("warning: snapshot failed: {e}");
            }
        }
        Ok(())
    }

    /// Writes a snapshot of `store` and empties the journal.
    pub fn snapshot(&mut self, store: &Store) -> ServiceResult<()> {
        let snap = Snapshot {
            seq: store.seq(),
            events: store.to_events(),
        };
        let tmp = self.dir.join(format!("{SNAPSHOT}.tmp"));
        {
            let mut f = File::create(&tmp)?;
            serde_json::to_writer(&mut f, &snap).map_err(|e| ServiceError::Storage(e.to_string()))?;
            f.sync_all()?;
        }
        fs::rename(&tmp, self.dir.join(SNAPSHOT))?;
        sync_dir(&self.dir)?;
        // Entries up to `seq` are now redundant; a crash before this point
        // merely leaves them to be skipped on replay.
        self.file.set_len(0)?;
        self.file.sync_all()?;
        self.since_snapshot = 0;
        Ok(())
    }
}
