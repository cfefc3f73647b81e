//! Single-directory embedded store.
//!
//! The whole [`State`] is written as one JSON snapshot after every successful
//! mutation: write `state.json.tmp`, fsync, rename over `state.json`, fsync
//! the directory. A crash at any point leaves either the previous or the new
//! snapshot on disk. An advisory lock on `LOCK` keeps two processes from
//! opening the same directory.

use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use parking_lot::{Mutex, RwLock};
use serde::{Deserialize, Serialize};

use crate::center::{Center, Settings, State};
use crate::error::{Error, Result};

pub const STATE_FILE: &str = "state.json";
const TMP_FILE: &str = "state.json.tmp";
const LOCK_FILE: &str = "LOCK";
const FORMAT: u32 = 1;

#[derive(Serialize)]
struct SnapshotRef<'a> {
    format: u32,
    state: &'a State,
}

#[derive(Deserialize)]
struct Snapshot {
    format: u32,
    state: State,
}

#[derive(Debug)]
struct Disk {
    dir: PathBuf,
    // Held for the lifetime of the store; dropping it releases the lock.
    _lock: File,
    write_lock: Mutex<()>,
}

#[derive(Debug)]
pub struct Db {
    center: RwLock<Center>,
    disk: Option<Disk>,
}

/// Reads the snapshot in `dir` without taking the directory lock.
pub fn read_snapshot(dir: &Path) -> Result<Option<State>> {
    let path = dir.join(STATE_FILE);
    let bytes = match fs::read(&path) {
        Ok(b) => b,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(Error::io(path, e)),
    };
    let snapshot: Snapshot = serde_json::from_slice(&bytes).map_err(|e| Error::Corrupt {
        path: path.clone(),
        message: e.to_string(),
    })?;
    if snapshot.format != FORMAT {
        return Err(Error::Corrupt {
            path,
            message: format!("unsupported snapshot format {}", snapshot.format),
        });
    }
    Ok(Some(snapshot.state))
}

fn sync_dir(dir: &Path) -> io::Result<()> {
    File::open(dir)?.sync_all()
}

impl Db {
    /// Opens (creating if needed) the data directory and restores its state.
    pub fn open(dir: &Path, settings: Settings) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let lock_path = dir.join(LOCK_FILE);
        let lock = OpenOptions::new()
            .create(true)
            .truncate(false)
            .write(true)
            .open(&lock_path)
            .map_err(|e| Error::io(&lock_path, e))?;
        match lock.try_lock() {
            Ok(()) => {}
            Err(fs::TryLockError::WouldBlock) => return Err(Error::Locked(dir.to_path_buf())),
            Err(fs::TryLockError::Error(e)) => return Err(Error::io(&lock_path, e)),
        }

        let tmp = dir.join(TMP_FILE);
        if tmp.exists() {
            fs::remove_file(&tmp).map_err(|e| Error::io(&tmp, e))?;
        }
        let state = read_snapshot(dir)?.unwrap_or_default();
        Ok(Db {
            center: RwLock::new(Center::from_state(settings, state)),
            disk: Some(Disk {
                dir: dir.to_path_buf(),
                _lock: lock,
                write_lock: Mutex::new(()),
            }),
        })
    }

    /// A store that never touches the filesystem.
    pub fn in_memory(center: Center) -> Self {
        Db {
            center: RwLock::new(center),
            disk: None,
        }
    }

    pub fn data_dir(&self) -> Option<&Path> {
        self.disk.as_ref().map(|d| d.dir.as_path())
    }

    pub fn read<R>(&self, f: impl FnOnce(&Center) -> R) -> R {
        f(&self.center.read())
    }

    /// Runs a mutation and, if it succeeds, persists the new state before
    /// returning. Operations validate before mutating, so an `Err` from `f`
    /// leaves the state untouched and nothing is written.
    pub fn write<R>(&self, f: impl FnOnce(&mut Center) -> Result<R>) -> Result<R> {
        let mut center = self.center.write();
        let out = f(&mut center)?;
        self.persist(&center)?;
        Ok(out)
    }

    /// Writes the current state to disk.
    pub fn flush(&self) -> Result<()> {
        let center = self.center.read();
        self.persist(&center)
    }

    fn persist(&self, center: &Center) -> Result<()> {
        let Some(disk) = &self.disk else {
            return Ok(());
        };
        let bytes = serde_json::to_vec(&SnapshotRef {
            format: FORMAT,
            state: center.state(),
        })
        .expect("state always serializes");

        let _guard = disk.write_lock.lock();
        let tmp = disk.dir.join(TMP_FILE);
        let target = disk.dir.join(STATE_FILE);
        let write = || -> io::Result<()> {
            let mut file = File::create(&tmp)?;
            file.write_all(&bytes)?;
            file.sync_all()?;
            drop(file);
            fs::rename(&tmp, &target)?;
            sync_dir(&disk.dir)
        };
        write().map_err(|e| Error::io(&target, e))
    }

    pub fn into_center(self) -> Center {
        self.center.into_inner()
    }
}
