//! Live sessions with versions, event channels and optional persistence.

use std::collections::HashMap;
use std::fs;
use std::io;
use std::path::PathBuf;
use std::sync::Mutex;

use kdecl::pipeline::Session;
use serde::{Deserialize, Serialize};
use tokio::sync::broadcast;

/// What subscribers of a session's event stream receive.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum StreamItem {
    /// A new session log event.
    Event(kdecl::pipeline::Event),
    /// Progress while an action runs.
    Progress(kdecl::pipeline::Progress),
    /// The session committed a new version.
    Version { version: u64 },
}

#[derive(Debug, Serialize, Deserialize)]
struct Saved {
    version: u64,
    session: Session,
}

struct Entry {
    session: Session,
    version: u64,
    events: broadcast::Sender<StreamItem>,
}

pub struct Sessions {
    entries: Mutex<HashMap<String, Entry>>,
    dir: Option<PathBuf>,
}

const CHANNEL_CAPACITY: usize = 256;

impl Sessions {
    /// Empty store; with a directory, sessions saved there are loaded and
    /// every commit is written back.
    pub fn open(dir: Option<PathBuf>) -> io::Result<Self> {
        let mut entries = HashMap::new();
        if let Some(d) = &dir {
            fs::create_dir_all(d)?;
            for file in fs::read_dir(d)? {
                let path = file?.path();
                if path.extension().is_none_or(|x| x != "json") {
                    continue;
                }
                let saved: Saved = serde_json::from_str(&fs::read_to_string(&path)?)
                    .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, format!("{}: {e}", path.display())))?;
                let (events, _) = broadcast::channel(CHANNEL_CAPACITY);
                entries.insert(
                    saved.session.id.clone(),
                    Entry {
                        session: saved.session,
                        version: saved.version,
                        events,
                    },
                );
            }
        }
        Ok(Sessions {
            entries: Mutex::new(entries),
            dir,
        })
    }

    fn persist(&self, session: &Session, version: u64) -> io::Result<()> {
        let Some(d) = &self.dir else { return Ok(()) };
        let saved = Saved {
            version,
            session: session.clone(),
        };
        let tmp = d.join(format!("{}.json.tmp", session.id));
        fs::write(&tmp, serde_json::to_vec(&saved).expect("session serializes"))?;
        fs::rename(tmp, d.join(format!("{}.json", session.id)))
    }

    pub fn insert(&self, session: Session) -> io::Result<u64> {
        self.persist(&session, 0)?;
        let (events, _) = broadcast::channel(CHANNEL_CAPACITY);
        let mut map = self.entries.lock().expect("sessions lock");
        map.insert(
            session.id.clone(),
            Entry {
                session,
                version: 0,
                events,
            },
        );
        Ok(0)
    }

    /// Session ids in sorted order.
    pub fn ids(&self) -> Vec<String> {
        let map = self.entries.lock().expect("sessions lock");
        let mut ids: Vec<String> = map.keys().cloned().collect();
        ids.sort();
        ids
    }

    /// A copy of the session and its version.
    pub fn snapshot(&self, id: &str) -> Option<(Session, u64)> {
        let map = self.entries.lock().expect("sessions lock");
        map.get(id).map(|e| (e.session.clone(), e.version))
    }

    pub fn sender(&self, id: &str) -> Option<broadcast::Sender<StreamItem>> {
        let map = self.entries.lock().expect("sessions lock");
        map.get(id).map(|e| e.events.clone())
    }

    /// Replaces the session if it is still at `base`; returns the new
    /// version, or the current one on conflict.
    pub fn commit(&self, session: Session, base: u64) -> Result<u64, CommitError> {
        let mut map = self.entries.lock().expect("sessions lock");
        let entry = map.get_mut(&session.id).ok_or(CommitError::Missing)?;
        if entry.version != base {
            return Err(CommitError::Conflict(entry.version));
        }
        let version = base + 1;
        self.persist(&session, version).map_err(CommitError::Io)?;
        let old_len = entry.session.events.len();
        for e in session.events.iter().skip(old_len) {
            let _ = entry.events.send(StreamItem::Event(e.clone()));
        }
        let _ = entry.events.send(StreamItem::Version { version });
        entry.session = session;
        entry.version = version;
        Ok(version)
    }
}

#[derive(Debug)]
pub enum CommitError {
    Missing,
    Conflict(u64),
    Io(io::Error),
}
