//! Durable storage: an append-only event log with per-line checksums,
//! periodic agent-state snapshots, and leaderboard queries. State is
//! recovered by folding the log from the latest snapshot (event sourcing).

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::agent::AgentState;
use crate::error::{ArtError, Result};
use crate::hash::stable_hash;

pub const EVENTS_FILE: &str = "events.jsonl";
pub const SNAPSHOTS_DIR: &str = "snapshots";

pub const KIND_AGENT_REGISTERED: &str = "agent_registered";
pub const KIND_TOURNAMENT_STARTED: &str = "tournament_started";
pub const KIND_ROUND_COMPLETED: &str = "round_completed";
pub const KIND_RATINGS_UPDATED: &str = "ratings_updated";
pub const KIND_CONSENSUS_GENERATED: &str = "consensus_generated";
pub const KIND_TOURNAMENT_COMPLETED: &str = "tournament_completed";

/// One immutable line of the audit log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub sequence_number: u64,
    pub timestamp_ms: u64,
    pub event_kind: String,
    pub payload: Value,
    pub checksum: String,
}

impl EventRecord {
    fn compute_checksum(seq: u64, ts: u64, kind: &str, payload: &Value) -> String {
        let body = payload.to_string();
        let h = stable_hash(&[
            &seq.to_le_bytes(),
            &ts.to_le_bytes(),
            kind.as_bytes(),
            body.as_bytes(),
        ]);
        format!("{h:016x}")
    }

    pub fn verify(&self) -> bool {
        Self::compute_checksum(
            self.sequence_number,
            self.timestamp_ms,
            &self.event_kind,
            &self.payload,
        ) == self.checksum
    }
}

/// A leaderboard row, consistent with the agent's stored state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderboardEntry {
    pub agent_id: String,
    pub name: String,
    pub rating: f64,
    pub wins: u64,
    pub losses: u64,
    pub draws: u64,
    pub match_count: u64,
}

impl From<&AgentState> for LeaderboardEntry {
    fn from(state: &AgentState) -> Self {
        LeaderboardEntry {
            agent_id: state.agent_id.clone(),
            name: state.name.clone(),
            rating: state.rating.value,
            wins: state.wins,
            losses: state.losses,
            draws: state.draws,
            match_count: state.rating.match_count,
        }
    }
}

/// Registration payload retained in the log so mock agents can be rebuilt
/// on restart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegisteredAgent {
    pub agent_id: String,
    pub name: String,
    pub model_name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default)]
    pub quality: f64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Serialize, Deserialize)]
struct Snapshot {
    last_sequence: u64,
    states: Vec<AgentState>,
}

/// Append-only event store rooted at a directory. Single writer; append is
/// atomic at record granularity and durable before `append_event` returns.
pub struct EventStore {
    dir: PathBuf,
    file: File,
    next_sequence: u64,
}

impl EventStore {
    /// Open (or create) a store. The existing log is scanned to continue
    /// the sequence from the last durable record.
    pub fn open(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref().to_path_buf();
        fs::create_dir_all(dir.join(SNAPSHOTS_DIR))?;
        let path = dir.join(EVENTS_FILE);
        let last = if path.exists() {
            read_events(&path)?
                .last()
                .map(|e| e.sequence_number)
                .unwrap_or(0)
        } else {
            0
        };
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        Ok(EventStore {
            dir,
            file,
            next_sequence: last + 1,
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Append one event. Returns its assigned sequence number.
    pub fn append_event(&mut self, kind: &str, payload: Value) -> Result<u64> {
        let seq = self.next_sequence;
        let ts = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_millis() as u64)
            .unwrap_or(0);
        let checksum = EventRecord::compute_checksum(seq, ts, kind, &payload);
        let record = EventRecord {
            sequence_number: seq,
            timestamp_ms: ts,
            event_kind: kind.to_string(),
            payload,
            checksum,
        };
        let line = serde_json::to_string(&record)
            .map_err(|e| ArtError::Storage(format!("serialize event: {e}")))?;
        self.file
            .write_all(line.as_bytes())
            .and_then(|_| self.file.write_all(b"\n"))
            .and_then(|_| self.file.sync_data())
            .map_err(|e| ArtError::Storage(format!("append event: {e}")))?;
        self.next_sequence += 1;
        Ok(seq)
    }

    /// All verified events in sequence order. Corrupt lines are skipped
    /// with a warning.
    pub fn events(&self) -> Result<Vec<EventRecord>> {
        read_events(&self.dir.join(EVENTS_FILE))
    }

    /// Write a snapshot of all agent states at the current sequence.
    pub fn write_snapshot(&mut self, states: &[AgentState]) -> Result<()> {
        let snapshot = Snapshot {
            last_sequence: self.next_sequence - 1,
            states: states.to_vec(),
        };
        let path = self
            .dir
            .join(SNAPSHOTS_DIR)
            .join(format!("snapshot-{:012}.json", snapshot.last_sequence));
        let tmp = path.with_extension("tmp");
        fs::write(
            &tmp,
            serde_json::to_vec_pretty(&snapshot)
                .map_err(|e| ArtError::Storage(format!("serialize snapshot: {e}")))?,
        )?;
        fs::rename(&tmp, &path)?;
        Ok(())
    }

    fn latest_snapshot(&self) -> Result<Option<Snapshot>> {
        let dir = self.dir.join(SNAPSHOTS_DIR);
        let mut best: Option<PathBuf> = None;
        for entry in fs::read_dir(&dir)? {
            let path = entry?.path();
            if path.extension().and_then(|e| e.to_str()) == Some("json")
                && best.as_ref().is_none_or(|b| path > *b)
            {
                best = Some(path);
            }
        }
        match best {
            None => Ok(None),
            Some(path) => {
                let bytes = fs::read(&path)?;
                match serde_json::from_slice::<Snapshot>(&bytes) {
                    Ok(s) => Ok(Some(s)),
                    Err(e) => {
                        eprintln!("warning: skipping corrupt snapshot {path:?}: {e}");
                        Ok(None)
                    }
                }
            }
        }
    }

    /// Recover agent states: latest snapshot folded with subsequent
    /// registration and rating events. Sorted by agent id.
    pub fn load_agent_states(&self) -> Result<Vec<AgentState>> {
        let (mut states, from_seq) = match self.latest_snapshot()? {
            Some(snapshot) => {
                let map: BTreeMap<String, AgentState> = snapshot
                    .states
                    .into_iter()
                    .map(|s| (s.agent_id.clone(), s))
                    .collect();
                (map, snapshot.last_sequence)
            }
            None => (BTreeMap::new(), 0),
        };
        for event in self.events()? {
            if event.sequence_number <= from_seq {
                continue;
            }
            match event.event_kind.as_str() {
                KIND_AGENT_REGISTERED => {
                    match serde_json::from_value::<RegisteredAgent>(event.payload.clone()) {
                        Ok(reg) => {
                            let config = crate::agent::AgentConfig {
                                name: reg.name,
                                model_name: reg.model_name,
                                description: reg.description,
                            };
                            states.insert(
                                reg.agent_id.clone(),
                                AgentState::new(reg.agent_id, &config),
                            );
                        }
                        Err(e) => eprintln!(
                            "warning: skipping malformed registration (seq {}): {e}",
                            event.sequence_number
                        ),
                    }
                }
                KIND_RATINGS_UPDATED => {
                    let updated = event.payload.get("states").cloned().unwrap_or(Value::Null);
                    match serde_json::from_value::<Vec<AgentState>>(updated) {
                        Ok(list) => {
                            for state in list {
                                states.insert(state.agent_id.clone(), state);
                            }
                        }
                        Err(e) => eprintln!(
                            "warning: skipping malformed ratings update (seq {}): {e}",
                            event.sequence_number
                        ),
                    }
                }
                _ => {}
            }
        }
        Ok(states.into_values().collect())
    }

    /// Registration payloads in log order (used to rebuild mock agents).
    pub fn registrations(&self) -> Result<Vec<RegisteredAgent>> {
        let mut out = Vec::new();
        for event in self.events()? {
            if event.event_kind == KIND_AGENT_REGISTERED {
                if let Ok(reg) = serde_json::from_value::<RegisteredAgent>(event.payload) {
                    out.push(reg);
                }
            }
        }
        Ok(out)
    }

    /// Top agents by rating (ties by match count descending, then id).
    pub fn leaderboard(&self, limit: usize) -> Result<Vec<LeaderboardEntry>> {
        let states = self.load_agent_states()?;
        Ok(leaderboard_of(&states, limit))
    }
}

/// Rank agent states into leaderboard order: rating descending, then match
/// count descending, then agent id.
pub fn leaderboard_of(states: &[AgentState], limit: usize) -> Vec<LeaderboardEntry> {
    let mut entries: Vec<LeaderboardEntry> = states.iter().map(LeaderboardEntry::from).collect();
    entries.sort_by(|a, b| {
        b.rating
            .partial_cmp(&a.rating)
            .unwrap()
            .then_with(|| b.match_count.cmp(&a.match_count))
            .then_with(|| a.agent_id.cmp(&b.agent_id))
    });
    entries.truncate(limit);
    entries
}

fn read_events(path: &Path) -> Result<Vec<EventRecord>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let reader = BufReader::new(File::open(path)?);
    let mut events = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<EventRecord>(&line) {
            Ok(record) if record.verify() => events.push(record),
            Ok(_) => eprintln!(
                "warning: checksum mismatch at {path:?}:{}, skipping",
                lineno + 1
            ),
            Err(e) => eprintln!("warning: corrupt record at {path:?}:{}: {e}", lineno + 1),
        }
    }
    Ok(events)
}
