use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::ChatMessage;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptRecord {
    pub digest: String,
    /// Template that produced the request; informational only.
    #[serde(default)]
    pub template: String,
    /// The rendered request, kept so transcripts can be audited.
    #[serde(default)]
    pub messages: Vec<ChatMessage>,
    pub responses: Vec<String>,
}

/// Recorded responses keyed by request digest. Stored as one JSON record
/// per line.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Transcript {
    records: Vec<TranscriptRecord>,
    index: HashMap<String, usize>,
}

impl Transcript {
    pub fn new() -> Self {
        Transcript::default()
    }

    /// Adds a record; a later record for the same digest replaces the
    /// earlier one so digests stay unique.
    pub fn insert(&mut self, record: TranscriptRecord) {
        match self.index.get(&record.digest) {
            Some(&i) => self.records[i] = record,
            None => {
                self.index.insert(record.digest.clone(), self.records.len());
                self.records.push(record);
            }
        }
    }

    pub fn get(&self, digest: &str) -> Option<&TranscriptRecord> {
        self.index.get(digest).map(|&i| &self.records[i])
    }

    pub fn records(&self) -> &[TranscriptRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn to_jsonl(&self) -> String {
        self.records
            .iter()
            .map(|r| serde_json::to_string(r).expect("record serializes") + "\n")
            .collect()
    }

    pub fn from_jsonl(text: &str) -> Result<Self, serde_json::Error> {
        let mut t = Transcript::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            t.insert(serde_json::from_str(line)?);
        }
        Ok(t)
    }
}
