use std::cmp::Ordering;
use std::io::{self, BufRead, Write};

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::embed::{cosine, EmbedError, Embedder};
use crate::dsl::concept_list::parse_concept_list;
use crate::dsl::parse_graph;
use crate::fol::parse_fol_file;
use crate::pipeline::Stage;

pub const STORE_FORMAT: &str = "kdecl.demos";
pub const STORE_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("demonstration `{id}` has dimension {found}, store expects {expected}")]
    Dimension { id: String, expected: usize, found: usize },
    #[error("demonstration `{0}` already exists")]
    DuplicateId(String),
    #[error("payload of `{id}` does not parse as {stage} output")]
    BadPayload { id: String, stage: Stage },
    #[error("bad store header: {0}")]
    Header(String),
    #[error("bad record on line {line}: {reason}")]
    Record { line: usize, reason: String },
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Demonstration {
    pub id: String,
    pub stage: Stage,
    pub task_text: String,
    pub payload: String,
    pub embedding: Vec<f64>,
}

/// A demonstration before embedding, as authored in a demo corpus file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DemoSource {
    pub id: String,
    pub stage: Stage,
    pub task_text: String,
    pub payload: String,
}

impl Demonstration {
    /// Whether the payload is well-formed output for its stage. Warnings are
    /// allowed; demonstrations of the failure modes are useful too.
    pub fn payload_parses(&self) -> bool {
        match self.stage {
            Stage::ConceptList => {
                let (entries, diags) = parse_concept_list(&self.payload);
                !entries.is_empty() && diags.iter().all(|d| !d.code.as_str().starts_with("SYN"))
            }
            Stage::GraphDraft | Stage::GraphRefine => !parse_graph(&self.payload).has_syntax_errors(),
            Stage::FolDraft | Stage::ConstraintCompile => parse_fol_file(&self.payload)
                .iter()
                .all(|l| l.parse.diagnostics.iter().all(|d| !d.is_error())),
            _ => !self.payload.trim().is_empty(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoreHeader {
    pub format: String,
    pub version: u32,
    pub dimension: usize,
    pub embedder: String,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct Record {
    id: String,
    stage: Stage,
    task_text: String,
    payload: String,
    embedding: String,
}

fn encode(v: &[f64]) -> String {
    let bytes: Vec<u8> = v.iter().flat_map(|x| x.to_le_bytes()).collect();
    STANDARD.encode(bytes)
}

fn decode(s: &str) -> Result<Vec<f64>, String> {
    let bytes = STANDARD.decode(s).map_err(|e| e.to_string())?;
    if bytes.len() % 8 != 0 {
        return Err(format!("embedding has {} bytes, not a multiple of 8", bytes.len()));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemoStore {
    pub dimension: usize,
    pub embedder: String,
    pub entries: Vec<Demonstration>,
}

impl DemoStore {
    pub fn new(dimension: usize, embedder: impl Into<String>) -> Self {
        DemoStore {
            dimension,
            embedder: embedder.into(),
            entries: Vec::new(),
        }
    }

    pub fn for_embedder(embedder: &dyn Embedder) -> Self {
        DemoStore::new(embedder.dimension(), embedder.id())
    }

    pub fn insert(&mut self, demo: Demonstration) -> Result<(), StoreError> {
        if demo.embedding.len() != self.dimension {
            return Err(StoreError::Dimension {
                id: demo.id,
                expected: self.dimension,
                found: demo.embedding.len(),
            });
        }
        if self.entries.iter().any(|d| d.id == demo.id) {
            return Err(StoreError::DuplicateId(demo.id));
        }
        if !demo.payload_parses() {
            return Err(StoreError::BadPayload {
                id: demo.id,
                stage: demo.stage,
            });
        }
        self.entries.push(demo);
        Ok(())
    }

    /// Embeds `task_text` and inserts the demonstration.
    pub fn add(
        &mut self,
        embedder: &dyn Embedder,
        id: &str,
        stage: Stage,
        task_text: &str,
        payload: &str,
    ) -> Result<(), StoreError> {
        let embedding = embedder.embed(task_text)?;
        self.insert(Demonstration {
            id: id.to_string(),
            stage,
            task_text: task_text.to_string(),
            payload: payload.to_string(),
            embedding,
        })
    }

    /// Store for `embedder` holding every source, embedded in order.
    pub fn build(embedder: &dyn Embedder, sources: &[DemoSource]) -> Result<Self, StoreError> {
        let mut store = DemoStore::for_embedder(embedder);
        for d in sources {
            store.add(embedder, &d.id, d.stage, &d.task_text, &d.payload)?;
        }
        Ok(store)
    }

    pub fn stage_entries(&self, stage: Stage) -> impl Iterator<Item = &Demonstration> {
        self.entries.iter().filter(move |d| d.stage == stage)
    }

    /// The `k` entries of `stage` most similar to `query`, best first; ties
    /// go to the smaller id. Returns fewer when the stage has fewer entries.
    pub fn top_k(&self, query: &[f64], k: usize, stage: Stage) -> Vec<&Demonstration> {
        assert_eq!(query.len(), self.dimension, "query dimension must match the store");
        let mut scored: Vec<(f64, &Demonstration)> = self
            .stage_entries(stage)
            .map(|d| (cosine(query, &d.embedding), d))
            .collect();
        scored.sort_by(|(sa, a), (sb, b)| {
            sb.partial_cmp(sa).unwrap_or(Ordering::Equal).then_with(|| a.id.cmp(&b.id))
        });
        scored.into_iter().take(k).map(|(_, d)| d).collect()
    }

    pub fn header(&self) -> StoreHeader {
        StoreHeader {
            format: STORE_FORMAT.to_string(),
            version: STORE_VERSION,
            dimension: self.dimension,
            embedder: self.embedder.clone(),
        }
    }

    /// Header line followed by one record per entry.
    pub fn write_to(&self, mut out: impl Write) -> Result<(), StoreError> {
        writeln!(out, "{}", serde_json::to_string(&self.header()).expect("header serializes"))?;
        for d in &self.entries {
            append_record(&mut out, d)?;
        }
        Ok(())
    }

    pub fn read_from(input: impl BufRead) -> Result<Self, StoreError> {
        let mut lines = input.lines();
        let header_line = lines.next().ok_or_else(|| StoreError::Header("empty file".into()))??;
        let header: StoreHeader =
            serde_json::from_str(&header_line).map_err(|e| StoreError::Header(e.to_string()))?;
        if header.format != STORE_FORMAT || header.version != STORE_VERSION {
            return Err(StoreError::Header(format!(
                "unsupported format {} v{}",
                header.format, header.version
            )));
        }
        let mut store = DemoStore::new(header.dimension, header.embedder);
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let record_err = |reason: String| StoreError::Record { line: i + 2, reason };
            let r: Record = serde_json::from_str(&line).map_err(|e| record_err(e.to_string()))?;
            let embedding = decode(&r.embedding).map_err(record_err)?;
            store.insert(Demonstration {
                id: r.id,
                stage: r.stage,
                task_text: r.task_text,
                payload: r.payload,
                embedding,
            })?;
        }
        Ok(store)
    }
}

/// Writes one record line; the store file is append-only.
pub fn append_record(mut out: impl Write, d: &Demonstration) -> Result<(), StoreError> {
    let r = Record {
        id: d.id.clone(),
        stage: d.stage,
        task_text: d.task_text.clone(),
        payload: d.payload.clone(),
        embedding: encode(&d.embedding),
    };
    writeln!(out, "{}", serde_json::to_string(&r).expect("record serializes"))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::retrieval::NgramEmbedder;

    fn store() -> DemoStore {
        let e = NgramEmbedder::default();
        let mut s = DemoStore::for_embedder(&e);
        s.add(&e, "ner", Stage::TaskDescription, "named entity recognition", "Find entities.").unwrap();
        s.add(&e, "img", Stage::TaskDescription, "image classification", "Label images.").unwrap();
        s.add(&e, "nli", Stage::TaskDescription, "natural language inference", "Classify pairs.").unwrap();
        s
    }

    #[test]
    fn nearest_first() {
        let s = store();
        let q = NgramEmbedder::default().embed("entity relation extraction").unwrap();
        let hits = s.top_k(&q, 1, Stage::TaskDescription);
        assert_eq!(hits[0].id, "ner");
        assert_eq!(s.top_k(&q, 10, Stage::TaskDescription).len(), 3);
        assert!(s.top_k(&q, 3, Stage::GraphDraft).is_empty());
    }

    #[test]
    fn ties_by_id() {
        let mut s = DemoStore::new(2, "fixed");
        for id in ["b", "a", "c"] {
            s.insert(Demonstration {
                id: id.into(),
                stage: Stage::TaskDescription,
                task_text: "t".into(),
                payload: "p".into(),
                embedding: vec![1.0, 0.0],
            })
            .unwrap();
        }
        let ids: Vec<&str> = s.top_k(&[1.0, 0.0], 3, Stage::TaskDescription).iter().map(|d| d.id.as_str()).collect();
        assert_eq!(ids, ["a", "b", "c"]);
    }

    #[test]
    fn file_round_trip() {
        let s = store();
        let mut buf = Vec::new();
        s.write_to(&mut buf).unwrap();
        let back = DemoStore::read_from(buf.as_slice()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn rejects_bad_payload_and_dimension() {
        let e = NgramEmbedder::default();
        let mut s = DemoStore::for_embedder(&e);
        assert!(matches!(
            s.add(&e, "g", Stage::GraphDraft, "task", "graph g {"),
            Err(StoreError::BadPayload { .. })
        ));
        let bad = Demonstration {
            id: "x".into(),
            stage: Stage::TaskDescription,
            task_text: "t".into(),
            payload: "p".into(),
            embedding: vec![1.0],
        };
        assert!(matches!(s.insert(bad), Err(StoreError::Dimension { .. })));
    }
}
