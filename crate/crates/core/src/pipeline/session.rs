use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dsl::concept_list::ConceptEntry;
use crate::dsl::parse_graph;
use crate::graph::ConceptGraph;
use crate::llm::ChatMessage;
use crate::validator::ValidationReport;

use super::{PipelineError, Stage};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BasicInfo {
    pub task_name: String,
    #[serde(default)]
    pub domain: String,
    #[serde(default)]
    pub dataset: String,
}

impl BasicInfo {
    pub fn new(task_name: &str, domain: &str, dataset: &str) -> Self {
        BasicInfo {
            task_name: task_name.to_string(),
            domain: domain.to_string(),
            dataset: dataset.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Model,
    User,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Candidate {
    pub text: String,
    /// Present for code stages.
    pub report: Option<ValidationReport>,
    pub origin: Origin,
    /// Refinement rounds this text went through.
    pub attempt: usize,
}

impl Candidate {
    /// Rank key: fewer errors is better.
    pub fn error_count(&self) -> usize {
        self.report.as_ref().map_or(0, |r| r.error_count)
    }

    pub fn is_error_free(&self) -> bool {
        self.error_count() == 0
    }
}

/// Who produced an event: direct user input, model output, or checker
/// feedback.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    User,
    Model,
    Feedback,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub seq: usize,
    pub stage: Stage,
    pub channel: Channel,
    pub kind: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Session {
    pub id: String,
    pub created_at: String,
    pub stage: Stage,
    pub basic_info: BasicInfo,
    pub task_description: Option<String>,
    pub concept_list: Vec<ConceptEntry>,
    pub candidates: BTreeMap<Stage, Vec<Candidate>>,
    pub selected: BTreeMap<Stage, usize>,
    /// Canonical source of the approved graph, constraints excluded.
    pub graph_source: Option<String>,
    pub constraint_text: Option<String>,
    /// Accepted formulas, one per line.
    pub fol_text: Option<String>,
    /// Final program: the approved graph plus compiled constraints.
    pub program: Option<String>,
    pub history: Vec<ChatMessage>,
    pub iteration_count: usize,
    pub events: Vec<Event>,
}

impl Session {
    /// A session at `BasicInfo`. Id and timestamp are supplied by the caller
    /// so replays can pin them.
    pub fn new(id: &str, created_at: &str, basic_info: BasicInfo) -> Result<Self, PipelineError> {
        if basic_info.task_name.trim().is_empty() {
            return Err(PipelineError::InvalidInfo("task name is empty".into()));
        }
        let mut s = Session {
            id: id.to_string(),
            created_at: created_at.to_string(),
            stage: Stage::BasicInfo,
            basic_info,
            task_description: None,
            concept_list: Vec::new(),
            candidates: BTreeMap::new(),
            selected: BTreeMap::new(),
            graph_source: None,
            constraint_text: None,
            fol_text: None,
            program: None,
            history: Vec::new(),
            iteration_count: 0,
            events: Vec::new(),
        };
        let info = serde_json::to_string(&s.basic_info).expect("info serializes");
        s.log(Channel::User, "basic_info", info);
        Ok(s)
    }

    /// Stand-in returned when a script cannot even start a session.
    pub(crate) fn placeholder(id: &str) -> Self {
        Session::new(id, "", BasicInfo::new("?", "", "")).expect("non-empty name")
    }

    pub fn log(&mut self, channel: Channel, kind: &str, detail: impl Into<String>) {
        self.events.push(Event {
            seq: self.events.len(),
            stage: self.stage,
            channel,
            kind: kind.to_string(),
            detail: detail.into(),
        });
    }

    pub fn candidates(&self, stage: Stage) -> &[Candidate] {
        self.candidates.get(&stage).map_or(&[], Vec::as_slice)
    }

    pub fn selected_candidate(&self, stage: Stage) -> Option<&Candidate> {
        self.candidates(stage).get(*self.selected.get(&stage)?)
    }

    /// The approved graph, or while drafting, the selected draft when it
    /// parses.
    pub fn graph(&self) -> Option<ConceptGraph> {
        let text = match &self.graph_source {
            Some(t) => t.as_str(),
            None => &self.selected_candidate(Stage::GraphDraft)?.text,
        };
        parse_graph(text).graph
    }

    pub fn events_jsonl(&self) -> String {
        self.events
            .iter()
            .map(|e| serde_json::to_string(e).expect("event serializes") + "\n")
            .collect()
    }
}
