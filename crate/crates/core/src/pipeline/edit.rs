use serde::{Deserialize, Serialize};

use crate::graph::{ConceptKind, Relation};

use super::Stage;

/// A structured user change to a session artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Edit {
    ReplaceDescription {
        text: String,
    },
    AddConcept {
        name: String,
        kind: ConceptKind,
        #[serde(default)]
        labels: Option<Vec<String>>,
    },
    RemoveConcept {
        name: String,
    },
    RenameConcept {
        from: String,
        to: String,
    },
    SetLabels {
        name: String,
        labels: Vec<String>,
    },
    AddEdge {
        relation: Relation,
    },
    /// Removes the edge with this descriptor, e.g. `is_a(pair_label, pair)`.
    RemoveEdge {
        descriptor: String,
    },
    ReplaceConstraintText {
        text: String,
    },
    ReplaceFormulas {
        text: String,
    },
}

impl Edit {
    /// The stage whose artifact the edit changes.
    pub fn target(&self) -> Stage {
        match self {
            Edit::ReplaceDescription { .. } => Stage::TaskDescription,
            Edit::AddConcept { .. } | Edit::RemoveConcept { .. } | Edit::RenameConcept { .. } | Edit::SetLabels { .. } => {
                Stage::ConceptList
            }
            Edit::AddEdge { .. } | Edit::RemoveEdge { .. } => Stage::GraphDraft,
            Edit::ReplaceConstraintText { .. } => Stage::ConstraintInput,
            Edit::ReplaceFormulas { .. } => Stage::FolDraft,
        }
    }
}

/// Everything a client can ask of a session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum Action {
    Generate {
        stage: Stage,
    },
    /// One refinement round, or rounds until no erroneous sample remains.
    Refine {
        #[serde(default, rename = "untilClean")]
        until_clean: bool,
    },
    Prune,
    Select {
        stage: Stage,
        index: usize,
    },
    Edit {
        edit: Edit,
    },
    Approve,
    /// Natural-language constraints; empty text skips constraints.
    Constraints {
        text: String,
    },
}
