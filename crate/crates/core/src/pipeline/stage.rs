use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Session stages in their only legal forward order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    BasicInfo,
    TaskDescription,
    ConceptList,
    GraphDraft,
    GraphRefine,
    GraphApproval,
    ConstraintInput,
    FolDraft,
    ConstraintCompile,
    Done,
}

impl Stage {
    pub const ALL: [Stage; 10] = [
        Stage::BasicInfo,
        Stage::TaskDescription,
        Stage::ConceptList,
        Stage::GraphDraft,
        Stage::GraphRefine,
        Stage::GraphApproval,
        Stage::ConstraintInput,
        Stage::FolDraft,
        Stage::ConstraintCompile,
        Stage::Done,
    ];

    /// Stages that sample the model and keep candidates.
    pub const GENERATIVE: [Stage; 4] = [Stage::TaskDescription, Stage::ConceptList, Stage::GraphDraft, Stage::FolDraft];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::BasicInfo => "basic_info",
            Stage::TaskDescription => "task_description",
            Stage::ConceptList => "concept_list",
            Stage::GraphDraft => "graph_draft",
            Stage::GraphRefine => "graph_refine",
            Stage::GraphApproval => "graph_approval",
            Stage::ConstraintInput => "constraint_input",
            Stage::FolDraft => "fol_draft",
            Stage::ConstraintCompile => "constraint_compile",
            Stage::Done => "done",
        }
    }

    pub fn next(self) -> Option<Stage> {
        let i = Stage::ALL.iter().position(|s| *s == self)?;
        Stage::ALL.get(i + 1).copied()
    }

    pub fn is_generative(self) -> bool {
        Stage::GENERATIVE.contains(&self)
    }

    /// Whether samples of this stage are code that the validator checks.
    pub fn is_code(self) -> bool {
        matches!(self, Stage::ConceptList | Stage::GraphDraft | Stage::FolDraft)
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown stage `{0}`")]
pub struct UnknownStage(pub String);

impl FromStr for Stage {
    type Err = UnknownStage;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Stage::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| UnknownStage(s.to_string()))
    }
}
