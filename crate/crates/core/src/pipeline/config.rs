use serde::{Deserialize, Serialize};

use crate::llm::SamplingParams;
use crate::retrieval::RetrievalMode;

use super::Stage;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct PipelineConfig {
    /// Samples drawn per generation call.
    pub samples: usize,
    /// Refinement rounds allowed per loop.
    pub max_iterations: usize,
    /// Rounds after which erroneous samples are dropped if a clean one exists.
    pub prune_threshold: usize,
    pub retrieval: RetrievalMode,
    /// Estimated-token budget for the prompt including carried history.
    pub history_budget: usize,
    /// Diagnostics listed per feedback message.
    pub feedback_items: usize,
    pub model: String,
    /// Temperature for prose stages.
    pub prose_temperature: f64,
    /// Temperature for code stages, kept low so repeated runs stay close.
    pub code_temperature: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            samples: 3,
            max_iterations: 5,
            prune_threshold: 2,
            retrieval: RetrievalMode::Full,
            history_budget: 6000,
            feedback_items: 10,
            model: SamplingParams::default().model,
            prose_temperature: 0.7,
            code_temperature: 0.2,
        }
    }
}

impl PipelineConfig {
    pub fn params(&self, stage: Stage) -> SamplingParams {
        SamplingParams {
            model: self.model.clone(),
            temperature: if stage.is_code() {
                self.code_temperature
            } else {
                self.prose_temperature
            },
        }
    }
}
