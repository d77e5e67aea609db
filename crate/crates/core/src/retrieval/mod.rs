//! Few-shot demonstration store with exact cosine retrieval.
//!
//! Each stage of the pipeline pulls its in-context examples from here. In
//! full mode every curated demonstration of the stage is used; in dynamic
//! mode only the single nearest one.

mod embed;
mod store;

pub use embed::{cosine, EmbedError, Embedder, NgramEmbedder, DEFAULT_DIMENSION};
pub use store::{append_record, DemoSource, DemoStore, Demonstration, StoreError, StoreHeader, STORE_FORMAT, STORE_VERSION};

use serde::{Deserialize, Serialize};

/// How many demonstrations a stage prompt receives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RetrievalMode {
    Full,
    Dynamic,
}

impl RetrievalMode {
    pub fn k(self) -> usize {
        match self {
            RetrievalMode::Full => 4,
            RetrievalMode::Dynamic => 1,
        }
    }
}
