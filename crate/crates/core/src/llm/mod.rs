//! Chat-completion plumbing: prompt templates, history windowing, request
//! digests and the backends that answer requests.
//!
//! Tests and demos run against [`ReplayBackend`] or [`ScriptedBackend`], so
//! a whole session is reproducible byte for byte. The HTTP backend for
//! OpenAI-compatible endpoints sits behind the `live` feature.

mod backend;
#[cfg(feature = "live")]
mod live;
mod template;
mod transcript;

pub use backend::{backend_from_env, ChatBackend, RecordingBackend, ReplayBackend, ScriptedBackend, SharedBackend};
#[cfg(feature = "live")]
pub use live::LiveBackend;
pub use template::{estimate_tokens, window_history, PromptTemplate, TemplateError};
pub use transcript::{Transcript, TranscriptRecord};

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChatRole {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: ChatRole,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        ChatMessage {
            role: ChatRole::System,
            content: content.into(),
        }
    }

    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage {
            role: ChatRole::User,
            content: content.into(),
        }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        ChatMessage {
            role: ChatRole::Assistant,
            content: content.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingParams {
    pub model: String,
    pub temperature: f64,
}

impl Default for SamplingParams {
    fn default() -> Self {
        SamplingParams {
            model: "gpt-3.5-turbo".to_string(),
            temperature: 0.2,
        }
    }
}

/// One completion call: `n` samples for the rendered messages. The template
/// id is routing metadata for scripted backends and is not part of the
/// digest.
#[derive(Debug, Clone, PartialEq)]
pub struct CompletionRequest {
    pub template: String,
    pub messages: Vec<ChatMessage>,
    pub n: usize,
    pub params: SamplingParams,
}

impl CompletionRequest {
    /// Hex SHA-256 of the canonical JSON of the messages and sampling
    /// parameters.
    pub fn digest(&self) -> String {
        let canonical = serde_json::json!({
            "messages": self.messages,
            "model": self.params.model,
            "n": self.n,
            "temperature": self.params.temperature,
        });
        let bytes = serde_json::to_vec(&canonical).expect("request serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LlmError {
    #[error("no recorded response for request {digest}")]
    ReplayMiss { digest: String },
    #[error("recorded request {digest} has {recorded} responses, {requested} requested")]
    SampleCount { digest: String, recorded: usize, requested: usize },
    #[error("script for template `{0}` is exhausted")]
    ScriptExhausted(String),
    #[error("backend error: {0}")]
    Backend(String),
    #[error("sample count must be at least 1")]
    ZeroSamples,
}

impl fmt::Display for ChatRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChatRole::System => "system",
            ChatRole::User => "user",
            ChatRole::Assistant => "assistant",
        })
    }
}
