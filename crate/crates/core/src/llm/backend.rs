use std::collections::{BTreeMap, HashMap, VecDeque};
use std::sync::{Arc, Mutex};

use super::{CompletionRequest, LlmError, Transcript, TranscriptRecord};

/// Answers completion requests with exactly `n` texts, in a stable order.
pub trait ChatBackend: Send + Sync {
    fn complete(&self, request: &CompletionRequest) -> Result<Vec<String>, LlmError>;
}

pub type SharedBackend = Arc<dyn ChatBackend>;

impl<B: ChatBackend + ?Sized> ChatBackend for Arc<B> {
    fn complete(&self, request: &CompletionRequest) -> Result<Vec<String>, LlmError> {
        (**self).complete(request)
    }
}

/// Serves recorded responses by digest and fails loudly on anything else.
#[derive(Debug, Clone)]
pub struct ReplayBackend {
    transcript: Transcript,
}

impl ReplayBackend {
    pub fn new(transcript: Transcript) -> Self {
        ReplayBackend { transcript }
    }
}

impl ChatBackend for ReplayBackend {
    fn complete(&self, request: &CompletionRequest) -> Result<Vec<String>, LlmError> {
        if request.n == 0 {
            return Err(LlmError::ZeroSamples);
        }
        let digest = request.digest();
        let record = self
            .transcript
            .get(&digest)
            .ok_or_else(|| LlmError::ReplayMiss { digest: digest.clone() })?;
        if record.responses.len() != request.n {
            return Err(LlmError::SampleCount {
                digest,
                recorded: record.responses.len(),
                requested: request.n,
            });
        }
        Ok(record.responses.clone())
    }
}

/// Pops queued responses per template id. Useful for authoring fixtures:
/// wrap it in a [`RecordingBackend`] to produce a replayable transcript.
#[derive(Debug, Default)]
pub struct ScriptedBackend {
    queues: Mutex<HashMap<String, VecDeque<String>>>,
}

impl ScriptedBackend {
    pub fn new() -> Self {
        ScriptedBackend::default()
    }

    pub fn push<'a>(&self, template: &str, responses: impl IntoIterator<Item = &'a str>) -> &Self {
        let mut queues = self.queues.lock().expect("script lock");
        queues
            .entry(template.to_string())
            .or_default()
            .extend(responses.into_iter().map(str::to_string));
        self
    }

    /// Backend answering each template from its list, in order.
    pub fn from_map(responses: &BTreeMap<String, Vec<String>>) -> Self {
        let b = ScriptedBackend::new();
        for (template, list) in responses {
            b.push(template, list.iter().map(String::as_str));
        }
        b
    }

    pub fn remaining(&self, template: &str) -> usize {
        self.queues.lock().expect("script lock").get(template).map_or(0, VecDeque::len)
    }
}

impl ChatBackend for ScriptedBackend {
    fn complete(&self, request: &CompletionRequest) -> Result<Vec<String>, LlmError> {
        if request.n == 0 {
            return Err(LlmError::ZeroSamples);
        }
        let mut queues = self.queues.lock().expect("script lock");
        let queue = queues.entry(request.template.clone()).or_default();
        if queue.len() < request.n {
            return Err(LlmError::ScriptExhausted(request.template.clone()));
        }
        Ok(queue.drain(..request.n).collect())
    }
}

/// Forwards to an inner backend and records every answered request. A
/// repeated request with different answers is refused, since a replay could
/// only serve one of them.
pub struct RecordingBackend<B> {
    inner: B,
    transcript: Mutex<Transcript>,
}

impl<B: ChatBackend> RecordingBackend<B> {
    pub fn new(inner: B) -> Self {
        RecordingBackend {
            inner,
            transcript: Mutex::new(Transcript::new()),
        }
    }

    pub fn transcript(&self) -> Transcript {
        self.transcript.lock().expect("transcript lock").clone()
    }
}

impl<B: ChatBackend> ChatBackend for RecordingBackend<B> {
    fn complete(&self, request: &CompletionRequest) -> Result<Vec<String>, LlmError> {
        let responses = self.inner.complete(request)?;
        let digest = request.digest();
        let mut transcript = self.transcript.lock().expect("transcript lock");
        if transcript.get(&digest).is_some_and(|r| r.responses != responses) {
            return Err(LlmError::Backend(format!(
                "request {digest} was answered twice with different responses; replay would be ambiguous"
            )));
        }
        transcript.insert(TranscriptRecord {
            digest,
            template: request.template.clone(),
            messages: request.messages.clone(),
            responses: responses.clone(),
        });
        Ok(responses)
    }
}

/// Builds a backend from `KDECL_BACKEND` (`replay`, the default, or `live`).
/// Replay reads the transcript at `KDECL_TRANSCRIPT`; live uses
/// `KDECL_ENDPOINT`, `KDECL_MODEL` and `KDECL_API_KEY`.
pub fn backend_from_env() -> Result<SharedBackend, LlmError> {
    let kind = std::env::var("KDECL_BACKEND").unwrap_or_else(|_| "replay".to_string());
    match kind.as_str() {
        "replay" => {
            let path = std::env::var("KDECL_TRANSCRIPT")
                .map_err(|_| LlmError::Backend("KDECL_TRANSCRIPT is not set".into()))?;
            let text = std::fs::read_to_string(&path).map_err(|e| LlmError::Backend(format!("{path}: {e}")))?;
            let transcript = Transcript::from_jsonl(&text).map_err(|e| LlmError::Backend(format!("{path}: {e}")))?;
            Ok(Arc::new(ReplayBackend::new(transcript)))
        }
        #[cfg(feature = "live")]
        "live" => Ok(Arc::new(super::LiveBackend::from_env()?)),
        other => Err(LlmError::Backend(format!("unsupported backend `{other}`"))),
    }
}
