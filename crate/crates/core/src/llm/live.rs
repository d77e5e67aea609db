use serde::Deserialize;

use super::{ChatBackend, CompletionRequest, LlmError};

/// OpenAI-compatible `/chat/completions` client.
#[derive(Debug, Clone)]
pub struct LiveBackend {
    endpoint: String,
    model: Option<String>,
    api_key: Option<String>,
}

#[derive(Deserialize)]
struct Reply {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: Content,
}

#[derive(Deserialize)]
struct Content {
    content: Option<String>,
}

impl LiveBackend {
    pub fn new(endpoint: &str, model: Option<String>, api_key: Option<String>) -> Self {
        LiveBackend {
            endpoint: endpoint.trim_end_matches('/').to_string(),
            model,
            api_key,
        }
    }

    pub fn from_env() -> Result<Self, LlmError> {
        let endpoint = std::env::var("KDECL_ENDPOINT").unwrap_or_else(|_| "https://api.openai.com/v1".to_string());
        Ok(LiveBackend::new(
            &endpoint,
            std::env::var("KDECL_MODEL").ok(),
            std::env::var("KDECL_API_KEY").ok(),
        ))
    }
}

impl ChatBackend for LiveBackend {
    fn complete(&self, request: &CompletionRequest) -> Result<Vec<String>, LlmError> {
        if request.n == 0 {
            return Err(LlmError::ZeroSamples);
        }
        let body = serde_json::json!({
            "model": self.model.as_deref().unwrap_or(&request.params.model),
            "messages": request.messages,
            "n": request.n,
            "temperature": request.params.temperature,
        });
        let mut call = ureq::post(&format!("{}/chat/completions", self.endpoint));
        if let Some(key) = &self.api_key {
            call = call.header("Authorization", &format!("Bearer {key}"));
        }
        let reply: Reply = call
            .send_json(&body)
            .map_err(|e| LlmError::Backend(e.to_string()))?
            .body_mut()
            .read_json()
            .map_err(|e| LlmError::Backend(e.to_string()))?;
        let texts: Vec<String> = reply
            .choices
            .into_iter()
            .map(|c| c.message.content.unwrap_or_default())
            .collect();
        if texts.len() != request.n {
            return Err(LlmError::Backend(format!("asked for {} samples, got {}", request.n, texts.len())));
        }
        Ok(texts)
    }
}
