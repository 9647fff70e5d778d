//! Completion backends.
//!
//! Two implementations of one contract: [`HttpBackend`] talks to any
//! OpenAI-compatible chat-completions endpoint, [`HeuristicBackend`] is a
//! deterministic rule-based stand-in that makes offline pipeline runs
//! reproducible. Both are safe to share across threads.

mod heuristic;
mod http;

pub use heuristic::{
    classify_sentence, heuristic_stage_reply, shipped_anti_step_patterns, split_sentences,
    AntiStepPattern, HeuristicBackend, Lexicons, SentenceClass,
};
pub use http::HttpBackend;

use serde::Deserialize;

/// Environment variable carrying the API credential for HTTP backends.
/// Credentials never come from config files or flags.
pub const API_KEY_ENV: &str = "PKX_API_KEY";

/// A single-turn completion request.
#[derive(Debug, Clone, PartialEq)]
pub struct CompletionRequest {
    pub prompt: String,
    pub temperature: f64,
    pub max_output_tokens: u32,
    pub stop_sequences: Vec<String>,
}

impl CompletionRequest {
    /// Extraction default: temperature 0, no sampling surprises.
    pub fn new(prompt: impl Into<String>) -> Self {
        CompletionRequest {
            prompt: prompt.into(),
            temperature: 0.0,
            max_output_tokens: 4096,
            stop_sequences: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BackendError {
    #[error("request timed out")]
    Timeout,
    #[error("authentication failed (HTTP {status})")]
    AuthFailed { status: u16 },
    #[error("rate limited (retry after {retry_after:?} seconds)")]
    RateLimited { retry_after: Option<f64> },
    #[error("transport error: {0}")]
    Transport(String),
}

/// A completion backend. Implementations must be shareable across threads;
/// the pipeline never relies on per-call session state.
pub trait Backend: Send + Sync {
    fn complete(&self, request: &CompletionRequest) -> Result<String, BackendError>;
}

/// Which backend to construct, plus its transport knobs.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum BackendConfig {
    Heuristic,
    Http {
        base_url: String,
        model_name: String,
        #[serde(default = "default_timeout")]
        timeout_seconds: f64,
        #[serde(default = "default_concurrency")]
        max_concurrent_requests: usize,
    },
}

fn default_timeout() -> f64 {
    60.0
}

fn default_concurrency() -> usize {
    4
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig::Heuristic
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("no JSON payload found in reply")]
pub struct NoPayloadFound;

/// Pulls the first balanced, valid top-level JSON object or array out of a
/// noisy reply (code fences, surrounding prose). Bare JSON input comes back
/// unchanged, so the operation is idempotent.
pub fn extract_json_payload(reply: &str) -> Result<String, NoPayloadFound> {
    let bytes = reply.as_bytes();
    for (start, &b) in bytes.iter().enumerate() {
        if b != b'{' && b != b'[' {
            continue;
        }
        if let Some(end) = balanced_end(&reply[start..]) {
            let candidate = &reply[start..start + end];
            if serde_json::from_str::<serde::de::IgnoredAny>(candidate).is_ok() {
                return Ok(candidate.to_string());
            }
        }
    }
    Err(NoPayloadFound)
}

/// Byte length of the balanced JSON value at the start of `text`, tracking
/// string and escape state. `None` when the value never closes.
fn balanced_end(text: &str) -> Option<usize> {
    let mut depth = 0usize;
    let mut in_string = false;
    let mut escaped = false;
    for (i, b) in text.bytes().enumerate() {
        if in_string {
            if escaped {
                escaped = false;
            } else if b == b'\\' {
                escaped = true;
            } else if b == b'"' {
                in_string = false;
            }
            continue;
        }
        match b {
            b'"' => in_string = true,
            b'{' | b'[' => depth += 1,
            b'}' | b']' => {
                depth = depth.checked_sub(1)?;
                if depth == 0 {
                    return Some(i + 1);
                }
            }
            _ => {}
        }
    }
    None
}

/// Strips a Markdown code fence from a Turtle-shaped reply. Unlike JSON
/// payloads, Turtle has no bracket structure to scan for, so fence and
/// whitespace trimming is all that applies.
pub fn extract_turtle_payload(reply: &str) -> String {
    let trimmed = reply.trim();
    let Some(rest) = trimmed.strip_prefix("```") else {
        return trimmed.to_string();
    };
    let after_tag = match rest.find('\n') {
        Some(i) => &rest[i + 1..],
        None => return trimmed.to_string(),
    };
    match after_tag.rfind("```") {
        Some(end) => after_tag[..end].trim().to_string(),
        None => after_tag.trim().to_string(),
    }
}
