//! OpenAI-compatible chat-completions client.
//!
//! Sends a single-message chat request and reads the first choice's text.
//! The credential comes from the environment only, never from config files.

use super::{Backend, BackendError, CompletionRequest};
use serde::{Deserialize, Serialize};
use std::sync::{Condvar, Mutex};
use std::time::Duration;

#[derive(Serialize)]
struct WireRequest<'a> {
    model: &'a str,
    messages: [WireMessage<'a>; 1],
    temperature: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_tokens: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    stop: Option<&'a [String]>,
}

#[derive(Serialize)]
struct WireMessage<'a> {
    role: &'static str,
    content: &'a str,
}

#[derive(Deserialize)]
struct WireResponse {
    choices: Vec<WireChoice>,
}

#[derive(Deserialize)]
struct WireChoice {
    message: WireReplyMessage,
}

#[derive(Deserialize)]
struct WireReplyMessage {
    content: String,
}

/// Counting gate limiting in-flight requests to the configured maximum.
struct Gate {
    available: Mutex<usize>,
    cv: Condvar,
}

impl Gate {
    fn new(permits: usize) -> Self {
        Gate {
            available: Mutex::new(permits.max(1)),
            cv: Condvar::new(),
        }
    }

    fn acquire(&self) -> GateGuard<'_> {
        let mut available = self.available.lock().unwrap();
        while *available == 0 {
            available = self.cv.wait(available).unwrap();
        }
        *available -= 1;
        GateGuard { gate: self }
    }
}

struct GateGuard<'a> {
    gate: &'a Gate,
}

impl Drop for GateGuard<'_> {
    fn drop(&mut self) {
        *self.gate.available.lock().unwrap() += 1;
        self.gate.cv.notify_one();
    }
}

pub struct HttpBackend {
    endpoint: String,
    model_name: String,
    api_key: String,
    client: reqwest::blocking::Client,
    gate: Gate,
}

impl HttpBackend {
    pub fn new(
        base_url: &str,
        model_name: &str,
        api_key: String,
        timeout_seconds: f64,
        max_concurrent_requests: usize,
    ) -> Result<Self, BackendError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs_f64(timeout_seconds.max(0.001)))
            .build()
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        Ok(HttpBackend {
            endpoint: format!("{}/chat/completions", base_url.trim_end_matches('/')),
            model_name: model_name.to_string(),
            api_key,
            client,
            gate: Gate::new(max_concurrent_requests),
        })
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }
}

fn parse_retry_after(response: &reqwest::blocking::Response) -> Option<f64> {
    response
        .headers()
        .get("retry-after")
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.trim().parse().ok())
}

impl Backend for HttpBackend {
    fn complete(&self, request: &CompletionRequest) -> Result<String, BackendError> {
        let _permit = self.gate.acquire();
        let body = WireRequest {
            model: &self.model_name,
            messages: [WireMessage {
                role: "user",
                content: &request.prompt,
            }],
            temperature: request.temperature,
            max_tokens: Some(request.max_output_tokens),
            stop: if request.stop_sequences.is_empty() {
                None
            } else {
                Some(&request.stop_sequences)
            },
        };
        let response = self
            .client
            .post(&self.endpoint)
            .bearer_auth(&self.api_key)
            .json(&body)
            .send()
            .map_err(|e| {
                if e.is_timeout() {
                    BackendError::Timeout
                } else {
                    BackendError::Transport(e.to_string())
                }
            })?;

        let status = response.status().as_u16();
        match status {
            200..=299 => {}
            401 | 403 => return Err(BackendError::AuthFailed { status }),
            429 => {
                return Err(BackendError::RateLimited {
                    retry_after: parse_retry_after(&response),
                })
            }
            _ => {
                let text = response.text().unwrap_or_default();
                let snippet: String = text.chars().take(200).collect();
                return Err(BackendError::Transport(format!("HTTP {status}: {snippet}")));
            }
        }

        let parsed: WireResponse = response
            .json()
            .map_err(|e| BackendError::Transport(format!("unexpected response shape: {e}")))?;
        parsed
            .choices
            .into_iter()
            .next()
            .map(|c| c.message.content)
            .ok_or_else(|| BackendError::Transport("response has no choices".to_string()))
    }
}
