//! HTTP backend speaking the common chat-completions request shape.

use std::time::Duration;

use async_trait::async_trait;
use serde::Deserialize;
use serde_json::{json, Value};

use super::{ChatBackend, ChatExchange, GatewayError, Role, ENV_API_KEY, ENV_BASE_URL, ENV_MODEL};

pub const DEFAULT_BASE_URL: &str = "https://api.openai.com/v1";
pub const DEFAULT_MODEL: &str = "gpt-3.5-turbo";

#[derive(Debug, Clone, PartialEq)]
pub struct RetryPolicy {
    /// Per-attempt timeout.
    pub timeout: Duration,
    /// Delay before each retry; its length is the retry count.
    pub backoff: Vec<Duration>,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            timeout: Duration::from_secs(20),
            backoff: vec![Duration::from_secs(1), Duration::from_secs(4)],
        }
    }
}

impl RetryPolicy {
    pub fn retries(&self) -> usize {
        self.backoff.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LiveConfig {
    pub base_url: String,
    pub model: String,
    pub api_key: Option<String>,
    pub retry: RetryPolicy,
}

impl LiveConfig {
    pub fn from_env() -> Self {
        LiveConfig {
            base_url: std::env::var(ENV_BASE_URL).unwrap_or_else(|_| DEFAULT_BASE_URL.to_string()),
            model: std::env::var(ENV_MODEL).unwrap_or_else(|_| DEFAULT_MODEL.to_string()),
            api_key: std::env::var(ENV_API_KEY).ok().filter(|k| !k.is_empty()),
            retry: RetryPolicy::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LiveBackend {
    config: LiveConfig,
    client: reqwest::Client,
}

#[derive(Deserialize)]
struct CompletionResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: Message,
}

#[derive(Deserialize)]
struct Message {
    #[serde(default)]
    content: Option<String>,
}

enum Attempt {
    Retry(GatewayError),
    Fatal(GatewayError),
}

impl LiveBackend {
    pub fn new(config: LiveConfig) -> Self {
        let client = reqwest::Client::builder()
            .timeout(config.retry.timeout)
            .build()
            .expect("http client builds");
        LiveBackend { config, client }
    }

    pub fn config(&self) -> &LiveConfig {
        &self.config
    }

    pub fn request_body(&self, exchange: &ChatExchange) -> Value {
        let mut messages = vec![json!({"role": "system", "content": exchange.system})];
        messages.extend(exchange.turns.iter().map(|t| {
            let role = match t.role {
                Role::User => "user",
                Role::Assistant => "assistant",
            };
            json!({"role": role, "content": t.text})
        }));
        let mut body = json!({
            "model": self.config.model,
            "messages": messages,
            "temperature": exchange.temperature,
            "max_tokens": exchange.max_tokens,
        });
        if exchange.want_json {
            body["response_format"] = json!({"type": "json_object"});
        }
        body
    }

    async fn attempt(&self, body: &Value) -> Result<String, Attempt> {
        let url = format!("{}/chat/completions", self.config.base_url.trim_end_matches('/'));
        let mut req = self.client.post(url).json(body);
        if let Some(key) = &self.config.api_key {
            req = req.bearer_auth(key);
        }
        let resp = match req.send().await {
            Ok(r) => r,
            Err(e) if e.is_timeout() => return Err(Attempt::Retry(GatewayError::Timeout)),
            Err(e) => {
                return Err(Attempt::Retry(GatewayError::Backend {
                    status: None,
                    message: e.to_string(),
                }))
            }
        };
        let status = resp.status();
        if !status.is_success() {
            let message = resp.text().await.unwrap_or_default();
            let err = GatewayError::Backend {
                status: Some(status.as_u16()),
                message,
            };
            return if status.is_server_error() || status.as_u16() == 429 {
                Err(Attempt::Retry(err))
            } else {
                Err(Attempt::Fatal(err))
            };
        }
        let parsed: CompletionResponse = match resp.json().await {
            Ok(p) => p,
            Err(e) if e.is_timeout() => return Err(Attempt::Retry(GatewayError::Timeout)),
            Err(e) => {
                return Err(Attempt::Fatal(GatewayError::Backend {
                    status: Some(status.as_u16()),
                    message: format!("unexpected response body: {e}"),
                }))
            }
        };
        parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .ok_or_else(|| {
                Attempt::Fatal(GatewayError::Backend {
                    status: Some(status.as_u16()),
                    message: "response has no message content".into(),
                })
            })
    }
}

#[async_trait]
impl ChatBackend for LiveBackend {
    async fn complete(&self, exchange: &ChatExchange) -> Result<String, GatewayError> {
        let body = self.request_body(exchange);
        let mut delays = self.config.retry.backoff.iter();
        loop {
            match self.attempt(&body).await {
                Ok(text) => return Ok(text),
                Err(Attempt::Fatal(e)) => return Err(e),
                Err(Attempt::Retry(e)) => match delays.next() {
                    Some(delay) => {
                        tracing::warn!(error = %e, ?delay, "chat completion failed, retrying");
                        tokio::time::sleep(*delay).await;
                    }
                    None => return Err(e),
                },
            }
        }
    }
}
