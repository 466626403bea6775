//! Chat-completion gateway: a uniform interface over the live HTTP backend
//! and the deterministic scripted backend, plus prompt templates and JSON
//! extraction for bot outputs.

mod json;
mod live;
mod scripted;
mod template;

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use async_trait::async_trait;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use json::{extract_json, RepairFailed};
pub use live::{LiveBackend, LiveConfig, RetryPolicy};
pub use scripted::{RuleError, ScriptedBackend, ScriptedRule};
pub use template::{Constraint, FewShot, PromptSet, PromptTemplate, TemplateError};

pub const ENV_BASE_URL: &str = "WANDER_LLM_BASE_URL";
pub const ENV_MODEL: &str = "WANDER_LLM_MODEL";
pub const ENV_API_KEY: &str = "WANDER_LLM_API_KEY";
pub const ENV_MODE: &str = "WANDER_LLM_MODE";

/// Temperature for the classifier and compiler.
pub const CLASSIFY_TEMPERATURE: f64 = 0.2;
/// Temperature for the explorer, navigator and identifier.
pub const RESPOND_TEMPERATURE: f64 = 0.7;
pub const DEFAULT_MAX_TOKENS: u32 = 600;

/// The five prompted bots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BotId {
    Classifier,
    Compiler,
    Explorer,
    Navigator,
    Identifier,
}

impl BotId {
    pub const ALL: [BotId; 5] = [
        BotId::Classifier,
        BotId::Compiler,
        BotId::Explorer,
        BotId::Navigator,
        BotId::Identifier,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BotId::Classifier => "classifier",
            BotId::Compiler => "compiler",
            BotId::Explorer => "explorer",
            BotId::Navigator => "navigator",
            BotId::Identifier => "identifier",
        }
    }

    pub fn temperature(self) -> f64 {
        match self {
            BotId::Classifier | BotId::Compiler => CLASSIFY_TEMPERATURE,
            _ => RESPOND_TEMPERATURE,
        }
    }
}

impl fmt::Display for BotId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatTurn {
    pub role: Role,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatExchange {
    /// Which bot issued the exchange; scripted rules may be scoped to it.
    pub bot: BotId,
    pub system: String,
    pub turns: Vec<ChatTurn>,
    pub temperature: f64,
    pub max_tokens: u32,
    pub want_json: bool,
}

impl ChatExchange {
    pub fn new(bot: BotId, system: impl Into<String>, user: impl Into<String>, want_json: bool) -> Self {
        ChatExchange {
            bot,
            system: system.into(),
            turns: vec![ChatTurn {
                role: Role::User,
                text: user.into(),
            }],
            temperature: bot.temperature(),
            max_tokens: DEFAULT_MAX_TOKENS,
            want_json,
        }
    }

    pub fn last_user_text(&self) -> &str {
        self.turns
            .iter()
            .rev()
            .find(|t| t.role == Role::User)
            .map_or("", |t| t.text.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GatewayError {
    #[error("chat exchange has no turns")]
    EmptyExchange,
    #[error("backend timed out")]
    Timeout,
    #[error("backend error{}: {message}", status.map(|s| format!(" (status {s})")).unwrap_or_default())]
    Backend { status: Option<u16>, message: String },
    #[error("no scripted rule matches the {bot} exchange")]
    NoRule { bot: BotId },
}

#[async_trait]
pub trait ChatBackend: Send + Sync {
    async fn complete(&self, exchange: &ChatExchange) -> Result<String, GatewayError>;
}

/// Validates the exchange and forwards it to `backend`.
pub async fn complete(backend: &dyn ChatBackend, exchange: &ChatExchange) -> Result<String, GatewayError> {
    if exchange.turns.is_empty() {
        return Err(GatewayError::EmptyExchange);
    }
    backend.complete(exchange).await
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendMode {
    Live,
    Scripted,
}

impl std::str::FromStr for BackendMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "live" => Ok(BackendMode::Live),
            "scripted" => Ok(BackendMode::Scripted),
            other => Err(format!("unknown backend mode `{other}` (expected live or scripted)")),
        }
    }
}

impl BackendMode {
    /// Reads `WANDER_LLM_MODE`, if set.
    pub fn from_env() -> Option<Result<Self, String>> {
        std::env::var(ENV_MODE).ok().map(|v| v.parse())
    }
}

/// Backend plus the prompt templates of every bot.
#[derive(Clone)]
pub struct Gateway {
    backend: Arc<dyn ChatBackend>,
    prompts: Arc<PromptSet>,
}

impl fmt::Debug for Gateway {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Gateway").finish_non_exhaustive()
    }
}

impl Gateway {
    pub fn new(backend: Arc<dyn ChatBackend>, prompts: PromptSet) -> Self {
        Gateway {
            backend,
            prompts: Arc::new(prompts),
        }
    }

    /// Scripted backend from a rule file with the built-in prompts.
    pub fn scripted_from_file(rules: impl AsRef<Path>) -> Result<Self, scripted::RuleError> {
        Ok(Self::new(
            Arc::new(ScriptedBackend::from_file(rules)?),
            PromptSet::builtin(),
        ))
    }

    pub fn prompts(&self) -> &PromptSet {
        &self.prompts
    }

    pub async fn call(&self, exchange: &ChatExchange) -> Result<String, GatewayError> {
        tracing::debug!(bot = %exchange.bot, "gateway call");
        complete(self.backend.as_ref(), exchange).await
    }
}
