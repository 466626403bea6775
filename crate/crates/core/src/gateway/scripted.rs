//! Deterministic rule-table backend used for offline runs and tests.
//!
//! Rule file: a JSON list of
//! `{"match": "...", "response": "...", "bot": "explorer"?, "regex": false?}`.
//! Rules are tried in order against the last user turn of the exchange; the
//! first rule whose `bot` scope (if any) and pattern both match wins. Plain
//! patterns are case-insensitive substrings; an empty pattern matches
//! everything.

use std::path::Path;

use async_trait::async_trait;
use regex::Regex;
use serde::Deserialize;
use serde_json::Value;
use thiserror::Error;

use super::{BotId, ChatBackend, ChatExchange, GatewayError};

#[derive(Debug, Error)]
pub enum RuleError {
    #[error("cannot read rule file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed rule file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("rule {index}: invalid regex: {source}")]
    Regex {
        index: usize,
        #[source]
        source: regex::Error,
    },
}

#[derive(Debug, Clone, Deserialize)]
pub struct ScriptedRule {
    #[serde(rename = "match")]
    pub pattern: String,
    /// A string is returned verbatim; any other JSON value is serialized.
    pub response: Value,
    #[serde(default)]
    pub bot: Option<BotId>,
    #[serde(default)]
    pub regex: bool,
}

#[derive(Debug, Clone)]
enum Matcher {
    Substring(String),
    Regex(Regex),
}

#[derive(Debug, Clone)]
struct CompiledRule {
    bot: Option<BotId>,
    matcher: Matcher,
    response: String,
}

#[derive(Debug, Clone)]
pub struct ScriptedBackend {
    rules: Vec<CompiledRule>,
}

impl ScriptedBackend {
    pub fn new(rules: Vec<ScriptedRule>) -> Result<Self, RuleError> {
        let rules = rules
            .into_iter()
            .enumerate()
            .map(|(index, r)| {
                let matcher = if r.regex {
                    Matcher::Regex(Regex::new(&r.pattern).map_err(|source| RuleError::Regex { index, source })?)
                } else {
                    Matcher::Substring(r.pattern.to_lowercase())
                };
                let response = match r.response {
                    Value::String(s) => s,
                    other => other.to_string(),
                };
                Ok(CompiledRule {
                    bot: r.bot,
                    matcher,
                    response,
                })
            })
            .collect::<Result<_, RuleError>>()?;
        Ok(ScriptedBackend { rules })
    }

    pub fn from_json(text: &str) -> Result<Self, RuleError> {
        Self::new(serde_json::from_str(text)?)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, RuleError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| RuleError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// Pure lookup: the response for an exchange, if any rule matches.
    pub fn respond(&self, exchange: &ChatExchange) -> Option<&str> {
        let text = exchange.last_user_text();
        let lowered = text.to_lowercase();
        self.rules
            .iter()
            .filter(|r| r.bot.is_none_or(|b| b == exchange.bot))
            .find(|r| match &r.matcher {
                Matcher::Substring(s) => lowered.contains(s.as_str()),
                Matcher::Regex(re) => re.is_match(text),
            })
            .map(|r| r.response.as_str())
    }
}

#[async_trait]
impl ChatBackend for ScriptedBackend {
    async fn complete(&self, exchange: &ChatExchange) -> Result<String, GatewayError> {
        self.respond(exchange)
            .map(str::to_string)
            .ok_or(GatewayError::NoRule { bot: exchange.bot })
    }
}
