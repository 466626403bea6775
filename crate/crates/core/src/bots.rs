//! Feedback generation: the explorer, navigator and identifier bots, the
//! arbiter that picks one of them, and validation of their replies.

use std::collections::{BTreeMap, BTreeSet};

use regex::Regex;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::gateway::{extract_json, BotId, ChatExchange, Gateway, GatewayError, RepairFailed, TemplateError};
use crate::pipeline::{user_turn, ContextFrame, TaskKind};
use crate::session::{Session, SessionError};
use crate::world::{Artwork, MuseumWorld};

/// Spoken when the identifier bot cannot be reached.
pub const PREFERENCE_ACK: &str = "Noted your preference.";
/// Spoken by the navigator when its reply carried no usable text.
pub const FOLLOW_ME: &str = "Sure! Follow me.";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionRef {
    pub name: String,
    /// 3 is the most important.
    pub importance: u8,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BotResponse {
    pub response: String,
    pub context: Option<String>,
    /// Resolved artwork id.
    pub landmark: Option<String>,
    pub tasks: Vec<String>,
    pub tours: Option<Vec<String>>,
    pub regions: Option<Vec<RegionRef>>,
}

impl BotResponse {
    /// Tour ids the visitor has not seen yet, in the bot's order.
    pub fn suggestions(&self, history: &[String]) -> Vec<String> {
        self.tours
            .iter()
            .flatten()
            .filter(|id| !history.contains(id))
            .cloned()
            .collect()
    }
}

#[derive(Debug, Error)]
pub enum BotError {
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error(transparent)]
    Repair(#[from] RepairFailed),
    #[error("no destination could be found for `{0}`")]
    NoResolvableTarget(String),
    #[error(transparent)]
    Session(#[from] SessionError),
}

/// Navigation beats information enhancement, which beats preference.
pub fn arbitrate(tasks: &BTreeSet<TaskKind>) -> BotId {
    if tasks.contains(&TaskKind::Navigation) {
        BotId::Navigator
    } else if tasks.contains(&TaskKind::InformationEnhancement) || tasks.is_empty() {
        BotId::Explorer
    } else {
        BotId::Identifier
    }
}

const FIELD_KEYS: [&str; 9] = [
    "response",
    "introduction",
    "context",
    "landmark",
    "tasks",
    "tours",
    "tour",
    "tourid",
    "regions",
];

fn field_key(label: &str) -> String {
    label.chars().filter(|c| c.is_alphanumeric()).flat_map(char::to_lowercase).collect()
}

/// Parses `Key: value` lines such as `Response: ...` / `Tours: [...]`.
/// Lines that do not start with a known key continue the previous field.
fn parse_labeled(raw: &str) -> Option<Map<String, Value>> {
    let line_re = Regex::new(r"^\s*([A-Za-z][A-Za-z ]{0,20}?)\s*:\s?(.*)$").expect("static regex");
    let mut fields: Vec<(String, String)> = Vec::new();
    for line in raw.lines() {
        let hit = line_re
            .captures(line)
            .map(|c| (field_key(&c[1]), c[2].to_string()))
            .filter(|(k, _)| FIELD_KEYS.contains(&k.as_str()));
        match hit {
            Some((key, value)) => fields.push((key, value)),
            None => match fields.last_mut() {
                Some((_, value)) => {
                    value.push('\n');
                    value.push_str(line);
                }
                None if line.trim().is_empty() => {}
                None => return None,
            },
        }
    }
    if !fields.iter().any(|(k, _)| k == "response" || k == "introduction") {
        return None;
    }
    let mut map = Map::new();
    for (key, value) in fields {
        let value = value.trim();
        let parsed = if value.eq_ignore_ascii_case("null") || value.is_empty() {
            Value::Null
        } else if value.starts_with('[') || value.starts_with('{') {
            extract_json(value).unwrap_or_else(|_| Value::String(value.to_string()))
        } else {
            Value::String(value.replace("\\n", "\n"))
        };
        map.insert(key, parsed);
    }
    Some(map)
}

/// Reply fields keyed by normalized name (`TourID` becomes `tourid`).
pub fn parse_fields(raw: &str) -> Result<Map<String, Value>, RepairFailed> {
    let fields = match extract_json(raw) {
        Ok(Value::Object(obj)) => Some(obj.into_iter().map(|(k, v)| (field_key(&k), v)).collect()),
        _ => parse_labeled(raw),
    };
    // a reply with nothing to say is not a reply
    fields
        .filter(|f: &Map<String, Value>| ["response", "introduction"].iter().any(|k| f.contains_key(*k)))
        .ok_or_else(|| RepairFailed { raw: raw.to_string() })
}

fn text_of(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.trim().to_string()).filter(|s| !s.is_empty()),
        Value::Array(items) => {
            let lines: Vec<String> = items.iter().filter_map(text_of).map(|s| format!("- {s}")).collect();
            (!lines.is_empty()).then(|| lines.join("\n"))
        }
        Value::Null => None,
        other => Some(other.to_string()),
    }
}

fn strings_of(v: &Value) -> Vec<String> {
    match v {
        Value::String(s) => vec![s.clone()],
        Value::Array(items) => items
            .iter()
            .filter_map(|i| match i {
                Value::String(s) => Some(s.clone()),
                Value::Number(n) => Some(n.to_string()),
                _ => None,
            })
            .collect(),
        _ => Vec::new(),
    }
}

fn resolve_ids(world: &MuseumWorld, names: &[String]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for name in names {
        match world.find_artwork(name) {
            Some(a) if !out.contains(&a.id) => out.push(a.id.clone()),
            Some(_) => {}
            None => tracing::info!(name = name.as_str(), "dropping unresolvable artwork from reply"),
        }
    }
    out
}

fn resolve_regions(focus: Option<&Artwork>, v: &Value) -> Vec<RegionRef> {
    let Some(art) = focus else {
        return Vec::new();
    };
    let Value::Array(items) = v else {
        return Vec::new();
    };
    let mut out: Vec<RegionRef> = Vec::new();
    for item in items {
        let (name, importance) = match item {
            Value::String(s) => (s.clone(), 2.0),
            Value::Array(pair) => match pair.as_slice() {
                [Value::String(s), imp, ..] => (s.clone(), imp.as_f64().unwrap_or(2.0)),
                _ => continue,
            },
            Value::Object(o) => {
                let o: BTreeMap<String, &Value> = o.iter().map(|(k, v)| (field_key(k), v)).collect();
                let Some(name) = o.get("name").and_then(|v| v.as_str()) else {
                    continue;
                };
                let imp = o.get("importance").and_then(|v| v.as_f64()).unwrap_or(2.0);
                (name.to_string(), imp)
            }
            _ => continue,
        };
        match art.region(&name) {
            Some(region) if !out.iter().any(|r| r.name == region.name) => out.push(RegionRef {
                name: region.name.clone(),
                importance: importance.round().clamp(1.0, 3.0) as u8,
            }),
            Some(_) => {}
            None => tracing::info!(region = name.as_str(), artwork = art.id.as_str(), "dropping unknown region"),
        }
    }
    out
}

/// Turns raw reply fields into a validated response: every tour id exists
/// and every region belongs to the focus artwork.
pub fn validate(fields: &Map<String, Value>, world: &MuseumWorld, session: &Session) -> BotResponse {
    let get = |k: &str| fields.get(k).filter(|v| !v.is_null());
    let response = get("response")
        .or_else(|| get("introduction"))
        .and_then(text_of)
        .unwrap_or_default();
    let landmark = get("landmark")
        .and_then(text_of)
        .and_then(|name| world.find_artwork(name.trim_matches('"')).map(|a| a.id.clone()));
    let tours = ["tourid", "tours", "tour"]
        .iter()
        .filter_map(|k| get(k))
        .map(|v| resolve_ids(world, &strings_of(v)))
        .find(|ids| !ids.is_empty());
    let focus = session
        .landmark
        .as_deref()
        .or(landmark.as_deref())
        .and_then(|id| world.artwork(id));
    let regions = get("regions").map(|v| resolve_regions(focus, v)).filter(|r| !r.is_empty());
    let unknown = unknown_id_matcher(world);
    let response = scrub(&response, &unknown, world, crate::text::sentences, " ");
    let context = get("context")
        .and_then(text_of)
        .map(|c| scrub(&c, &unknown, world, |t| t.lines().collect(), "\n"))
        .filter(|c| !c.trim().is_empty());
    BotResponse {
        response,
        context,
        landmark,
        tasks: get("tasks").map(strings_of).unwrap_or_default(),
        tours,
        regions,
    }
}

/// Matches strings shaped like the world's ids, e.g. `painting 123`.
fn unknown_id_matcher(world: &MuseumWorld) -> Option<Regex> {
    let digits = Regex::new(r"\d+$").expect("static regex");
    let shapes: BTreeSet<String> = world
        .artworks
        .iter()
        .filter(|a| digits.is_match(&a.id))
        .map(|a| format!(r"{}\d+", regex::escape(digits.replace(&a.id, "").as_ref())))
        .collect();
    if shapes.is_empty() {
        return None;
    }
    let alt: Vec<&str> = shapes.iter().map(String::as_str).collect();
    Regex::new(&format!(r"(?i)\b(?:{})\b", alt.join("|"))).ok()
}

/// Drops the pieces of `text` that cite an id the world does not have.
fn scrub(
    text: &str,
    matcher: &Option<Regex>,
    world: &MuseumWorld,
    split: impl Fn(&str) -> Vec<&str>,
    sep: &str,
) -> String {
    let Some(re) = matcher else {
        return text.to_string();
    };
    let cites_unknown = |piece: &str| re.find_iter(piece).any(|m| world.find_artwork(m.as_str()).is_none());
    if !cites_unknown(text) {
        return text.to_string();
    }
    let kept: Vec<&str> = split(text).into_iter().filter(|p| !cites_unknown(p)).collect();
    kept.join(sep)
}

/// Bot system prompt with stage-scoped constraints and the frame's slots.
pub fn render_prompt(gateway: &Gateway, bot: BotId, frame: &ContextFrame) -> Result<String, TemplateError> {
    gateway
        .prompts()
        .get(bot)
        .scoped(frame.stage.scope())
        .render(&frame.related)
}

async fn ask(gateway: &Gateway, bot: BotId, frame: &ContextFrame, session: &Session, json: bool) -> Result<String, BotError> {
    let system = render_prompt(gateway, bot, frame)?;
    let ex = ChatExchange::new(bot, system, user_turn(&frame.utterance, session), json);
    Ok(gateway.call(&ex).await?)
}

pub async fn run_explorer(
    gateway: &Gateway,
    frame: &ContextFrame,
    session: &Session,
    world: &MuseumWorld,
) -> Result<BotResponse, BotError> {
    let raw = ask(gateway, BotId::Explorer, frame, session, true).await?;
    let fields = parse_fields(&raw)?;
    Ok(validate(&fields, world, session))
}

pub async fn run_navigator(
    gateway: &Gateway,
    frame: &ContextFrame,
    session: &Session,
    world: &MuseumWorld,
) -> Result<BotResponse, BotError> {
    let raw = ask(gateway, BotId::Navigator, frame, session, true).await?;
    let fields = parse_fields(&raw)?;
    let mut resp = validate(&fields, world, session);
    if resp.tours.is_none() {
        resp.tours = frame.mentioned.first().map(|id| vec![id.clone()]);
    }
    if resp.tours.is_none() {
        return Err(BotError::NoResolvableTarget(frame.utterance.clone()));
    }
    if resp.response.is_empty() {
        resp.response = FOLLOW_ME.to_string();
    }
    // the navigator never narrates regions
    resp.regions = None;
    Ok(resp)
}

/// Stores the utterance as a preference, then acknowledges it. The
/// preference is kept even when the backend fails.
pub async fn run_identifier(
    gateway: &Gateway,
    frame: &ContextFrame,
    session: &mut Session,
    world: &MuseumWorld,
) -> Result<BotResponse, BotError> {
    session.add_preference(world, &frame.utterance)?;
    let mut frame = frame.clone();
    frame
        .related
        .insert("preferences".into(), session.preferences.iter().map(|p| format!("- {p}")).collect::<Vec<_>>().join("\n"));
    let response = match ask(gateway, BotId::Identifier, &frame, session, false).await {
        Ok(raw) => match parse_fields(&raw) {
            Ok(fields) if fields.contains_key("response") => validate(&fields, world, session).response,
            _ => raw.trim().to_string(),
        },
        Err(e) => {
            tracing::warn!(error = %e, "identifier unavailable, using canned acknowledgement");
            String::new()
        }
    };
    Ok(BotResponse {
        response: if response.is_empty() { PREFERENCE_ACK.to_string() } else { response },
        ..BotResponse::default()
    })
}

pub async fn run_bot(
    bot: BotId,
    gateway: &Gateway,
    frame: &ContextFrame,
    session: &mut Session,
    world: &MuseumWorld,
) -> Result<BotResponse, BotError> {
    match bot {
        BotId::Navigator => run_navigator(gateway, frame, session, world).await,
        BotId::Identifier => run_identifier(gateway, frame, session, world).await,
        _ => run_explorer(gateway, frame, session, world).await,
    }
}
