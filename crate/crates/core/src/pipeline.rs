//! Context identification: the classifier labels the utterance with tasks,
//! the compiler names the information kinds it needs, and the related
//! information is then materialized from the world and the session.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::gateway::{extract_json, BotId, ChatExchange, Gateway, GatewayError, TemplateError};
use crate::session::{infer_stage, Session, StageKind};
use crate::text::{find_phrase, fmt_coord, fmt_point, normalize_name};
use crate::world::{Artwork, ArtworkFilter, MuseumWorld, SortBy, VisitStats};

/// Upper bound on artworks pulled in by popularity or proximity.
pub const CANDIDATE_LIMIT: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    InformationEnhancement,
    PersonalizedPreference,
    Navigation,
}

impl TaskKind {
    pub const ALL: [TaskKind; 3] = [
        TaskKind::InformationEnhancement,
        TaskKind::PersonalizedPreference,
        TaskKind::Navigation,
    ];

    pub fn label(self) -> &'static str {
        match self {
            TaskKind::InformationEnhancement => "information enhancement",
            TaskKind::PersonalizedPreference => "personalized preference",
            TaskKind::Navigation => "navigation",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InfoKind {
    Spatial,
    Semantic,
    Social,
}

impl InfoKind {
    pub const ALL: [InfoKind; 3] = [InfoKind::Spatial, InfoKind::Semantic, InfoKind::Social];

    pub fn label(self) -> &'static str {
        match self {
            InfoKind::Spatial => "spatial",
            InfoKind::Semantic => "semantic",
            InfoKind::Social => "social",
        }
    }
}

const SUMMARY_LABEL: &str = "summary";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    pub tasks: BTreeSet<TaskKind>,
    pub summary_intent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContextFrame {
    pub utterance: String,
    pub tasks: BTreeSet<TaskKind>,
    pub info: BTreeSet<InfoKind>,
    pub stage: StageKind,
    /// Prompt slot name to rendered text.
    pub related: BTreeMap<String, String>,
    pub summary_intent: bool,
    /// Artwork ids named in the utterance, in order of mention.
    pub mentioned: Vec<String>,
    /// Artwork ids whose data entered the related information.
    pub candidates: Vec<String>,
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("utterance is empty")]
    EmptyUtterance,
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error(transparent)]
    Template(#[from] TemplateError),
}

/// The user turn shared by every bot: question plus the visitor's situation.
pub fn user_turn(utterance: &str, session: &Session) -> String {
    format!(
        "Question: {}\nPosition: {}\nLandmark: {}\nHistory: {}",
        utterance.trim(),
        position_text(session),
        landmark_text(session),
        history_text(session),
    )
}

fn position_text(session: &Session) -> String {
    fmt_point(&[session.visitor_pos[0], session.visitor_pos[1], 0.0])
}

fn landmark_text(session: &Session) -> String {
    match &session.landmark {
        Some(id) => format!("\"{id}\""),
        None => "null".into(),
    }
}

fn id_list(ids: &[String]) -> String {
    let quoted: Vec<String> = ids.iter().map(|id| format!("'{id}'")).collect();
    format!("[{}]", quoted.join(", "))
}

fn history_text(session: &Session) -> String {
    if session.history.is_empty() {
        "null".into()
    } else {
        id_list(&session.history)
    }
}

fn preferences_text(session: &Session) -> String {
    if session.preferences.is_empty() {
        "none".into()
    } else {
        session
            .preferences
            .iter()
            .map(|p| format!("- {p}"))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

/// Labels found in a classifier or compiler reply. A bracketed list is
/// preferred; otherwise the text is scanned for the known labels.
fn labels(raw: &str, known: &[&str]) -> Vec<String> {
    let listed: Option<Vec<String>> = match extract_json(raw) {
        Ok(Value::Array(items)) => Some(
            items
                .iter()
                .filter_map(Value::as_str)
                .map(normalize_name)
                .collect(),
        ),
        Ok(Value::String(s)) => Some(vec![normalize_name(&s)]),
        _ => None,
    };
    match listed {
        Some(list) => list,
        None => {
            let hay = normalize_name(raw);
            known
                .iter()
                .filter(|k| find_phrase(&hay, k).is_some())
                .map(|k| k.to_string())
                .collect()
        }
    }
}

pub fn parse_tasks(raw: &str) -> Classification {
    let known: Vec<&str> = TaskKind::ALL
        .iter()
        .map(|t| t.label())
        .chain([SUMMARY_LABEL])
        .collect();
    let found = labels(raw, &known);
    let mut tasks = BTreeSet::new();
    let mut summary_intent = false;
    for label in &found {
        match label.as_str() {
            SUMMARY_LABEL => summary_intent = true,
            "personalised preference" => {
                tasks.insert(TaskKind::PersonalizedPreference);
            }
            other => match TaskKind::ALL.iter().find(|t| t.label() == other) {
                Some(t) => {
                    tasks.insert(*t);
                }
                None => tracing::debug!(label = other, "dropping unknown task label"),
            },
        }
    }
    if tasks.is_empty() {
        tasks.insert(TaskKind::InformationEnhancement);
    }
    Classification { tasks, summary_intent }
}

pub fn parse_info(raw: &str) -> BTreeSet<InfoKind> {
    let known: Vec<&str> = InfoKind::ALL.iter().map(|k| k.label()).collect();
    labels(raw, &known)
        .iter()
        .filter_map(|l| InfoKind::ALL.iter().find(|k| k.label() == l).copied())
        .collect()
}

fn tasks_text(tasks: &BTreeSet<TaskKind>) -> String {
    let quoted: Vec<String> = tasks.iter().map(|t| format!("'{}'", t.label())).collect();
    format!("[{}]", quoted.join(", "))
}

pub async fn classify(gateway: &Gateway, utterance: &str, session: &Session) -> Result<Classification, PipelineError> {
    if utterance.trim().is_empty() {
        return Err(PipelineError::EmptyUtterance);
    }
    let system = gateway.prompts().get(BotId::Classifier).render(&BTreeMap::new())?;
    let ex = ChatExchange::new(BotId::Classifier, system, user_turn(utterance, session), false);
    let raw = gateway.call(&ex).await?;
    Ok(parse_tasks(&raw))
}

/// Asks the compiler which information kinds the answer needs.
pub async fn compile_info(
    gateway: &Gateway,
    utterance: &str,
    tasks: &BTreeSet<TaskKind>,
    session: &Session,
) -> Result<BTreeSet<InfoKind>, PipelineError> {
    let slots = BTreeMap::from([("tasks".to_string(), tasks_text(tasks))]);
    let system = gateway.prompts().get(BotId::Compiler).render(&slots)?;
    let ex = ChatExchange::new(BotId::Compiler, system, user_turn(utterance, session), false);
    let raw = gateway.call(&ex).await?;
    let mut info = parse_info(&raw);
    // walking anywhere needs positions, whatever the compiler said
    if tasks.contains(&TaskKind::Navigation) {
        info.insert(InfoKind::Spatial);
    }
    Ok(info)
}

/// Artwork ids named in `text` (by title or id), in order of first mention.
pub fn mentioned_artworks(world: &MuseumWorld, text: &str) -> Vec<String> {
    let hay = normalize_name(text);
    let mut hits: Vec<(usize, &str)> = world
        .artworks
        .iter()
        .filter_map(|a| mention_offset(&hay, a).map(|at| (at, a.id.as_str())))
        .collect();
    hits.sort();
    hits.into_iter().map(|(_, id)| id.to_string()).collect()
}

/// Offset of the first mention of `art` in a normalized text.
pub fn mention_offset(normalized: &str, art: &Artwork) -> Option<usize> {
    let name = normalize_name(&art.name);
    let short = name.strip_prefix("the ").unwrap_or(&name);
    [find_phrase(normalized, &normalize_name(&art.id)), find_phrase(normalized, &name), find_phrase(normalized, short)]
        .into_iter()
        .flatten()
        .min()
}

pub fn candidate_artworks(
    world: &MuseumWorld,
    session: &Session,
    mentioned: &[String],
    info: &BTreeSet<InfoKind>,
) -> Vec<String> {
    let mut out: Vec<String> = mentioned.to_vec();
    let push = |id: &str, out: &mut Vec<String>| {
        if !out.iter().any(|x| x == id) {
            out.push(id.to_string());
        }
    };
    if info.contains(&InfoKind::Social) {
        let top = world
            .artworks_by_filter(&ArtworkFilter::sorted(SortBy::Popularity, CANDIDATE_LIMIT))
            .expect("limit is positive");
        for a in top {
            push(&a.id, &mut out);
        }
    }
    if mentioned.is_empty() && info.contains(&InfoKind::Spatial) {
        let near = world
            .artworks_by_filter(&ArtworkFilter::sorted(
                SortBy::Distance(session.visitor_pos),
                CANDIDATE_LIMIT,
            ))
            .expect("limit is positive");
        for a in near {
            push(&a.id, &mut out);
        }
    }
    if mentioned.is_empty() && info.contains(&InfoKind::Semantic) {
        if let Some(id) = &session.landmark {
            push(id, &mut out);
        }
    }
    out
}

fn artwork_position_line(a: &Artwork) -> String {
    format!("{}: {} at {}", a.id, a.name, fmt_point(&a.position))
}

fn artwork_detail_line(a: &Artwork) -> String {
    let mut line = format!("{}: \"{}\" by {}, {}, {}.", a.id, a.name, a.author, a.year, a.style);
    if !a.description.is_empty() {
        line.push(' ');
        line.push_str(&a.description);
    }
    if !a.regions.is_empty() {
        let names: Vec<&str> = a.regions.iter().map(|r| r.name.as_str()).collect();
        line.push_str(&format!(" Regions: {}.", names.join("; ")));
    }
    line
}

/// Fills the prompt slots. Pure in its inputs, so scripted runs reproduce.
pub fn materialize(
    world: &MuseumWorld,
    stats: &VisitStats,
    session: &Session,
    stage: StageKind,
    info: &BTreeSet<InfoKind>,
    candidates: &[String],
) -> BTreeMap<String, String> {
    let arts: Vec<&Artwork> = candidates.iter().filter_map(|id| world.artwork(id)).collect();
    let mut slots = BTreeMap::new();
    slots.insert("visitor_position".to_string(), position_text(session));
    slots.insert("landmark".to_string(), landmark_text(session));
    slots.insert("history".to_string(), history_text(session));
    slots.insert("preferences".to_string(), preferences_text(session));
    slots.insert("stage".to_string(), stage.label().to_string());
    slots.insert(
        "target_position".to_string(),
        arts.first().map_or_else(|| "unknown".to_string(), |a| fmt_point(&a.position)),
    );

    let mut sections: Vec<String> = Vec::new();
    if let Some(tour) = &session.planned_tour {
        let text = id_list(tour);
        sections.push(format!("Planned tour: {text}"));
        slots.insert("planned_tour".to_string(), text);
    }
    if info.contains(&InfoKind::Spatial) {
        let lines: Vec<String> = arts.iter().map(|a| artwork_position_line(a)).collect();
        let text = lines.join("\n");
        sections.push(format!("Artwork positions:\n{text}"));
        slots.insert("artwork_positions".to_string(), text);
    }
    if info.contains(&InfoKind::Semantic) {
        let pool: Vec<&Artwork> = if arts.is_empty() {
            world.artworks.iter().collect()
        } else {
            arts.clone()
        };
        let text = pool.iter().map(|a| artwork_detail_line(a)).collect::<Vec<_>>().join("\n");
        let heading = if arts.is_empty() {
            format!("Collection ({} artworks):", world.artworks.len())
        } else {
            "Artwork details:".to_string()
        };
        sections.push(format!("{heading}\n{text}"));
        slots.insert("artwork_details".to_string(), text);
    }
    if info.contains(&InfoKind::Social) {
        let top = world
            .artworks_by_filter(&ArtworkFilter::sorted(SortBy::Popularity, CANDIDATE_LIMIT))
            .expect("limit is positive");
        let text = top
            .iter()
            .map(|a| {
                format!(
                    "{}: {}, popularity {}, visits {}",
                    a.id,
                    a.name,
                    fmt_coord(a.popularity),
                    stats.get(&a.id).unwrap_or(a.visit_count)
                )
            })
            .collect::<Vec<_>>()
            .join("\n");
        sections.push(format!("Most popular artworks:\n{text}"));
        slots.insert("popularity".to_string(), text);
    }
    slots.insert("related_info".to_string(), sections.join("\n\n"));
    slots
}

/// Runs classifier and compiler in sequence and builds the frame.
pub async fn identify_context(
    gateway: &Gateway,
    world: &MuseumWorld,
    stats: &VisitStats,
    session: &Session,
    utterance: &str,
) -> Result<ContextFrame, PipelineError> {
    let Classification { tasks, summary_intent } = classify(gateway, utterance, session).await?;
    let stage = infer_stage(session, summary_intent);
    let info = compile_info(gateway, utterance, &tasks, session).await?;
    let mentioned = mentioned_artworks(world, utterance);
    let candidates = candidate_artworks(world, session, &mentioned, &info);
    let related = materialize(world, stats, session, stage, &info, &candidates);
    Ok(ContextFrame {
        utterance: utterance.trim().to_string(),
        tasks,
        info,
        stage,
        related,
        summary_intent,
        mentioned,
        candidates,
    })
}
