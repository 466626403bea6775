//! Multi-modal feedback bundles and the C1 to C5 channel combinations.

use serde::{Deserialize, Serialize};

use crate::bots::BotResponse;
use crate::gateway::BotId;
use crate::nav::{minimap, signpost, MinimapState, SignpostState};
use crate::pipeline::mention_offset;
use crate::session::Session;
use crate::text::{normalize_name, sentences};
use crate::world::{MuseumWorld, Rect};

pub const BUNDLE_SCHEMA: u32 = 1;
/// Narration speed used to time highlight reveals, characters per second.
pub const SPEECH_RATE: f64 = 15.0;
pub const FALLBACK_VOICE: &str = "I did not catch that — could you ask again?";
pub const TEXT_WINDOW_PLACEMENT: &str = "front_right";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ComboId {
    /// Voice and avatar.
    C1,
    /// Adds the text window.
    C2,
    /// Text window and region highlights.
    C3,
    /// Text window and virtual screen.
    C4,
    /// Minimap and signpost while walking.
    C5,
}

impl ComboId {
    pub const ALL: [ComboId; 5] = [ComboId::C1, ComboId::C2, ComboId::C3, ComboId::C4, ComboId::C5];

    pub fn as_str(self) -> &'static str {
        match self {
            ComboId::C1 => "C1",
            ComboId::C2 => "C2",
            ComboId::C3 => "C3",
            ComboId::C4 => "C4",
            ComboId::C5 => "C5",
        }
    }
}

impl std::fmt::Display for ComboId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ComboId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ComboId::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown combination `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "pose", rename_all = "lowercase")]
pub enum Pose {
    Idle,
    Speak,
    Point { target: String },
    Walk,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AvatarAction {
    #[serde(flatten)]
    pub pose: Pose,
    pub face_visitor: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TextWindow {
    pub text: String,
    pub placement: String,
    pub translucent: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HighlightColor {
    DarkRed,
    Red,
    Orange,
}

impl HighlightColor {
    pub fn for_tier(tier: u8) -> Self {
        match tier {
            3.. => HighlightColor::DarkRed,
            2 => HighlightColor::Red,
            _ => HighlightColor::Orange,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Highlight {
    pub artwork: String,
    pub region: String,
    pub rect: Rect,
    pub tier: u8,
    pub color: HighlightColor,
    /// Seconds after narration starts.
    pub reveal_at: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackBundle {
    pub schema: u32,
    pub combo: ComboId,
    pub voice: String,
    pub avatar: AvatarAction,
    pub text_window: Option<TextWindow>,
    pub highlights: Option<Vec<Highlight>>,
    pub virtual_screen: Option<Vec<String>>,
    pub minimap: Option<MinimapState>,
    pub signpost: Option<SignpostState>,
    /// The visitor's utterance, shown until feedback renders.
    pub echo: String,
}

impl FeedbackBundle {
    /// Names of the channels carried, voice and avatar included.
    pub fn channels(&self) -> Vec<&'static str> {
        let mut out = vec!["voice", "avatar"];
        if self.text_window.is_some() {
            out.push("text_window");
        }
        if self.highlights.is_some() {
            out.push("highlights");
        }
        if self.virtual_screen.is_some() {
            out.push("virtual_screen");
        }
        if self.minimap.is_some() {
            out.push("minimap");
        }
        if self.signpost.is_some() {
            out.push("signpost");
        }
        out
    }
}

/// Channels each combination must carry, voice and avatar included.
pub fn expected_channels(combo: ComboId) -> &'static [&'static str] {
    match combo {
        ComboId::C1 => &["voice", "avatar"],
        ComboId::C2 => &["voice", "avatar", "text_window"],
        ComboId::C3 => &["voice", "avatar", "text_window", "highlights"],
        ComboId::C4 => &["voice", "avatar", "text_window", "virtual_screen"],
        ComboId::C5 => &["voice", "avatar", "minimap", "signpost"],
    }
}

/// Regions win over foreign tours when both are present.
pub fn select_combo(bot: BotId, resp: &BotResponse, landmark: Option<&str>) -> ComboId {
    match bot {
        BotId::Navigator => ComboId::C5,
        BotId::Identifier => ComboId::C1,
        _ if resp.regions.as_ref().is_some_and(|r| !r.is_empty()) => ComboId::C3,
        _ if resp
            .tours
            .as_ref()
            .is_some_and(|t| t.iter().any(|id| Some(id.as_str()) != landmark)) =>
        {
            ComboId::C4
        }
        _ => ComboId::C2,
    }
}

fn char_offset(text: &str, byte: usize) -> usize {
    text[..byte].chars().count()
}

/// Position of the first case-insensitive mention of `needle` in `voice`,
/// counted in characters.
fn first_mention(voice: &str, needle: &str) -> Option<usize> {
    let lower = voice.to_lowercase();
    let needle = needle.to_lowercase();
    if lower.len() != voice.len() {
        // lowercasing changed byte lengths; fall back to a char-wise scan
        let v: Vec<char> = lower.chars().collect();
        let n: Vec<char> = needle.chars().collect();
        return (0..=v.len().saturating_sub(n.len())).find(|&i| v[i..].starts_with(&n));
    }
    lower.find(&needle).map(|b| char_offset(voice, b))
}

pub fn highlights(
    world: &MuseumWorld,
    artwork: &str,
    resp: &BotResponse,
    voice: &str,
    speech_rate: f64,
) -> Vec<Highlight> {
    let Some(art) = world.artwork(artwork) else {
        return Vec::new();
    };
    let end = voice.chars().count();
    let mut out: Vec<Highlight> = resp
        .regions
        .iter()
        .flatten()
        .filter_map(|r| {
            let region = art.region(&r.name)?;
            let at = first_mention(voice, &region.name).unwrap_or(end);
            Some(Highlight {
                artwork: art.id.clone(),
                region: region.name.clone(),
                rect: region.rect,
                tier: r.importance,
                color: HighlightColor::for_tier(r.importance),
                reveal_at: at as f64 / speech_rate,
            })
        })
        .collect();
    out.sort_by(|a, b| a.reveal_at.total_cmp(&b.reveal_at));
    out
}

/// Tours ordered by their first mention in `text`; unmentioned ones keep
/// the bot's order after the mentioned ones.
pub fn screen_order(world: &MuseumWorld, tours: &[String], text: &str) -> Vec<String> {
    let hay = normalize_name(text);
    let mut keyed: Vec<(usize, usize, &String)> = tours
        .iter()
        .enumerate()
        .map(|(i, id)| {
            let at = world
                .artwork(id)
                .and_then(|a| mention_offset(&hay, a))
                .unwrap_or(usize::MAX);
            (at, i, id)
        })
        .collect();
    keyed.sort();
    keyed.into_iter().map(|(_, _, id)| id.clone()).collect()
}

fn text_window(text: String) -> TextWindow {
    TextWindow {
        text,
        placement: TEXT_WINDOW_PLACEMENT.into(),
        translucent: true,
    }
}

fn artwork_card(world: &MuseumWorld, id: &str) -> Option<String> {
    let a = world.artwork(id)?;
    Some(format!("{}\n{}, {}\n{}", a.name, a.author, a.year, a.style))
}

/// Builds the bundle for a validated response. For C5 the session must
/// already be walking so the minimap and signpost reflect the walk.
pub fn compose(
    utterance: &str,
    bot: BotId,
    resp: &BotResponse,
    session: &Session,
    world: &MuseumWorld,
    speech_rate: f64,
) -> FeedbackBundle {
    let combo = select_combo(bot, resp, session.landmark.as_deref());
    let focus = session.landmark.clone().or_else(|| resp.landmark.clone());
    let voice = match combo {
        ComboId::C5 => sentences(&resp.response).into_iter().take(2).collect::<Vec<_>>().join(" "),
        _ => resp.response.clone(),
    };
    let voice = if voice.trim().is_empty() { FALLBACK_VOICE.to_string() } else { voice };

    let about_landmark = session.landmark.is_some() && (resp.landmark == session.landmark || combo == ComboId::C3);
    let avatar = match combo {
        ComboId::C5 => AvatarAction {
            pose: Pose::Walk,
            face_visitor: false,
        },
        ComboId::C1 => AvatarAction {
            pose: Pose::Speak,
            face_visitor: true,
        },
        _ if about_landmark => AvatarAction {
            pose: Pose::Point {
                target: session.landmark.clone().expect("checked above"),
            },
            face_visitor: true,
        },
        _ => AvatarAction {
            pose: Pose::Speak,
            face_visitor: true,
        },
    };

    let window_text = || {
        resp.context
            .clone()
            .filter(|c| !c.trim().is_empty())
            .or_else(|| focus.as_deref().and_then(|id| artwork_card(world, id)))
            .or_else(|| sentences(&voice).first().map(|s| s.to_string()))
            .unwrap_or_else(|| voice.clone())
    };

    let mut bundle = FeedbackBundle {
        schema: BUNDLE_SCHEMA,
        combo,
        voice: voice.clone(),
        avatar,
        text_window: None,
        highlights: None,
        virtual_screen: None,
        minimap: None,
        signpost: None,
        echo: utterance.to_string(),
    };
    match combo {
        ComboId::C1 => {}
        ComboId::C2 => bundle.text_window = Some(text_window(window_text())),
        ComboId::C3 => {
            bundle.text_window = Some(text_window(window_text()));
            let artwork = focus.as_deref().unwrap_or_default();
            bundle.highlights = Some(highlights(world, artwork, resp, &voice, speech_rate));
        }
        ComboId::C4 => {
            let text = window_text();
            let tours = resp.tours.clone().unwrap_or_default();
            bundle.virtual_screen = Some(screen_order(world, &tours, &text));
            bundle.text_window = Some(text_window(text));
        }
        ComboId::C5 => {
            bundle.minimap = Some(minimap(world, session));
            let dest = session
                .walk
                .as_ref()
                .map(|w| w.destination.as_str())
                .or_else(|| resp.tours.as_ref().and_then(|t| t.first()).map(String::as_str))
                .and_then(|id| world.artwork(id));
            bundle.signpost = Some(match dest {
                Some(a) => signpost(session.visitor_pos, a.floor_position()).unwrap_or(SignpostState {
                    bearing: 0.0,
                    distance: 0.0,
                }),
                None => SignpostState {
                    bearing: 0.0,
                    distance: 0.0,
                },
            });
        }
    }
    bundle
}

/// Why a turn could not be answered normally.
#[derive(Debug, Clone, PartialEq)]
pub enum FallbackReason {
    /// Backend unreachable, timed out or had no answer.
    Backend(String),
    /// The reply could not be parsed; carries the raw text.
    Unparseable(String),
    /// The navigator could not ground a destination.
    NoResolvableTarget(String),
    Other(String),
}

/// Prose that can be spoken as is: no JSON debris and of a sane length.
fn salvageable(raw: &str) -> Option<&str> {
    let t = raw.trim();
    let ok = !t.is_empty() && t.len() <= 1000 && !t.contains(['{', '}', '[', ']']) && !t.contains("```");
    ok.then_some(t)
}

pub fn fallback(utterance: &str, reason: &FallbackReason) -> FeedbackBundle {
    let voice = match reason {
        FallbackReason::Unparseable(raw) => salvageable(raw).unwrap_or(FALLBACK_VOICE).to_string(),
        FallbackReason::NoResolvableTarget(what) => {
            format!("Sorry, I could not find where to take you for \"{}\". Could you name the artwork?", what.trim())
        }
        FallbackReason::Backend(_) | FallbackReason::Other(_) => FALLBACK_VOICE.to_string(),
    };
    FeedbackBundle {
        schema: BUNDLE_SCHEMA,
        combo: ComboId::C1,
        voice,
        avatar: AvatarAction {
            pose: Pose::Speak,
            face_visitor: true,
        },
        text_window: None,
        highlights: None,
        virtual_screen: None,
        minimap: None,
        signpost: None,
        echo: utterance.to_string(),
    }
}
