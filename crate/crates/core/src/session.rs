//! Per-visitor tour state and the replayable event log behind it.

use std::collections::VecDeque;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::nav::Walk;
use crate::world::{MuseumWorld, Vec2, VisitStats};

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("unknown artwork `{0}`")]
    UnknownArtwork(String),
    #[error("preference statement is empty")]
    EmptyStatement,
    #[error("event log line {line}: {source}")]
    Log {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("event log io: {0}")]
    Io(#[from] std::io::Error),
}

/// Visit phase used to differentiate prompts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageKind {
    Beginning,
    InProgress,
    Ending,
}

impl StageKind {
    pub fn label(self) -> &'static str {
        match self {
            StageKind::Beginning => "beginning",
            StageKind::InProgress => "in progress",
            StageKind::Ending => "ending",
        }
    }

    /// Scope tag used by stage-conditional prompt constraints.
    pub fn scope(self) -> &'static str {
        match self {
            StageKind::Beginning => "beginning",
            StageKind::InProgress => "in_progress",
            StageKind::Ending => "ending",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Speaker {
    Visitor,
    Guide,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Turn {
    pub speaker: Speaker,
    pub text: String,
}

/// One line of the session event log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionEvent {
    pub t: f64,
    #[serde(flatten)]
    pub kind: EventKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "ev", rename_all = "lowercase")]
pub enum EventKind {
    Utterance {
        text: String,
    },
    Arrival {
        artwork: String,
        position: Vec2,
    },
    Preference {
        statement: String,
    },
    Feedback {
        combo: String,
        voice: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        planned_tour: Option<Vec<String>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub id: String,
    pub visitor_pos: Vec2,
    pub guide_pos: Vec2,
    /// Artwork currently being viewed.
    pub landmark: Option<String>,
    /// Visited artwork ids, append-only.
    pub history: Vec<String>,
    pub preferences: Vec<String>,
    pub planned_tour: Option<Vec<String>>,
    pub conversation: Vec<Turn>,
    pub clock: f64,
    /// Active walk; `Some` exactly while walking.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub walk: Option<Walk>,
    /// Remaining stops of a multi-stop walk, in visiting order.
    #[serde(default)]
    pub pending_stops: VecDeque<String>,
    /// Recent visitor positions while walking, oldest first.
    #[serde(default)]
    pub trail: VecDeque<Vec2>,
    #[serde(default)]
    pub log: Vec<SessionEvent>,
}

impl Session {
    pub fn new(id: impl Into<String>, spawn: Vec2) -> Self {
        Session {
            id: id.into(),
            visitor_pos: spawn,
            guide_pos: spawn,
            landmark: None,
            history: Vec::new(),
            preferences: Vec::new(),
            planned_tour: None,
            conversation: Vec::new(),
            clock: 0.0,
            walk: None,
            pending_stops: VecDeque::new(),
            trail: VecDeque::new(),
            log: Vec::new(),
        }
    }

    pub fn is_walking(&self) -> bool {
        self.walk.is_some()
    }

    /// Drops the active walk and any remaining stops; hides the trail.
    pub fn stop_walking(&mut self) {
        self.walk = None;
        self.pending_stops.clear();
        self.trail.clear();
    }

    /// Applies an event and appends it to the log. All persistent state
    /// changes go through here so that the log replays to the same session.
    pub fn apply(&mut self, world: &MuseumWorld, event: SessionEvent) -> Result<(), SessionError> {
        match &event.kind {
            EventKind::Utterance { text } => self.conversation.push(Turn {
                speaker: Speaker::Visitor,
                text: text.clone(),
            }),
            EventKind::Arrival { artwork, position } => {
                if !world.contains(artwork) {
                    return Err(SessionError::UnknownArtwork(artwork.clone()));
                }
                self.visitor_pos = *position;
                self.landmark = Some(artwork.clone());
                if self.history.last() != Some(artwork) {
                    self.history.push(artwork.clone());
                }
                self.stop_walking();
            }
            EventKind::Preference { statement } => {
                if statement.trim().is_empty() {
                    return Err(SessionError::EmptyStatement);
                }
                self.preferences.push(statement.clone());
            }
            EventKind::Feedback {
                voice, planned_tour, ..
            } => {
                self.conversation.push(Turn {
                    speaker: Speaker::Guide,
                    text: voice.clone(),
                });
                if let Some(tour) = planned_tour {
                    self.planned_tour = Some(tour.clone());
                }
            }
        }
        self.clock = self.clock.max(event.t);
        self.log.push(event);
        Ok(())
    }

    fn event(&self, kind: EventKind) -> SessionEvent {
        SessionEvent { t: self.clock, kind }
    }

    pub fn record_utterance(&mut self, world: &MuseumWorld, text: &str) {
        let ev = self.event(EventKind::Utterance { text: text.to_string() });
        self.apply(world, ev).expect("utterance events always apply");
    }

    pub fn record_feedback(
        &mut self,
        world: &MuseumWorld,
        combo: &str,
        voice: &str,
        planned_tour: Option<Vec<String>>,
    ) {
        let ev = self.event(EventKind::Feedback {
            combo: combo.to_string(),
            voice: voice.to_string(),
            planned_tour,
        });
        self.apply(world, ev).expect("feedback events always apply");
    }

    /// Marks the visitor as standing at `artwork_id` and bumps its visit count.
    pub fn record_arrival(
        &mut self,
        world: &MuseumWorld,
        stats: &VisitStats,
        artwork_id: &str,
    ) -> Result<(), SessionError> {
        let position = world
            .viewing_point(artwork_id)
            .ok_or_else(|| SessionError::UnknownArtwork(artwork_id.to_string()))?;
        let position = if self.is_walking() { self.visitor_pos } else { position };
        let ev = self.event(EventKind::Arrival {
            artwork: artwork_id.to_string(),
            position,
        });
        self.apply(world, ev)?;
        stats.increment(artwork_id);
        Ok(())
    }

    pub fn add_preference(&mut self, world: &MuseumWorld, statement: &str) -> Result<(), SessionError> {
        let ev = self.event(EventKind::Preference {
            statement: statement.to_string(),
        });
        self.apply(world, ev)
    }

    /// Rebuilds a session by folding an event log over a fresh session.
    pub fn replay(
        id: impl Into<String>,
        world: &MuseumWorld,
        events: impl IntoIterator<Item = SessionEvent>,
    ) -> Result<Self, SessionError> {
        let mut session = Session::new(id, world.spawn);
        for ev in events {
            session.apply(world, ev)?;
        }
        Ok(session)
    }

    pub fn write_log(&self, mut out: impl Write) -> Result<(), SessionError> {
        for ev in &self.log {
            serde_json::to_writer(&mut out, ev).map_err(|e| SessionError::Io(e.into()))?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

pub fn read_log(input: impl BufRead) -> Result<Vec<SessionEvent>, SessionError> {
    let mut events = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        events.push(serde_json::from_str(&line).map_err(|source| SessionError::Log { line: i + 1, source })?);
    }
    Ok(events)
}

/// Beginning with no history; Ending on a summary request or once every
/// planned stop has been visited; otherwise in progress.
pub fn infer_stage(session: &Session, summary_intent: bool) -> StageKind {
    if session.history.is_empty() {
        return StageKind::Beginning;
    }
    let tour_complete = session
        .planned_tour
        .as_ref()
        .is_some_and(|tour| tour.iter().all(|id| session.history.contains(id)));
    if summary_intent || tour_complete {
        StageKind::Ending
    } else {
        StageKind::InProgress
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::tiny_world;

    #[test]
    fn stage_cases() {
        let mut s = Session::new("s", [0.0, 0.0]);
        assert_eq!(infer_stage(&s, false), StageKind::Beginning);
        assert_eq!(infer_stage(&s, true), StageKind::Beginning);
        s.history = vec!["painting 005".into(), "painting 003".into(), "painting 000".into()];
        assert_eq!(infer_stage(&s, true), StageKind::Ending);
        s.history = vec!["painting 007".into()];
        assert_eq!(infer_stage(&s, false), StageKind::InProgress);
    }

    #[test]
    fn stage_enumeration() {
        for history_empty in [true, false] {
            for summary in [true, false] {
                for complete in [true, false] {
                    let mut s = Session::new("s", [0.0, 0.0]);
                    if !history_empty {
                        s.history.push("a".into());
                    }
                    s.planned_tour = Some(if complete {
                        s.history.clone()
                    } else {
                        vec!["zzz".into()]
                    });
                    let expected = if history_empty {
                        StageKind::Beginning
                    } else if summary || complete {
                        StageKind::Ending
                    } else {
                        StageKind::InProgress
                    };
                    assert_eq!(infer_stage(&s, summary), expected, "{history_empty} {summary} {complete}");
                }
            }
        }
    }

    #[test]
    fn arrival_appends_and_skips_consecutive_duplicates() {
        let world = tiny_world();
        let stats = VisitStats::new(&world);
        let mut s = Session::new("s", world.spawn);
        s.history = vec!["painting 001".into()];
        s.record_arrival(&world, &stats, "painting 000").unwrap();
        assert_eq!(s.history, vec!["painting 001", "painting 000"]);
        assert_eq!(s.landmark.as_deref(), Some("painting 000"));
        s.record_arrival(&world, &stats, "painting 000").unwrap();
        assert_eq!(s.history, vec!["painting 001", "painting 000"]);
        assert_eq!(stats.get("painting 000"), Some(2));
        assert!(matches!(
            s.record_arrival(&world, &stats, "painting 999"),
            Err(SessionError::UnknownArtwork(id)) if id == "painting 999"
        ));
        assert!(!s.is_walking());
    }

    #[test]
    fn preferences_keep_order_and_reject_empty() {
        let world = tiny_world();
        let mut s = Session::new("s", world.spawn);
        s.add_preference(&world, "I really like Chinese paintings").unwrap();
        s.add_preference(&world, "show me Picasso paintings first").unwrap();
        assert_eq!(
            s.preferences,
            vec!["I really like Chinese paintings", "show me Picasso paintings first"]
        );
        assert!(matches!(s.add_preference(&world, ""), Err(SessionError::EmptyStatement)));
        assert_eq!(s.preferences.len(), 2);
    }

    #[test]
    fn log_round_trip_replays_identically() {
        let world = tiny_world();
        let stats = VisitStats::new(&world);
        let mut s = Session::new("s", world.spawn);
        s.record_utterance(&world, "hello");
        s.clock = 3.5;
        s.record_arrival(&world, &stats, "painting 001").unwrap();
        s.add_preference(&world, "quiet rooms").unwrap();
        s.record_feedback(&world, "C4", "Here you go.", Some(vec!["painting 000".into(), "painting 001".into()]));

        let mut buf = Vec::new();
        s.write_log(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.lines().next().unwrap().contains(r#""ev":"utterance""#));
        let events = read_log(buf.as_slice()).unwrap();
        let replayed = Session::replay("s", &world, events).unwrap();
        assert_eq!(replayed, s);
    }
}
