//! Transcript replay: runs each turn through the pipeline and checks the
//! structural expectations recorded next to it.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Deserializer};
use thiserror::Error;
use wander_core::feedback::ComboId;
use wander_core::gateway::{BotId, Gateway, PromptSet, ScriptedBackend};
use wander_core::session::infer_stage;
use wander_core::world::VisitStats;
use wander_core::{GuideConfig, MuseumWorld, TourGuide};

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("cannot read transcript {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed transcript: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    World(#[from] wander_core::world::WorldError),
    #[error(transparent)]
    Rules(#[from] wander_core::gateway::RuleError),
    #[error("turn {turn}: bad setup: {reason}")]
    Setup { turn: usize, reason: String },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Transcript {
    /// Paths are relative to the transcript file.
    #[serde(default)]
    pub museum: Option<PathBuf>,
    #[serde(default)]
    pub rules: Option<PathBuf>,
    #[serde(default)]
    pub turns: Vec<TranscriptTurn>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TranscriptTurn {
    pub utterance: String,
    #[serde(default)]
    pub setup: Setup,
    pub expect: Expect,
}

/// Session state before the turn. Every turn starts from a fresh session.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Setup {
    /// Arrivals replayed in order; the last one becomes the landmark.
    #[serde(default)]
    pub visited: Vec<String>,
    #[serde(default)]
    pub planned_tour: Option<Vec<String>>,
    /// Expected stage (`beginning`, `in_progress` or `ending`), checked
    /// after the turn.
    #[serde(default)]
    pub stage: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expect {
    pub combo: Option<ComboId>,
    #[serde(default)]
    pub bot: Option<BotId>,
    #[serde(default)]
    pub tours: Option<Vec<String>>,
    /// `null` asserts that no landmark was returned.
    #[serde(default, deserialize_with = "present")]
    pub landmark: Option<Option<String>>,
    #[serde(default)]
    pub suggestion: Option<Vec<String>>,
}

fn present<'de, D: Deserializer<'de>, T: Deserialize<'de>>(d: D) -> Result<Option<T>, D::Error> {
    T::deserialize(d).map(Some)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TurnReport {
    pub index: usize,
    pub utterance: String,
    /// One line per failed expectation: `field: expected X, got Y`.
    pub mismatches: Vec<String>,
}

impl TurnReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplayReport {
    pub turns: Vec<TurnReport>,
}

impl ReplayReport {
    pub fn passed(&self) -> usize {
        self.turns.iter().filter(|t| t.passed()).count()
    }

    pub fn all_passed(&self) -> bool {
        self.passed() == self.turns.len()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for t in &self.turns {
            let mark = if t.passed() { "PASS" } else { "FAIL" };
            out.push_str(&format!("turn {}: {mark}  {}\n", t.index + 1, t.utterance));
            for m in &t.mismatches {
                out.push_str(&format!("    {m}\n"));
            }
        }
        out.push_str(&format!("{}/{} turns passed\n", self.passed(), self.turns.len()));
        out
    }
}

impl Transcript {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ReplayError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ReplayError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Ok(serde_json::from_str(&text)?)
    }
}

fn show<T: std::fmt::Debug>(v: &T) -> String {
    format!("{v:?}")
}

/// Replays `transcript` against `guide`.
pub async fn run(guide: &TourGuide, transcript: &Transcript) -> Result<ReplayReport, ReplayError> {
    let mut turns = Vec::new();
    for (index, turn) in transcript.turns.iter().enumerate() {
        let mut session = guide.new_session(format!("replay-{}", index + 1));
        for id in &turn.setup.visited {
            session
                .record_arrival(&guide.world, &guide.stats, id)
                .map_err(|e| ReplayError::Setup {
                    turn: index + 1,
                    reason: e.to_string(),
                })?;
        }
        session.planned_tour = turn.setup.planned_tour.clone();
        let outcome = guide.handle_utterance(&mut session, &turn.utterance).await;

        let mut mismatches = Vec::new();
        let mut check = |field: &str, want: String, got: String| {
            if want != got {
                mismatches.push(format!("{field}: expected {want}, got {got}"));
            }
        };
        let e = &turn.expect;
        if let Some(c) = e.combo {
            check("combo", c.to_string(), outcome.bundle.combo.to_string());
        }
        if let Some(b) = e.bot {
            check("bot", show(&Some(b)), show(&outcome.bot));
        }
        let resp = outcome.response.as_ref();
        if let Some(t) = &e.tours {
            check("tours", show(&Some(t)), show(&resp.and_then(|r| r.tours.as_ref())));
        }
        if let Some(l) = &e.landmark {
            check("landmark", show(l), show(&resp.and_then(|r| r.landmark.clone())));
        }
        if let Some(s) = &e.suggestion {
            let got = resp.map(|r| r.suggestions(&session.history)).unwrap_or_default();
            check("suggestion", show(s), show(&got));
        }
        if let Some(stage) = &turn.setup.stage {
            let got = outcome
                .frame
                .as_ref()
                .map(|f| f.stage.scope().to_string())
                .unwrap_or_else(|| infer_stage(&session, false).scope().to_string());
            check("stage", stage.clone(), got);
        }
        if let Some(f) = &outcome.failure {
            mismatches.push(format!("turn degraded: {f}"));
        }
        turns.push(TurnReport {
            index,
            utterance: turn.utterance.clone(),
            mismatches,
        });
    }
    Ok(ReplayReport { turns })
}

/// Loads a transcript with its museum and scripted rules, then replays it.
/// `museum` and `rules` override the paths named in the file.
pub async fn replay_file(
    path: impl AsRef<Path>,
    museum: Option<&Path>,
    rules: Option<&Path>,
) -> Result<ReplayReport, ReplayError> {
    let path = path.as_ref();
    let transcript = Transcript::load(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let museum = museum
        .map(Path::to_path_buf)
        .or_else(|| transcript.museum.as_ref().map(|m| base.join(m)))
        .unwrap_or_else(|| base.join("museum35.json"));
    let rules = rules
        .map(Path::to_path_buf)
        .or_else(|| transcript.rules.as_ref().map(|r| base.join(r)))
        .unwrap_or_else(|| base.join("scripted_rules.json"));
    let world = Arc::new(MuseumWorld::load(museum)?);
    let gateway = Gateway::new(Arc::new(ScriptedBackend::from_file(rules)?), PromptSet::builtin());
    let stats = Arc::new(VisitStats::new(&world));
    let guide = TourGuide::new(world, gateway, GuideConfig::default()).with_stats(stats);
    run(&guide, &transcript).await
}
