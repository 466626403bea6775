//! One visitor turn end to end, plus the walking tick.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bots::{arbitrate, run_bot, BotError, BotResponse};
use crate::feedback::{compose, fallback, FallbackReason, FeedbackBundle, SPEECH_RATE};
use crate::gateway::{BotId, Gateway};
use crate::nav::{self, plan_path, signpost, MinimapState, NavError, SignpostState, Walk};
use crate::pipeline::{identify_context, ContextFrame, PipelineError};
use crate::session::{Session, SessionError};
use crate::world::{MuseumWorld, VisitStats};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GuideConfig {
    /// Walking speed, m/s.
    pub speed: f64,
    /// Narration speed for highlight timing, characters per second.
    pub speech_rate: f64,
}

impl Default for GuideConfig {
    fn default() -> Self {
        GuideConfig {
            speed: nav::DEFAULT_SPEED,
            speech_rate: SPEECH_RATE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TurnOutcome {
    pub frame: Option<ContextFrame>,
    pub bot: Option<BotId>,
    pub response: Option<BotResponse>,
    pub bundle: FeedbackBundle,
    /// Set when the bundle is a fallback.
    pub failure: Option<String>,
}

/// Positions after one tick of a walk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoseUpdate {
    pub guide: [f64; 2],
    pub visitor: [f64; 2],
    pub minimap: MinimapState,
    pub signpost: Option<SignpostState>,
    pub t: f64,
    /// Artwork reached on this tick, if any.
    pub arrival: Option<String>,
}

#[derive(Clone)]
pub struct TourGuide {
    pub world: Arc<MuseumWorld>,
    pub stats: Arc<VisitStats>,
    pub gateway: Gateway,
    pub config: GuideConfig,
}

impl std::fmt::Debug for TourGuide {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TourGuide").field("config", &self.config).finish_non_exhaustive()
    }
}

fn reason_for_pipeline(e: &PipelineError) -> FallbackReason {
    match e {
        PipelineError::Gateway(g) => FallbackReason::Backend(g.to_string()),
        other => FallbackReason::Other(other.to_string()),
    }
}

fn reason_for_bot(e: &BotError) -> FallbackReason {
    match e {
        BotError::Gateway(g) => FallbackReason::Backend(g.to_string()),
        BotError::Repair(r) => FallbackReason::Unparseable(r.raw.clone()),
        BotError::NoResolvableTarget(what) => FallbackReason::NoResolvableTarget(what.clone()),
        other => FallbackReason::Other(other.to_string()),
    }
}

impl TourGuide {
    pub fn new(world: Arc<MuseumWorld>, gateway: Gateway, config: GuideConfig) -> Self {
        let stats = Arc::new(VisitStats::new(&world));
        TourGuide {
            world,
            stats,
            gateway,
            config,
        }
    }

    pub fn with_stats(mut self, stats: Arc<VisitStats>) -> Self {
        self.stats = stats;
        self
    }

    pub fn new_session(&self, id: impl Into<String>) -> Session {
        Session::new(id, self.world.spawn)
    }

    /// Handles one utterance. Any failure along the way yields a C1 fallback
    /// bundle rather than an error; the turn is always logged.
    pub async fn handle_utterance(&self, session: &mut Session, utterance: &str) -> TurnOutcome {
        let world = self.world.as_ref();
        // a new request interrupts any walk in progress
        session.stop_walking();
        session.record_utterance(world, utterance);

        let frame = match identify_context(&self.gateway, world, &self.stats, session, utterance).await {
            Ok(f) => f,
            Err(e) => return self.fail(session, utterance, None, None, reason_for_pipeline(&e), e.to_string()),
        };
        let bot = arbitrate(&frame.tasks);
        let resp = match run_bot(bot, &self.gateway, &frame, session, world).await {
            Ok(r) => r,
            Err(e) => return self.fail(session, utterance, Some(frame), Some(bot), reason_for_bot(&e), e.to_string()),
        };

        let planned = resp
            .tours
            .clone()
            .filter(|t| t.len() >= 2 && matches!(bot, BotId::Explorer | BotId::Navigator));
        if bot == BotId::Navigator {
            let stops = resp.tours.clone().unwrap_or_default();
            if let Err(e) = self.start_walk(session, &stops) {
                let reason = FallbackReason::NoResolvableTarget(frame.utterance.clone());
                return self.fail(session, utterance, Some(frame), Some(bot), reason, e.to_string());
            }
        }
        let bundle = compose(utterance, bot, &resp, session, world, self.config.speech_rate);
        session.record_feedback(world, bundle.combo.as_str(), &bundle.voice, planned);
        TurnOutcome {
            frame: Some(frame),
            bot: Some(bot),
            response: Some(resp),
            bundle,
            failure: None,
        }
    }

    fn fail(
        &self,
        session: &mut Session,
        utterance: &str,
        frame: Option<ContextFrame>,
        bot: Option<BotId>,
        reason: FallbackReason,
        detail: String,
    ) -> TurnOutcome {
        tracing::warn!(session = session.id.as_str(), failure = detail.as_str(), "turn degraded to fallback");
        let bundle = fallback(utterance, &reason);
        session.record_feedback(&self.world, bundle.combo.as_str(), &bundle.voice, None);
        TurnOutcome {
            frame,
            bot,
            response: None,
            bundle,
            failure: Some(detail),
        }
    }

    /// Starts walking to the first stop; the rest are queued.
    pub fn start_walk(&self, session: &mut Session, stops: &[String]) -> Result<(), NavError> {
        let (first, rest) = stops
            .split_first()
            .ok_or_else(|| NavError::Unreachable("empty tour".into()))?;
        let art = self
            .world
            .artwork(first)
            .ok_or_else(|| NavError::Unreachable(first.clone()))?;
        let path = plan_path(&self.world, session.visitor_pos, art)?;
        session.stop_walking();
        session.walk = Some(Walk::new(first.clone(), path));
        session.pending_stops = rest.iter().cloned().collect();
        Ok(())
    }

    /// Advances an active walk by `dt`. Returns `None` when not walking.
    /// On arrival the visit is recorded and the next queued stop, if any,
    /// starts on the same tick.
    pub fn tick(&self, session: &mut Session, dt: f64) -> Result<Option<PoseUpdate>, SessionError> {
        let Some(walk) = &session.walk else {
            return Ok(None);
        };
        let dest = walk.destination.clone();
        let step = match nav::advance(session, dt, self.config.speed) {
            Ok(s) => s,
            Err(e) => {
                tracing::warn!(error = %e, "walk step rejected");
                return Ok(None);
            }
        };
        let mut arrival = None;
        if step.arrived {
            let pending = std::mem::take(&mut session.pending_stops);
            session.record_arrival(&self.world, &self.stats, &dest)?;
            arrival = Some(dest.clone());
            let rest: Vec<String> = pending.into_iter().collect();
            if !rest.is_empty() {
                if let Err(e) = self.start_walk(session, &rest) {
                    tracing::warn!(error = %e, "could not continue the tour");
                }
            }
        }
        let signpost_to = session.walk.as_ref().and_then(|w| self.world.artwork(&w.destination));
        Ok(Some(PoseUpdate {
            guide: session.guide_pos,
            visitor: session.visitor_pos,
            minimap: nav::minimap(&self.world, session),
            signpost: signpost_to.and_then(|a| signpost(session.visitor_pos, a.floor_position()).ok()),
            t: session.clock,
            arrival,
        }))
    }
}
