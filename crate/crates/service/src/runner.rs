//! Per-session state machine between the socket and the tour guide.
//!
//! The runner never awaits a gateway call itself. [`SessionRunner::begin`]
//! hands out a [`TurnJob`] that works on a copy of the session; the caller
//! runs it wherever it likes and feeds the result back through
//! [`SessionRunner::finish`]. Ticks keep flowing in between.

use std::sync::Arc;

use wander_core::engine::TurnOutcome;
use wander_core::session::Session;
use wander_core::TourGuide;

use crate::protocol::{parse_request, Rejected, Request, WireMessage};

pub struct SessionRunner {
    guide: Arc<TourGuide>,
    session: Session,
    out_seq: u64,
    last_in: Option<u64>,
    in_flight: Option<u64>,
}

/// One pipeline run detached from the runner.
pub struct TurnJob {
    pub re: u64,
    utterance: String,
    guide: Arc<TourGuide>,
    session: Session,
}

pub struct TurnDone {
    pub re: u64,
    session: Session,
    pub outcome: TurnOutcome,
}

impl TurnJob {
    pub async fn run(mut self: Box<Self>) -> TurnDone {
        let outcome = self.guide.handle_utterance(&mut self.session, &self.utterance).await;
        TurnDone {
            re: self.re,
            session: self.session,
            outcome,
        }
    }
}

/// What the caller should do with an inbound frame.
pub enum Inbound {
    /// Send these right away; nothing else to do.
    Reply(Vec<WireMessage>),
    /// Send `notices` (possibly a supersede error), then run `job`.
    Turn { notices: Vec<WireMessage>, job: Box<TurnJob> },
}

impl SessionRunner {
    pub fn new(guide: Arc<TourGuide>, id: impl Into<String>) -> Self {
        let session = guide.new_session(id);
        SessionRunner {
            guide,
            session,
            out_seq: 0,
            last_in: None,
            in_flight: None,
        }
    }

    pub fn session(&self) -> &Session {
        &self.session
    }

    fn next_seq(&mut self) -> u64 {
        self.out_seq += 1;
        self.out_seq
    }

    pub fn hello(&mut self) -> WireMessage {
        WireMessage::Hello {
            seq: self.next_seq(),
            session: self.session.id.clone(),
            spawn: self.session.visitor_pos,
        }
    }

    fn error(&mut self, re: Option<u64>, reason: impl Into<String>) -> WireMessage {
        WireMessage::Error {
            seq: self.next_seq(),
            re,
            reason: reason.into(),
        }
    }

    /// Parses a client frame and starts a turn when it asks for one.
    pub fn accept(&mut self, text: &str) -> Inbound {
        let req = match parse_request(text) {
            Ok(r) => r,
            Err(Rejected { re, reason }) => return Inbound::Reply(vec![self.error(re, reason)]),
        };
        let seq = req.seq();
        if self.last_in.is_some_and(|last| seq <= last) {
            let reason = format!("seq {seq} does not increase");
            return Inbound::Reply(vec![self.error(Some(seq), reason)]);
        }
        self.last_in = Some(seq);

        let utterance = match req {
            Request::Utterance { text, .. } => text,
            Request::Select { artwork, .. } => match self.guide.world.find_artwork(&artwork) {
                Some(a) => format!("introduce {}", a.name),
                None => {
                    let reason = format!("unknown artwork `{artwork}`");
                    return Inbound::Reply(vec![self.error(Some(seq), reason)]);
                }
            },
        };
        let mut notices = Vec::new();
        if let Some(old) = self.in_flight.take() {
            notices.push(self.error(Some(old), "superseded by a newer request"));
        }
        // the walk stops now, not when the answer arrives
        self.session.stop_walking();
        self.in_flight = Some(seq);
        let job = Box::new(TurnJob {
            re: seq,
            utterance,
            guide: self.guide.clone(),
            session: self.session.clone(),
        });
        Inbound::Turn { notices, job }
    }

    /// Adopts a finished turn. Results of superseded turns are dropped.
    pub fn finish(&mut self, done: TurnDone) -> Vec<WireMessage> {
        if self.in_flight != Some(done.re) {
            return Vec::new();
        }
        self.in_flight = None;
        self.session = done.session;
        let seq = self.next_seq();
        vec![WireMessage::Feedback {
            seq,
            re: done.re,
            bundle: done.outcome.bundle,
        }]
    }

    pub fn in_flight(&self) -> Option<u64> {
        self.in_flight
    }

    /// Advances the walk, if any, by `dt` seconds of virtual time.
    pub fn tick(&mut self, dt: f64) -> Vec<WireMessage> {
        let update = match self.guide.tick(&mut self.session, dt) {
            Ok(Some(u)) => u,
            Ok(None) => return Vec::new(),
            Err(e) => {
                tracing::warn!(session = self.session.id.as_str(), error = %e, "tick failed");
                self.session.stop_walking();
                return vec![self.error(None, e.to_string())];
            }
        };
        let mut out = vec![WireMessage::Pose {
            seq: self.next_seq(),
            t: update.t,
            guide: update.guide,
            visitor: update.visitor,
            minimap: update.minimap,
            signpost: update.signpost,
        }];
        if let Some(artwork) = update.arrival {
            out.push(WireMessage::Arrival {
                seq: self.next_seq(),
                artwork,
            });
        }
        out
    }

    /// Runs a frame to completion inline. Used by replay and tests.
    pub async fn exchange(&mut self, text: &str) -> Vec<WireMessage> {
        match self.accept(text) {
            Inbound::Reply(msgs) => msgs,
            Inbound::Turn { mut notices, job } => {
                let done = job.run().await;
                notices.extend(self.finish(done));
                notices
            }
        }
    }
}

impl SessionRunner {
    /// Answers the in-flight request with an error, e.g. when its task died.
    pub fn abandon(&mut self, reason: &str) -> Vec<WireMessage> {
        match self.in_flight.take() {
            Some(re) => vec![self.error(Some(re), reason)],
            None => Vec::new(),
        }
    }
}

impl SessionRunner {
    pub fn reject(&mut self, reason: &str) -> Vec<WireMessage> {
        vec![self.error(None, reason)]
    }
}
