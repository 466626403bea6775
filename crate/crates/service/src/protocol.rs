//! JSON messages exchanged over the `/session` socket.

use serde::{Deserialize, Serialize};
use wander_core::feedback::FeedbackBundle;
use wander_core::nav::{MinimapState, SignpostState};

/// One frame on the session socket. `seq` increases strictly in each
/// direction; replies carry the `seq` of the request in `re`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum WireMessage {
    Hello {
        seq: u64,
        session: String,
        spawn: [f64; 2],
    },
    Utterance {
        seq: u64,
        text: String,
    },
    /// The visitor picked an item on the virtual screen.
    Select {
        seq: u64,
        artwork: String,
    },
    Feedback {
        seq: u64,
        re: u64,
        bundle: FeedbackBundle,
    },
    Pose {
        seq: u64,
        t: f64,
        guide: [f64; 2],
        visitor: [f64; 2],
        minimap: MinimapState,
        signpost: Option<SignpostState>,
    },
    Arrival {
        seq: u64,
        artwork: String,
    },
    Error {
        seq: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        re: Option<u64>,
        reason: String,
    },
}

impl WireMessage {
    pub fn seq(&self) -> u64 {
        match self {
            WireMessage::Hello { seq, .. }
            | WireMessage::Utterance { seq, .. }
            | WireMessage::Select { seq, .. }
            | WireMessage::Feedback { seq, .. }
            | WireMessage::Pose { seq, .. }
            | WireMessage::Arrival { seq, .. }
            | WireMessage::Error { seq, .. } => *seq,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            WireMessage::Hello { .. } => "hello",
            WireMessage::Utterance { .. } => "utterance",
            WireMessage::Select { .. } => "select",
            WireMessage::Feedback { .. } => "feedback",
            WireMessage::Pose { .. } => "pose",
            WireMessage::Arrival { .. } => "arrival",
            WireMessage::Error { .. } => "error",
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("wire messages serialize")
    }
}

/// A request from the client after parsing.
#[derive(Debug, Clone, PartialEq)]
pub enum Request {
    Utterance { seq: u64, text: String },
    Select { seq: u64, artwork: String },
}

impl Request {
    pub fn seq(&self) -> u64 {
        match self {
            Request::Utterance { seq, .. } | Request::Select { seq, .. } => *seq,
        }
    }
}

/// Why an inbound frame was refused. `re` is set when the frame carried a
/// readable `seq`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rejected {
    pub re: Option<u64>,
    pub reason: String,
}

pub fn parse_request(text: &str) -> Result<Request, Rejected> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Rejected {
        re: None,
        reason: format!("malformed message: {e}"),
    })?;
    let re = value.get("seq").and_then(|s| s.as_u64());
    let msg: WireMessage = serde_json::from_value(value).map_err(|e| Rejected {
        re,
        reason: format!("malformed message: {e}"),
    })?;
    match msg {
        WireMessage::Utterance { seq, text } => Ok(Request::Utterance { seq, text }),
        WireMessage::Select { seq, artwork } => Ok(Request::Select { seq, artwork }),
        other => Err(Rejected {
            re,
            reason: format!("clients may not send `{}` messages", other.kind()),
        }),
    }
}
