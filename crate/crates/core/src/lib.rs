//! Tour-guidance engine for virtual museums.
//!
//! A visitor utterance flows through two bot stages: the classifier and
//! compiler turn it into a [`pipeline::ContextFrame`], then one of the
//! explorer, navigator or identifier bots answers it. The answer is composed
//! into a [`feedback::FeedbackBundle`] that selects one of five channel
//! combinations. [`engine::TourGuide`] wires the stages together.

pub mod bots;
pub mod engine;
pub mod feedback;
pub mod gateway;
pub mod nav;
pub mod pipeline;
pub mod session;
pub mod text;
pub mod world;

#[cfg(test)]
pub(crate) mod testutil;

pub use engine::{GuideConfig, TourGuide, TurnOutcome};
pub use world::MuseumWorld;
