//! Session server and command line tools around [`wander_core`].

pub mod config;
pub mod protocol;
pub mod replay;
pub mod runner;
pub mod server;
pub mod tools;
