#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use serde::Deserialize;
use serde_json::json;
use wander_core::gateway::{Gateway, PromptSet, ScriptedBackend};
use wander_core::world::VisitStats;
use wander_core::{GuideConfig, MuseumWorld, TourGuide};
use wander_service::protocol::WireMessage;
use wander_service::runner::SessionRunner;

pub const DT: f64 = 0.1;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub fn museum() -> Arc<MuseumWorld> {
    Arc::new(MuseumWorld::load(fixture("museum35.json")).expect("museum35 loads"))
}

/// A fresh guide over museum35 with the shipped scripted rules.
pub fn scripted_guide() -> TourGuide {
    let world = museum();
    let gw = Gateway::new(
        Arc::new(ScriptedBackend::from_file(fixture("scripted_rules.json")).unwrap()),
        PromptSet::builtin(),
    );
    let stats = Arc::new(VisitStats::new(&world));
    TourGuide::new(world, gw, GuideConfig::default()).with_stats(stats)
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum Step {
    Say { say: String },
    Select { select: String },
    Ticks { ticks: usize },
}

pub fn session_script() -> Vec<Step> {
    serde_json::from_str(&std::fs::read_to_string(fixture("session_script.json")).unwrap()).unwrap()
}

/// Runs `steps` through a runner; returns every outbound frame in order.
pub async fn drive(guide: Arc<TourGuide>, steps: &[Step]) -> Vec<WireMessage> {
    let mut runner = SessionRunner::new(guide, "script");
    let mut out = vec![runner.hello()];
    let mut seq = 0u64;
    for step in steps {
        match step {
            Step::Say { say } => {
                seq += 1;
                let frame = json!({"type": "utterance", "seq": seq, "text": say}).to_string();
                out.extend(runner.exchange(&frame).await);
            }
            Step::Select { select } => {
                seq += 1;
                let frame = json!({"type": "select", "seq": seq, "artwork": select}).to_string();
                out.extend(runner.exchange(&frame).await);
            }
            Step::Ticks { ticks } => {
                for _ in 0..*ticks {
                    out.extend(runner.tick(DT));
                }
            }
        }
    }
    out
}

/// Shortest 8-connected path cost without corner cutting, by plain
/// Dijkstra over a dense table. `None` when unreachable.
pub fn dijkstra(free: &[bool], w: i32, h: i32, start: (i32, i32), goal: (i32, i32)) -> Option<f64> {
    let ok = |c: i32, r: i32| c >= 0 && r >= 0 && c < w && r < h && free[(r * w + c) as usize];
    if !ok(start.0, start.1) || !ok(goal.0, goal.1) {
        return None;
    }
    let n = (w * h) as usize;
    let mut dist = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    dist[(start.1 * w + start.0) as usize] = 0.0;
    loop {
        let mut best: Option<usize> = None;
        for i in 0..n {
            if !done[i] && dist[i].is_finite() && best.is_none_or(|b| dist[i] < dist[b]) {
                best = Some(i);
            }
        }
        let i = best?;
        done[i] = true;
        let (c, r) = (i as i32 % w, i as i32 / w);
        if (c, r) == goal {
            return Some(dist[i]);
        }
        for dc in -1..=1 {
            for dr in -1..=1 {
                if (dc, dr) == (0, 0) || !ok(c + dc, r + dr) {
                    continue;
                }
                let diagonal = dc != 0 && dr != 0;
                if diagonal && !(ok(c + dc, r) && ok(c, r + dr)) {
                    continue;
                }
                let j = ((r + dr) * w + c + dc) as usize;
                let nd = dist[i] + if diagonal { 2f64.sqrt() } else { 1.0 };
                if nd < dist[j] {
                    dist[j] = nd;
                }
            }
        }
    }
}
