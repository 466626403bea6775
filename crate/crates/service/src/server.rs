//! HTTP and websocket front end.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Duration;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::IntoResponse;
use axum::routing::get;
use axum::{Json, Router};
use futures::{SinkExt, StreamExt};
use serde_json::{json, Value};
use thiserror::Error;
use tokio::net::TcpListener;
use tokio::task::JoinHandle;
use wander_core::gateway::{BackendMode, Gateway, LiveBackend, LiveConfig, PromptSet, ScriptedBackend};
use wander_core::world::VisitStats;
use wander_core::{GuideConfig, MuseumWorld, TourGuide};

use crate::config::ServiceConfig;
use crate::protocol::WireMessage;
use crate::runner::{Inbound, SessionRunner, TurnDone};

#[derive(Debug, Error)]
pub enum StartupError {
    #[error("invalid museum: {0}")]
    Museum(#[from] wander_core::world::WorldError),
    #[error("cannot load scripted rules: {0}")]
    Rules(#[from] wander_core::gateway::RuleError),
    #[error("cannot load prompts: {0}")]
    Prompts(#[from] wander_core::gateway::TemplateError),
    #[error("{0}")]
    Backend(String),
    #[error("cannot bind {addr}: {source}")]
    Bind {
        addr: String,
        #[source]
        source: std::io::Error,
    },
}

/// Builds the guide described by `config`. `WANDER_LLM_MODE`, when set,
/// overrides the configured backend.
pub fn build_guide(config: &ServiceConfig) -> Result<TourGuide, StartupError> {
    let world = Arc::new(MuseumWorld::load(&config.museum)?);
    let prompts = match &config.prompts {
        Some(dir) => PromptSet::load_dir(dir)?,
        None => PromptSet::builtin(),
    };
    let mode = match BackendMode::from_env() {
        Some(m) => m.map_err(StartupError::Backend)?,
        None => config.backend,
    };
    let gateway = match mode {
        BackendMode::Scripted => Gateway::new(Arc::new(ScriptedBackend::from_file(&config.rules)?), prompts),
        BackendMode::Live => Gateway::new(Arc::new(LiveBackend::new(LiveConfig::from_env())), prompts),
    };
    let stats = Arc::new(VisitStats::new(&world));
    let guide_config = GuideConfig {
        speed: config.speed,
        ..GuideConfig::default()
    };
    Ok(TourGuide::new(world, gateway, guide_config).with_stats(stats))
}

#[derive(Clone)]
pub struct AppState {
    guide: Arc<TourGuide>,
    /// Virtual seconds added per tick.
    tick_dt: f64,
    /// Wall time between ticks.
    tick_period: Duration,
    sessions: Arc<AtomicU64>,
}

impl AppState {
    pub fn new(guide: Arc<TourGuide>, tick_dt: f64) -> Self {
        AppState {
            guide,
            tick_dt,
            tick_period: Duration::from_secs_f64(tick_dt),
            sessions: Arc::new(AtomicU64::new(0)),
        }
    }

    /// Ticks faster or slower than real time without changing `dt`.
    pub fn with_tick_period(mut self, period: Duration) -> Self {
        self.tick_period = period;
        self
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/museum", get(museum))
        .route("/healthz", get(healthz))
        .route("/session", get(session))
        .with_state(state)
}

/// The museum document with live visit counts.
async fn museum(State(state): State<AppState>) -> Json<Value> {
    let mut doc = state.guide.world.document();
    for a in &mut doc.artworks {
        a.visit_count = state.guide.stats.get(&a.id).unwrap_or(a.visit_count);
    }
    Json(serde_json::to_value(doc).expect("museum serializes"))
}

async fn healthz(State(state): State<AppState>) -> Json<Value> {
    Json(json!({
        "status": "ok",
        "artworks": state.guide.world.artworks.len(),
        "sessions": state.sessions.load(Ordering::Relaxed),
    }))
}

async fn session(ws: WebSocketUpgrade, State(state): State<AppState>) -> impl IntoResponse {
    ws.on_upgrade(move |socket| run_session(socket, state))
}

async fn send_all(socket: &mut futures::stream::SplitSink<WebSocket, Message>, msgs: Vec<WireMessage>) -> bool {
    for m in msgs {
        if socket.send(Message::Text(m.to_json().into())).await.is_err() {
            return false;
        }
    }
    true
}

async fn run_session(socket: WebSocket, state: AppState) {
    let n = state.sessions.fetch_add(1, Ordering::Relaxed) + 1;
    let mut runner = SessionRunner::new(state.guide.clone(), format!("session-{n}"));
    let (mut tx, mut rx) = socket.split();
    tracing::info!(session = runner.session().id.as_str(), "session opened");
    if !send_all(&mut tx, vec![runner.hello()]).await {
        return;
    }
    let mut ticker = tokio::time::interval(state.tick_period);
    ticker.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Skip);
    let mut job: Option<JoinHandle<TurnDone>> = None;

    loop {
        let out = tokio::select! {
            frame = rx.next() => match frame {
                Some(Ok(Message::Text(text))) => match runner.accept(text.as_str()) {
                    Inbound::Reply(msgs) => msgs,
                    Inbound::Turn { notices, job: next } => {
                        if let Some(old) = job.take() {
                            old.abort();
                        }
                        job = Some(tokio::spawn(next.run()));
                        notices
                    }
                },
                Some(Ok(Message::Binary(_))) => runner.reject("binary frames are not supported"),
                Some(Ok(Message::Close(_))) | None | Some(Err(_)) => break,
                Some(Ok(_)) => Vec::new(),
            },
            done = async { job.as_mut().expect("guarded").await }, if job.is_some() => {
                job = None;
                match done {
                    Ok(d) => runner.finish(d),
                    Err(e) => runner.abandon(&format!("turn failed: {e}")),
                }
            },
            _ = ticker.tick() => runner.tick(state.tick_dt),
        };
        if !send_all(&mut tx, out).await {
            break;
        }
    }
    if let Some(j) = job {
        j.abort();
    }
    tracing::info!(session = runner.session().id.as_str(), "session closed");
}

/// Serves on an already bound listener until the task is dropped.
pub async fn serve_on(listener: TcpListener, state: AppState) -> std::io::Result<()> {
    axum::serve(listener, router(state)).await
}

pub async fn serve(config: &ServiceConfig) -> Result<(), StartupError> {
    let guide = Arc::new(build_guide(config)?);
    let addr = format!("{}:{}", config.bind, config.port);
    let listener = TcpListener::bind(&addr).await.map_err(|source| StartupError::Bind {
        addr: addr.clone(),
        source,
    })?;
    tracing::info!(%addr, artworks = guide.world.artworks.len(), "serving");
    serve_on(listener, AppState::new(guide, config.tick_dt()))
        .await
        .map_err(|source| StartupError::Bind { addr, source })
}
