//! Live session service: human play sessions that record traces, training
//! on recorded traces, and bot-watch sessions, over a WebSocket carrying
//! one JSON message per text frame.

pub mod protocol;
mod session;
pub mod store;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::atomic::AtomicU64;
use std::sync::Arc;

use axum::extract::ws::WebSocketUpgrade;
use axum::extract::State;
use axum::response::Response;
use axum::routing::get;
use axum::Router;
use thiserror::Error;
use tokio::net::TcpListener;
use tokio::task::JoinHandle;
use tower_http::services::ServeDir;

use mimic_core::eval::EvalError;
use mimic_core::{AgentError, GameConfig, PerceptionError, TraceError, TreeError, WorldError};

pub use store::DataDir;

#[derive(Debug, Error)]
pub enum ServerError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Store(String),
    #[error("{0} not found")]
    NotFound(&'static str),
    #[error("{0}")]
    Training(String),
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error(transparent)]
    Perception(#[from] PerceptionError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Agent(#[from] AgentError),
}

#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub addr: SocketAddr,
    pub data_dir: PathBuf,
    /// Directory holding the built UI bundle, served at `/`.
    pub static_dir: Option<PathBuf>,
    /// Template for new games; the seed is replaced per session.
    pub game: GameConfig,
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self {
            addr: SocketAddr::from(([127, 0, 0, 1], 8080)),
            data_dir: PathBuf::from("data"),
            static_dir: None,
            game: GameConfig::default(),
        }
    }
}

pub(crate) struct AppState {
    pub data: DataDir,
    pub game: GameConfig,
    pub sessions: AtomicU64,
}

pub fn router(config: &ServerConfig) -> Result<Router, ServerError> {
    let app = Arc::new(AppState { data: DataDir::open(&config.data_dir)?, game: config.game, sessions: AtomicU64::new(0) });
    let router = Router::new().route("/ws", get(ws_handler)).with_state(app);
    Ok(match &config.static_dir {
        Some(dir) => router.fallback_service(ServeDir::new(dir)),
        None => router,
    })
}

async fn ws_handler(ws: WebSocketUpgrade, State(app): State<Arc<AppState>>) -> Response {
    ws.on_upgrade(move |socket| session::run(socket, app))
}

/// Binds and serves in the background; returns the bound address.
pub async fn spawn(config: ServerConfig) -> Result<(SocketAddr, JoinHandle<()>), ServerError> {
    let router = router(&config)?;
    let listener = TcpListener::bind(config.addr).await?;
    let addr = listener.local_addr()?;
    let handle = tokio::spawn(async move {
        if let Err(e) = axum::serve(listener, router).await {
            log::error!("server stopped: {e}");
        }
    });
    Ok((addr, handle))
}

/// Serves until the process is stopped.
pub async fn serve(config: ServerConfig) -> Result<(), ServerError> {
    let router = router(&config)?;
    let listener = TcpListener::bind(config.addr).await?;
    log::info!("listening on ws://{}/ws, data in {}", listener.local_addr()?, config.data_dir.display());
    axum::serve(listener, router).await?;
    Ok(())
}
