//! One connection owns at most one session at a time, and the session owns
//! its game outright. Training is pushed to a blocking worker and reports
//! back through a channel so ticks keep flowing.

use std::sync::atomic::Ordering;
use std::sync::Arc;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use axum::extract::ws::{Message, WebSocket};
use futures_util::stream::SplitSink;
use futures_util::{SinkExt, StreamExt};
use tokio::sync::mpsc;
use tokio::time::{interval, Interval, MissedTickBehavior};

use mimic_core::{Actor, BotController, Direction, GameConfig, GameState, Status, TestId, Trace};

use crate::protocol::{ClientMessage, DecisionView, MazeView, Mode, ServerMessage, Snapshot};
use crate::{AppState, ServerError};

struct Session {
    id: String,
    mode: Mode,
    state: GameState,
    trace: Trace,
    /// Latest input since the previous tick.
    pending: Option<Direction>,
    bot: Option<BotController>,
    decision: Option<DecisionView>,
    finished: bool,
}

impl Session {
    /// One tick. Human rows are only recorded on ticks that carried an input;
    /// the world advances either way.
    fn advance(&mut self) -> Result<(), ServerError> {
        match self.mode {
            Mode::HumanPlay => match self.pending.take() {
                Some(d) => {
                    self.trace.play(&mut self.state, Some(d), Actor::Human)?;
                }
                None => {
                    self.state.step(None)?;
                }
            },
            Mode::BotWatch => {
                let bot = self.bot.as_mut().expect("bot_watch session has a bot");
                let d = bot.decide_explained(&self.state)?;
                self.decision = Some(DecisionView {
                    class: d.class.as_str().to_string(),
                    situation: d.situation().to_string(),
                    attitude: d.attitude().to_string(),
                    movement: d.movement().to_string(),
                });
                self.trace.play(&mut self.state, d.direction, Actor::Bot)?;
            }
        }
        Ok(())
    }

    fn snapshot(&self) -> ServerMessage {
        ServerMessage::State(Snapshot::of(&self.state, self.decision.clone()))
    }

    /// Persists the trace once and builds the closing message.
    fn finish(&mut self, app: &AppState) -> ServerMessage {
        self.finished = true;
        let outcome = match self.state.status() {
            Status::Running => "aborted",
            Status::Won => "won",
            Status::Captured => "captured",
        };
        let duration_ms = self.state.elapsed_ms();
        let trace_id = match app.data.save_trace(&self.trace, self.mode, outcome, duration_ms) {
            Ok(()) => Some(self.trace.game_id.clone()),
            Err(e) => {
                log::error!("session {}: trace not saved: {e}", self.id);
                None
            }
        };
        ServerMessage::End { session_id: self.id.clone(), outcome: outcome.to_string(), duration_ms, moves: self.trace.rows.len(), trace_id }
    }
}

type Sink = SplitSink<WebSocket, Message>;

async fn send(sink: &mut Sink, msg: &ServerMessage) -> bool {
    sink.send(Message::Text(msg.to_line().into())).await.is_ok()
}

async fn next_tick(ticker: &mut Option<Interval>) {
    match ticker {
        Some(t) => {
            t.tick().await;
        }
        None => std::future::pending().await,
    }
}

fn new_session_id(app: &AppState) -> String {
    let n = app.sessions.fetch_add(1, Ordering::Relaxed);
    let ms = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0);
    format!("s{ms}-{n}")
}

fn start(app: &AppState, mode: Mode, maze: Option<String>, model: Option<String>, seed: Option<u64>) -> Result<(Session, ServerMessage), ServerError> {
    let id = new_session_id(app);
    let seed = seed.unwrap_or_else(|| app.sessions.load(Ordering::Relaxed) ^ SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_nanos() as u64).unwrap_or(0));
    let config = GameConfig { seed, ..app.game };
    let (bot, maze_id) = match mode {
        Mode::HumanPlay => (None, maze.unwrap_or_else(|| mimic_core::DEFAULT_MAZE_ID.to_string())),
        Mode::BotWatch => {
            let model = model.ok_or(ServerError::NotFound("model"))?;
            let (tree, entry) = app.data.load_model(&model)?;
            let maze_id = maze.unwrap_or(entry.maze.clone());
            let cfg: TestId = entry.config.parse()?;
            let maze = app.data.load_maze(&maze_id)?;
            (Some(BotController::new(tree, cfg, &maze, &config)?), maze_id)
        }
    };
    let maze = Arc::new(app.data.load_maze(&maze_id)?);
    let state = GameState::new(maze.clone(), config)?;
    let session = Session {
        trace: Trace::new(id.clone(), maze_id.clone(), config),
        id: id.clone(),
        mode,
        state,
        pending: None,
        bot,
        decision: None,
        finished: false,
    };
    let hello = ServerMessage::Hello {
        session_id: Some(id),
        mode: Some(mode),
        maze: Some(MazeView::new(&maze_id, &maze)),
        tick_duration_ms: Some(config.tick_duration_ms),
        catalog: app.data.catalog()?,
    };
    Ok((session, hello))
}

pub(crate) async fn run(socket: WebSocket, app: Arc<AppState>) {
    let (mut sink, mut stream) = socket.split();
    let (train_tx, mut train_rx) = mpsc::unbounded_channel::<ServerMessage>();
    let mut session: Option<Session> = None;
    let mut ticker: Option<Interval> = None;

    loop {
        tokio::select! {
            incoming = stream.next() => {
                let text = match incoming {
                    Some(Ok(Message::Text(t))) => t,
                    Some(Ok(Message::Close(_))) | None | Some(Err(_)) => break,
                    Some(Ok(_)) => continue,
                };
                for line in text.lines().filter(|l| !l.trim().is_empty()) {
                    let reply = match serde_json::from_str::<ClientMessage>(line) {
                        Err(e) => vec![ServerMessage::error(format!("bad message: {e}"))],
                        Ok(msg) => handle(msg, &app, &mut session, &mut ticker, &train_tx),
                    };
                    for r in reply {
                        if !send(&mut sink, &r).await {
                            break;
                        }
                    }
                }
            }
            _ = next_tick(&mut ticker) => {
                let Some(s) = session.as_mut().filter(|s| !s.finished) else {
                    ticker = None;
                    continue;
                };
                if let Err(e) = s.advance() {
                    let _ = send(&mut sink, &ServerMessage::error(e.to_string())).await;
                }
                let mut out = vec![s.snapshot()];
                if s.state.status().is_terminal() {
                    out.push(s.finish(&app));
                    ticker = None;
                }
                for m in out {
                    if !send(&mut sink, &m).await {
                        break;
                    }
                }
            }
            Some(msg) = train_rx.recv() => {
                if !send(&mut sink, &msg).await {
                    break;
                }
            }
        }
    }

    // disconnect: keep whatever was played
    if let Some(s) = session.as_mut().filter(|s| !s.finished) {
        s.finish(&app);
    }
}

fn handle(
    msg: ClientMessage,
    app: &Arc<AppState>,
    session: &mut Option<Session>,
    ticker: &mut Option<Interval>,
    train_tx: &mpsc::UnboundedSender<ServerMessage>,
) -> Vec<ServerMessage> {
    match msg {
        ClientMessage::Hello { mode: None, .. } => match app.data.catalog() {
            Ok(catalog) => vec![ServerMessage::Hello { session_id: None, mode: None, maze: None, tick_duration_ms: None, catalog }],
            Err(e) => vec![ServerMessage::error(e.to_string())],
        },
        ClientMessage::Hello { mode: Some(mode), maze, model, seed } => {
            let mut out = Vec::new();
            if let Some(old) = session.as_mut().filter(|s| !s.finished) {
                out.push(old.finish(app));
            }
            match start(app, mode, maze, model, seed) {
                Ok((s, hello)) => {
                    out.push(hello);
                    out.push(s.snapshot());
                    let mut t = interval(Duration::from_millis(s.state.config().tick_duration_ms));
                    t.set_missed_tick_behavior(MissedTickBehavior::Delay);
                    t.reset();
                    *ticker = Some(t);
                    *session = Some(s);
                }
                Err(e) => {
                    *ticker = None;
                    out.push(ServerMessage::error(e.to_string()));
                }
            }
            out
        }
        ClientMessage::Input { direction } => match session.as_mut() {
            None => vec![ServerMessage::error("no active session")],
            Some(s) if s.mode == Mode::BotWatch => vec![ServerMessage::error("input rejected: bot_watch session")],
            Some(s) if s.finished || s.state.status().is_terminal() => vec![ServerMessage::error("game over")],
            Some(s) => {
                s.pending = Some(direction);
                Vec::new()
            }
        },
        ClientMessage::End => match session.as_mut() {
            Some(s) if !s.finished => {
                *ticker = None;
                vec![s.finish(app)]
            }
            _ => vec![ServerMessage::error("no active session")],
        },
        ClientMessage::TrainRequest { traces, config } => {
            let cfg = match config.parse::<TestId>() {
                Ok(c) => c,
                Err(e) => return vec![ServerMessage::error(e.to_string())],
            };
            let app = app.clone();
            let tx = train_tx.clone();
            tokio::task::spawn_blocking(move || {
                let msg = match app.data.train_from_traces(&traces, cfg) {
                    Ok((model_id, report)) => ServerMessage::TrainResult { model_id, config: cfg.as_str().to_string(), report },
                    Err(e) => ServerMessage::error(e.to_string()),
                };
                let _ = tx.send(msg);
            });
            Vec::new()
        }
    }
}
