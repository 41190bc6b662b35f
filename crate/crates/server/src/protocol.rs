//! Wire messages. Each WebSocket text frame carries one JSON object with a
//! `type` tag; see `PROTOCOL.md` at the repository root.

use serde::{Deserialize, Serialize};

use mimic_core::eval::EvalReport;
use mimic_core::{Direction, GameState, Maze, Position, Status};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    HumanPlay,
    BotWatch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClientMessage {
    /// Without `mode` only the catalog is returned; with it a session starts.
    Hello {
        #[serde(default)]
        mode: Option<Mode>,
        #[serde(default)]
        maze: Option<String>,
        #[serde(default)]
        model: Option<String>,
        #[serde(default)]
        seed: Option<u64>,
    },
    Input {
        direction: Direction,
    },
    End,
    TrainRequest {
        traces: Vec<String>,
        config: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MazeView {
    pub id: String,
    pub width: usize,
    pub height: usize,
    /// One string per row in the maze text format.
    pub rows: Vec<String>,
}

impl MazeView {
    pub fn new(id: &str, maze: &Maze) -> Self {
        Self { id: id.to_string(), width: maze.width(), height: maze.height(), rows: maze.to_text().lines().map(str::to_string).collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionView {
    pub class: String,
    pub situation: String,
    pub attitude: String,
    pub movement: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub tick: u64,
    pub elapsed_ms: u64,
    pub status: Status,
    pub player: Position,
    pub opponent: Position,
    pub rewards: Vec<Position>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decision: Option<DecisionView>,
}

impl Snapshot {
    pub fn of(state: &GameState, decision: Option<DecisionView>) -> Self {
        Self {
            tick: state.tick(),
            elapsed_ms: state.elapsed_ms(),
            status: state.status(),
            player: state.player(),
            opponent: state.opponent(),
            rewards: state.rewards_remaining().iter().copied().collect(),
            decision,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Catalog {
    pub mazes: Vec<String>,
    pub traces: Vec<String>,
    pub models: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    Hello {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        session_id: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mode: Option<Mode>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        maze: Option<MazeView>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tick_duration_ms: Option<u64>,
        catalog: Catalog,
    },
    State(Snapshot),
    End {
        session_id: String,
        /// `won`, `captured` or `aborted`.
        outcome: String,
        duration_ms: u64,
        moves: usize,
        trace_id: Option<String>,
    },
    TrainResult {
        model_id: String,
        config: String,
        report: EvalReport,
    },
    Error {
        message: String,
    },
}

impl ServerMessage {
    pub fn error(message: impl Into<String>) -> Self {
        ServerMessage::Error { message: message.into() }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("server messages serialise")
    }
}
