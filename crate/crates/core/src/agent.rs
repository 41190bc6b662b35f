//! The imitating bot: observe, perceive, classify, move.

use std::sync::Arc;

use thiserror::Error;

use crate::dataset::ClassLabel;
use crate::perception::{Cp, PerceptionNetwork, Perceptions, TestId};
use crate::trace::{record, Actor, RowEvent, Trace, TraceRow};
use crate::tree::{DecisionTree, TreeError};
use crate::world::{Direction, Entity, GameConfig, GameState, Maze, Status, WorldError};

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("model schema does not match configuration {0}")]
    SchemaMismatch(String),
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// Final status of a finished bot game.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Won,
    Captured,
}

/// What the bot saw and chose on one tick.
#[derive(Debug, Clone)]
pub struct Decision {
    pub class: ClassLabel,
    pub direction: Option<Direction>,
    pub row: TraceRow,
    pub perceptions: Perceptions,
}

impl Decision {
    pub fn situation(&self) -> &str {
        self.perceptions.best_label(Cp::Situation)
    }

    pub fn attitude(&self) -> &str {
        self.perceptions.best_label(Cp::Attitude)
    }

    pub fn movement(&self) -> &str {
        self.perceptions.best_label(Cp::Movement)
    }
}

#[derive(Debug, Clone)]
pub struct BotController {
    tree: Arc<DecisionTree>,
    cfg: TestId,
    network: PerceptionNetwork,
    last_row: Option<TraceRow>,
}

impl BotController {
    /// Fails unless the tree was trained on `cfg`'s instance schema for this
    /// maze and game length.
    pub fn new(tree: impl Into<Arc<DecisionTree>>, cfg: TestId, maze: &Maze, config: &GameConfig) -> Result<Self, AgentError> {
        let tree = tree.into();
        let network = PerceptionNetwork::for_game(maze, config);
        if tree.schema != network.schema(cfg) {
            return Err(AgentError::SchemaMismatch(cfg.as_str().to_string()));
        }
        Ok(Self { tree, cfg, network, last_row: None })
    }

    pub fn config(&self) -> TestId {
        self.cfg
    }

    pub fn last_row(&self) -> Option<&TraceRow> {
        self.last_row.as_ref()
    }

    /// Classifies the current state and maps the class to a move.
    pub fn decide(&mut self, state: &GameState) -> Result<(ClassLabel, Option<Direction>), AgentError> {
        let d = self.decide_explained(state)?;
        Ok((d.class, d.direction))
    }

    /// As [`decide`](Self::decide), also returning the observation and the
    /// perceptions behind it.
    pub fn decide_explained(&mut self, state: &GameState) -> Result<Decision, AgentError> {
        let mut row = record(state, None, Actor::Bot, RowEvent::None)?;
        let perceptions = self.network.perceive(&row, state.maze());
        let inst = self.network.build_instance(self.cfg, &row, state.maze());
        let (class, _) = self.tree.classify(&inst)?;
        let direction = search(class, state);
        row.mv = direction;
        self.last_row = Some(row);
        Ok(Decision { class, direction, row, perceptions })
    }
}

/// Maps a class to a direction. `go_ahead` takes the first step of a
/// shortest path to the nearest reward and falls back to evasion when that
/// reward is unreachable; `get_away` takes the legal step that leaves the
/// player farthest (Manhattan) from the opponent. Ties go to the canonical
/// direction order. `None` means stay in place.
pub fn search(class: ClassLabel, state: &GameState) -> Option<Direction> {
    if class == ClassLabel::GoAhead {
        if let Ok(target) = state.nearest_reward(state.player()) {
            if let Some(d) = state.maze().first_step_towards(state.player(), target) {
                return Some(d);
            }
        }
    }
    flee(state)
}

fn flee(state: &GameState) -> Option<Direction> {
    let maze = state.maze();
    let mut best: Option<(Direction, usize)> = None;
    for d in state.legal_moves(Entity::Player) {
        let to = maze.destination(state.player(), d).expect("legal move has a destination");
        let dist = to.manhattan(state.opponent());
        if best.is_none_or(|(_, b)| dist > b) {
            best = Some((d, dist));
        }
    }
    best.map(|(d, _)| d)
}

/// Plays one full game under the tree's control and records it.
pub fn run_bot(tree: impl Into<Arc<DecisionTree>>, cfg: TestId, maze: impl Into<Arc<Maze>>, maze_ref: &str, game_config: GameConfig) -> Result<(Trace, Outcome, u64), AgentError> {
    let maze = maze.into();
    let mut bot = BotController::new(tree, cfg, &maze, &game_config)?;
    let mut state = GameState::new(maze, game_config)?;
    let mut trace = Trace::new(format!("bot-{}", game_config.seed), maze_ref, game_config);
    while state.status() == Status::Running {
        let (_, mv) = bot.decide(&state)?;
        trace.play(&mut state, mv, Actor::Bot)?;
    }
    let outcome = if state.status() == Status::Won { Outcome::Won } else { Outcome::Captured };
    Ok((trace, outcome, state.elapsed_ms()))
}
