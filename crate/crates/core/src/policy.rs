//! Scripted stand-ins for human players.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::ClassLabel;
use crate::agent::search;
use crate::trace::{Actor, Trace};
use crate::world::{Direction, Entity, GameConfig, GameState, Maze, Status, WorldError};

pub const DEFAULT_FLEE_RADIUS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScriptedPolicy {
    /// Always the shortest path to the nearest reward.
    GreedyCollector,
    /// Flees while the opponent is within `flee_radius`, otherwise collects.
    CautiousCollector { flee_radius: usize },
    /// Uniformly random legal moves.
    RandomWalker,
}

impl ScriptedPolicy {
    pub const IDS: [&'static str; 3] = ["greedy_collector", "cautious_collector", "random_walker"];

    pub fn id(&self) -> &'static str {
        match self {
            ScriptedPolicy::GreedyCollector => "greedy_collector",
            ScriptedPolicy::CautiousCollector { .. } => "cautious_collector",
            ScriptedPolicy::RandomWalker => "random_walker",
        }
    }

    /// Next move for the player. `rng` is only drawn from by the random walker.
    pub fn choose(&self, state: &GameState, rng: &mut ChaCha8Rng) -> Option<Direction> {
        match *self {
            ScriptedPolicy::GreedyCollector => search(ClassLabel::GoAhead, state),
            ScriptedPolicy::CautiousCollector { flee_radius } => {
                if state.player().manhattan(state.opponent()) <= flee_radius {
                    search(ClassLabel::GetAway, state)
                } else {
                    search(ClassLabel::GoAhead, state)
                }
            }
            ScriptedPolicy::RandomWalker => {
                let legal = state.legal_moves(Entity::Player);
                (!legal.is_empty()).then(|| legal[rng.gen_range(0..legal.len())])
            }
        }
    }
}

impl fmt::Display for ScriptedPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for ScriptedPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "greedy_collector" | "greedy" => Ok(ScriptedPolicy::GreedyCollector),
            "cautious_collector" | "cautious" => Ok(ScriptedPolicy::CautiousCollector { flee_radius: DEFAULT_FLEE_RADIUS }),
            "random_walker" | "random" => Ok(ScriptedPolicy::RandomWalker),
            _ => Err(format!("unknown policy '{s}' (expected one of: {})", Self::IDS.join(", "))),
        }
    }
}

/// Plays one game to completion with human-actor rows.
pub fn play_game(policy: ScriptedPolicy, maze: Arc<Maze>, maze_ref: &str, config: GameConfig) -> Result<Trace, WorldError> {
    // the policy's own stream is decorrelated from the opponent's
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x005e_ed0f_9a1e);
    let mut state = GameState::new(maze, config)?;
    let mut trace = Trace::new(format!("{}-{}", policy.id(), config.seed), maze_ref, config);
    while state.status() == Status::Running {
        let mv = policy.choose(&state, &mut rng);
        trace.play(&mut state, mv, Actor::Human)?;
    }
    Ok(trace)
}

/// Plays `n_games` games; game `i` uses seed `base.seed + i`.
pub fn simulate(policy: ScriptedPolicy, maze: Arc<Maze>, maze_ref: &str, base: GameConfig, n_games: usize) -> Result<Vec<Trace>, WorldError> {
    (0..n_games as u64)
        .map(|i| play_game(policy, maze.clone(), maze_ref, GameConfig { seed: base.seed.wrapping_add(i), ..base }))
        .collect()
}
