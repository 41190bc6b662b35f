//! Imitation learning for a grid maze-chase game.
//!
//! Games are recorded as traces, traces become labeled datasets through a
//! network of fuzzy perceptions, an unpruned C4.5 tree is induced from the
//! dataset, and a bot replays the tree's decisions in new games.
//!
//! ```
//! use std::collections::BTreeMap;
//! use std::sync::Arc;
//! use mimic_core::{build_dataset, default_maze, induce, simulate, GameConfig, ScriptedPolicy, TestId};
//!
//! let maze = Arc::new(default_maze());
//! let policy = ScriptedPolicy::CautiousCollector { flee_radius: 4 };
//! let traces = simulate(policy, maze.clone(), "default", GameConfig::with_seed(1), 2).unwrap();
//! let mazes = BTreeMap::from([("default".to_string(), (*maze).clone())]);
//! let data = build_dataset(TestId::T3_9, &traces, &mazes).unwrap();
//! let tree = induce(&data).unwrap();
//! assert!(tree.root.leaf_count() >= 1);
//! ```

pub mod agent;
pub mod dataset;
pub mod eval;
pub mod perception;
pub mod policy;
pub mod trace;
pub mod tree;
pub mod world;

pub use agent::{run_bot, search, AgentError, BotController, Decision, Outcome};
pub use dataset::{read_arff, write_arff, AttributeKind, AttributeSpec, ClassLabel, Dataset, DatasetError, Instance, Schema, Value};
pub use eval::{accuracy, cross_validate, kfold_split, prc_area, roc_area, EvalError, EvalReport};
pub use perception::{
    build_dataset, label_t3, ComputationalPerception, Cp, FuzzyRuleBase, LinguisticVariable, PerceptionError, PerceptionNetwork,
    Perceptions, TestId, Trapezoid,
};
pub use policy::{play_game, simulate, ScriptedPolicy};
pub use trace::{read_trace, write_trace, Actor, Trace, TraceError, TraceRow};
pub use tree::{induce, DecisionTree, TreeError};
pub use world::{Direction, GameConfig, GameEvent, GameState, Maze, Position, Status, WorldError};

/// Text of the bundled 20x20 maze.
pub const DEFAULT_MAZE: &str = include_str!("../mazes/default.txt");

/// Name under which the bundled maze is referenced from traces.
pub const DEFAULT_MAZE_ID: &str = "default";

pub fn default_maze() -> Maze {
    Maze::parse(DEFAULT_MAZE).expect("bundled maze is valid")
}
