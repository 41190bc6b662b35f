//! Execution traces: one observation per player or bot move, plus the raw
//! geometric metrics (distance, protection, time, closeness) computed from
//! them.

use std::fmt;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::world::{Direction, GameConfig, GameEvent, GameState, Maze, Position, WorldError};

pub const TRACE_HEADER: [&str; 11] = [
    "tick", "time_ms", "actor", "player_x", "player_y", "opp_x", "opp_y", "reward_x", "reward_y", "event", "move",
];

#[derive(Debug, Error)]
pub enum TraceError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("row {row}: {msg}")]
    Parse { row: usize, msg: String },
    #[error("row {row}: tick {tick} does not follow tick {prev}")]
    NonMonotonicTick { row: usize, tick: u64, prev: u64 },
    #[error("row {row}: time_ms decreases")]
    NonMonotonicTime { row: usize },
    #[error("row {row}: unknown actor '{value}'")]
    UnknownActor { row: usize, value: String },
    #[error(transparent)]
    World(#[from] WorldError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Actor {
    Human,
    Bot,
}

impl fmt::Display for Actor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Actor::Human => "human",
            Actor::Bot => "bot",
        })
    }
}

impl FromStr for Actor {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "human" => Ok(Actor::Human),
            "bot" => Ok(Actor::Bot),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowEvent {
    #[default]
    None,
    RewardCaptured,
}

impl RowEvent {
    pub fn from_events(events: &[GameEvent]) -> Self {
        if events.iter().any(|e| matches!(e, GameEvent::RewardCaptured { .. })) {
            RowEvent::RewardCaptured
        } else {
            RowEvent::None
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            RowEvent::None => "none",
            RowEvent::RewardCaptured => "reward_captured",
        }
    }
}

/// One recorded move, taken from the state *before* the move was applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRow {
    pub tick: u64,
    pub time_ms: u64,
    pub actor: Actor,
    pub player: Position,
    pub opponent: Position,
    pub nearest_reward: Position,
    pub event: RowEvent,
    #[serde(rename = "move")]
    pub mv: Option<Direction>,
}

impl TraceRow {
    pub fn player_opponent_distance(&self) -> usize {
        distance(self.player, self.opponent)
    }

    pub fn player_reward_distance(&self) -> usize {
        distance(self.player, self.nearest_reward)
    }

    pub fn opponent_reward_distance(&self) -> usize {
        distance(self.opponent, self.nearest_reward)
    }
}

/// Builds a row from a running state, the move about to be taken and the
/// event produced by that move.
pub fn record(state: &GameState, mv: Option<Direction>, actor: Actor, event: RowEvent) -> Result<TraceRow, WorldError> {
    if state.status().is_terminal() {
        return Err(WorldError::GameOver);
    }
    Ok(TraceRow {
        tick: state.tick(),
        time_ms: elapsed_time(state),
        actor,
        player: state.player(),
        opponent: state.opponent(),
        nearest_reward: state.nearest_reward(state.player())?,
        event,
        mv,
    })
}

/// Manhattan distance between two cells.
pub fn distance(p: Position, q: Position) -> usize {
    p.manhattan(q)
}

/// Share of obstacle cells in the inclusive bounding rectangle of `player`
/// and `opponent`, excluding the two entity cells themselves. Adjacent (or
/// coincident) entities leave no candidate cells and yield 0.
pub fn protection(maze: &Maze, player: Position, opponent: Position) -> f64 {
    let (x0, x1) = (player.x.min(opponent.x), player.x.max(opponent.x));
    let (y0, y1) = (player.y.min(opponent.y), player.y.max(opponent.y));
    let area = (x1 - x0 + 1) * (y1 - y0 + 1);
    let possible = area.saturating_sub(if player == opponent { 1 } else { 2 });
    if possible == 0 {
        return 0.0;
    }
    let present = (y0..=y1)
        .flat_map(|y| (x0..=x1).map(move |x| Position::new(x, y)))
        .filter(|&p| maze.is_obstacle(p))
        .count();
    present as f64 / possible as f64
}

pub fn elapsed_time(state: &GameState) -> u64 {
    state.elapsed_ms()
}

/// How much closer the player is to the reward than the opponent.
/// Positive: the player is closer.
pub fn closeness(player_reward: usize, opponent_reward: usize) -> i64 {
    opponent_reward as i64 - player_reward as i64
}

/// A recorded game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub game_id: String,
    pub maze_ref: String,
    pub config: GameConfig,
    pub rows: Vec<TraceRow>,
}

impl Trace {
    pub fn new(game_id: impl Into<String>, maze_ref: impl Into<String>, config: GameConfig) -> Self {
        Self { game_id: game_id.into(), maze_ref: maze_ref.into(), config, rows: Vec::new() }
    }

    /// Records the move, applies it to `state` and returns the step events.
    pub fn play(&mut self, state: &mut GameState, mv: Option<Direction>, actor: Actor) -> Result<Vec<GameEvent>, WorldError> {
        let mut row = record(state, mv, actor, RowEvent::None)?;
        let events = state.step(mv)?;
        row.event = RowEvent::from_events(&events);
        self.rows.push(row);
        Ok(events)
    }

    /// Conventional file name, `trace_<game_id>.csv`.
    pub fn file_name(&self) -> String {
        format!("trace_{}.csv", self.game_id)
    }

    pub fn moves(&self) -> impl Iterator<Item = Option<Direction>> + '_ {
        self.rows.iter().map(|r| r.mv)
    }
}

/// Writes the trace as CSV preceded by `# key=value` metadata lines.
pub fn write_trace<W: Write>(trace: &Trace, mut out: W) -> Result<(), TraceError> {
    writeln!(out, "# game_id={}", trace.game_id)?;
    writeln!(out, "# maze={}", trace.maze_ref)?;
    writeln!(out, "# tick_duration_ms={}", trace.config.tick_duration_ms)?;
    writeln!(out, "# chase_probability={}", trace.config.chase_probability)?;
    writeln!(out, "# max_game_ms={}", trace.config.max_game_ms)?;
    writeln!(out, "# seed={}", trace.config.seed)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_HEADER).map_err(csv_io)?;
    for r in &trace.rows {
        w.write_record([
            r.tick.to_string(),
            r.time_ms.to_string(),
            r.actor.to_string(),
            r.player.x.to_string(),
            r.player.y.to_string(),
            r.opponent.x.to_string(),
            r.opponent.y.to_string(),
            r.nearest_reward.x.to_string(),
            r.nearest_reward.y.to_string(),
            r.event.as_str().to_string(),
            r.mv.map_or("none", Direction::as_str).to_string(),
        ])
        .map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_io(e: csv::Error) -> io::Error {
    io::Error::other(e)
}

/// Re-plays the recorded moves from the start of `maze`. Only meaningful
/// for traces with one row per tick, such as scripted and bot games.
pub fn replay(trace: &Trace, maze: &Maze) -> Result<GameState, WorldError> {
    let mut state = GameState::new(maze.clone(), trace.config)?;
    for mv in trace.moves() {
        state.step(mv)?;
    }
    Ok(state)
}

pub fn read_trace<R: Read>(input: R) -> Result<Trace, TraceError> {
    let mut reader = BufReader::new(input);
    let mut trace = Trace::new("", "", GameConfig::default());
    let mut line = String::new();
    // metadata block
    loop {
        let buf = reader.fill_buf()?;
        if buf.first() != Some(&b'#') {
            break;
        }
        line.clear();
        reader.read_line(&mut line)?;
        let Some((key, value)) = line.trim_start_matches('#').trim().split_once('=') else {
            continue;
        };
        let value = value.trim();
        let bad = || TraceError::Parse { row: 0, msg: format!("bad metadata value for {}", key.trim()) };
        match key.trim() {
            "game_id" => trace.game_id = value.to_string(),
            "maze" => trace.maze_ref = value.to_string(),
            "tick_duration_ms" => trace.config.tick_duration_ms = value.parse().map_err(|_| bad())?,
            "chase_probability" => trace.config.chase_probability = value.parse().map_err(|_| bad())?,
            "max_game_ms" => trace.config.max_game_ms = value.parse().map_err(|_| bad())?,
            "seed" => trace.config.seed = value.parse().map_err(|_| bad())?,
            _ => {}
        }
    }

    let mut csv = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header = csv.headers().map_err(|e| TraceError::Parse { row: 0, msg: e.to_string() })?;
    if header.iter().ne(TRACE_HEADER) {
        return Err(TraceError::Parse { row: 0, msg: format!("unexpected header {:?}", header.iter().collect::<Vec<_>>()) });
    }
    for (i, rec) in csv.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| TraceError::Parse { row, msg: e.to_string() })?;
        let parsed = parse_row(row, &rec)?;
        if let Some(prev) = trace.rows.last() {
            if parsed.tick <= prev.tick {
                return Err(TraceError::NonMonotonicTick { row, tick: parsed.tick, prev: prev.tick });
            }
            if parsed.time_ms < prev.time_ms {
                return Err(TraceError::NonMonotonicTime { row });
            }
        }
        trace.rows.push(parsed);
    }
    Ok(trace)
}

fn parse_row(row: usize, rec: &csv::StringRecord) -> Result<TraceRow, TraceError> {
    if rec.len() != TRACE_HEADER.len() {
        return Err(TraceError::Parse { row, msg: format!("expected {} fields, found {}", TRACE_HEADER.len(), rec.len()) });
    }
    let num = |i: usize| -> Result<u64, TraceError> {
        rec[i].parse().map_err(|_| TraceError::Parse { row, msg: format!("bad {} '{}'", TRACE_HEADER[i], &rec[i]) })
    };
    let pos = |i: usize| -> Result<Position, TraceError> { Ok(Position::new(num(i)? as usize, num(i + 1)? as usize)) };
    let actor = rec[2].parse().map_err(|_| TraceError::UnknownActor { row, value: rec[2].to_string() })?;
    let event = match &rec[9] {
        "none" => RowEvent::None,
        "reward_captured" => RowEvent::RewardCaptured,
        other => return Err(TraceError::Parse { row, msg: format!("unknown event '{other}'") }),
    };
    let mv = match &rec[10] {
        "none" => None,
        other => Some(other.parse().map_err(|msg| TraceError::Parse { row, msg })?),
    };
    Ok(TraceRow {
        tick: num(0)?,
        time_ms: num(1)?,
        actor,
        player: pos(3)?,
        opponent: pos(5)?,
        nearest_reward: pos(7)?,
        event,
        mv,
    })
}
