//! Grid maze-chase game: one player collecting rewards, one opponent that
//! roams and chases.
//!
//! The simulation is turn based. Each tick the player moves first, then the
//! opponent; capture is checked after each sub-move so that two entities can
//! never swap cells unnoticed. All randomness flows from a seeded ChaCha
//! generator held inside [`GameState`], so a game is fully reproducible from
//! `(maze, config, player moves)`.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WorldError {
    #[error("maze parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("spawn on obstacle at {0}")]
    SpawnOnObstacle(Position),
    #[error("overlapping spawns at {0}")]
    OverlappingSpawns(Position),
    #[error("position {0} out of bounds")]
    OutOfBounds(Position),
    #[error("unreachable reward at {0}")]
    UnreachableReward(Position),
    #[error("maze has no rewards")]
    NoRewardSpawns,
    #[error("invalid game config: {0}")]
    InvalidConfig(String),
    #[error("game over")]
    GameOver,
    #[error("no rewards")]
    NoRewards,
}

/// A cell coordinate. `x` grows to the right, `y` grows downwards.
///
/// Ordering is row-major (`y` first, then `x`), which is also the tie-break
/// order used when several rewards are equally close.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Position {
    pub x: usize,
    pub y: usize,
}

impl Position {
    pub const fn new(x: usize, y: usize) -> Self {
        Self { x, y }
    }

    /// Manhattan distance in cells.
    pub fn manhattan(self, other: Position) -> usize {
        self.x.abs_diff(other.x) + self.y.abs_diff(other.y)
    }

    /// The neighbouring cell in `dir`, if it lies inside a `width` x `height` grid.
    pub fn neighbor(self, dir: Direction, width: usize, height: usize) -> Option<Position> {
        let (dx, dy) = dir.delta();
        let x = self.x.checked_add_signed(dx)?;
        let y = self.y.checked_add_signed(dy)?;
        (x < width && y < height).then_some(Position { x, y })
    }
}

impl Ord for Position {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.y, self.x).cmp(&(other.y, other.x))
    }
}

impl PartialOrd for Position {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Right,
    Down,
    Left,
}

impl Direction {
    /// Canonical order, used for every tie-break in the crate.
    pub const ALL: [Direction; 4] = [Direction::Up, Direction::Right, Direction::Down, Direction::Left];

    pub fn delta(self) -> (isize, isize) {
        match self {
            Direction::Up => (0, -1),
            Direction::Right => (1, 0),
            Direction::Down => (0, 1),
            Direction::Left => (-1, 0),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Up => "up",
            Direction::Right => "right",
            Direction::Down => "down",
            Direction::Left => "left",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "up" => Ok(Direction::Up),
            "right" => Ok(Direction::Right),
            "down" => Ok(Direction::Down),
            "left" => Ok(Direction::Left),
            other => Err(format!("unknown direction '{other}'")),
        }
    }
}

/// Static layout of a level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Maze {
    width: usize,
    height: usize,
    walls: Vec<bool>,
    reward_spawns: BTreeSet<Position>,
    player_start: Position,
    opponent_start: Position,
}

impl Maze {
    /// Builds and validates a maze.
    pub fn new(
        width: usize,
        height: usize,
        obstacles: impl IntoIterator<Item = Position>,
        reward_spawns: impl IntoIterator<Item = Position>,
        player_start: Position,
        opponent_start: Position,
    ) -> Result<Self, WorldError> {
        let mut walls = vec![false; width * height];
        for p in obstacles {
            if p.x >= width || p.y >= height {
                return Err(WorldError::OutOfBounds(p));
            }
            walls[p.y * width + p.x] = true;
        }
        let maze = Maze {
            width,
            height,
            walls,
            reward_spawns: reward_spawns.into_iter().collect(),
            player_start,
            opponent_start,
        };
        maze.validate()?;
        Ok(maze)
    }

    /// Parses the text format: `#` obstacle, `.` floor, `R` reward,
    /// `P` player start, `O` opponent start; one row per line.
    pub fn parse(text: &str) -> Result<Self, WorldError> {
        let mut obstacles = Vec::new();
        let mut rewards = Vec::new();
        let mut player = None;
        let mut opponent = None;
        let mut width = None;
        let mut height = 0;
        for (row, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| WorldError::Parse { line: row + 1, msg };
            let len = line.chars().count();
            match width {
                None => width = Some(len),
                Some(w) if w != len => return Err(err(format!("row has {len} cells, expected {w}"))),
                _ => {}
            }
            for (x, c) in line.chars().enumerate() {
                let p = Position::new(x, height);
                match c {
                    '#' => obstacles.push(p),
                    '.' => {}
                    'R' => rewards.push(p),
                    'P' if player.is_none() => player = Some(p),
                    'O' if opponent.is_none() => opponent = Some(p),
                    'P' | 'O' => return Err(err(format!("duplicate '{c}'"))),
                    other => return Err(err(format!("unknown cell '{other}'"))),
                }
            }
            height += 1;
        }
        let width = width.ok_or(WorldError::Parse { line: 1, msg: "empty maze".into() })?;
        let player = player.ok_or(WorldError::Parse { line: height, msg: "missing 'P'".into() })?;
        let opponent = opponent.ok_or(WorldError::Parse { line: height, msg: "missing 'O'".into() })?;
        Maze::new(width, height, obstacles, rewards, player, opponent)
    }

    /// Inverse of [`Maze::parse`].
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity((self.width + 1) * self.height);
        for y in 0..self.height {
            for x in 0..self.width {
                let p = Position::new(x, y);
                let c = if self.is_obstacle(p) {
                    '#'
                } else if p == self.player_start {
                    'P'
                } else if p == self.opponent_start {
                    'O'
                } else if self.reward_spawns.contains(&p) {
                    'R'
                } else {
                    '.'
                };
                out.push(c);
            }
            out.push('\n');
        }
        out
    }

    /// Adds walls without revalidating, for states validation forbids.
    #[cfg(test)]
    pub(crate) fn with_walls_unchecked(mut self, extra: &[Position]) -> Self {
        for &p in extra {
            let i = self.index(p);
            self.walls[i] = true;
        }
        self
    }

    fn validate(&self) -> Result<(), WorldError> {
        if self.width == 0 || self.height == 0 {
            return Err(WorldError::Parse { line: 1, msg: "empty maze".into() });
        }
        for &p in [self.player_start, self.opponent_start].iter().chain(&self.reward_spawns) {
            if !self.in_bounds(p) {
                return Err(WorldError::OutOfBounds(p));
            }
            if self.is_obstacle(p) {
                return Err(WorldError::SpawnOnObstacle(p));
            }
        }
        if self.player_start == self.opponent_start {
            return Err(WorldError::OverlappingSpawns(self.player_start));
        }
        for &p in &[self.player_start, self.opponent_start] {
            if self.reward_spawns.contains(&p) {
                return Err(WorldError::OverlappingSpawns(p));
            }
        }
        if self.reward_spawns.is_empty() {
            return Err(WorldError::NoRewardSpawns);
        }
        let reach = self.bfs_distances(self.player_start);
        if let Some(&p) = self.reward_spawns.iter().find(|p| reach[self.index(**p)].is_none()) {
            return Err(WorldError::UnreachableReward(p));
        }
        Ok(())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn player_start(&self) -> Position {
        self.player_start
    }

    pub fn opponent_start(&self) -> Position {
        self.opponent_start
    }

    pub fn reward_spawns(&self) -> &BTreeSet<Position> {
        &self.reward_spawns
    }

    /// Largest Manhattan distance the grid can express.
    pub fn max_distance(&self) -> usize {
        self.width + self.height
    }

    pub fn in_bounds(&self, p: Position) -> bool {
        p.x < self.width && p.y < self.height
    }

    /// Out-of-bounds cells count as obstacles.
    pub fn is_obstacle(&self, p: Position) -> bool {
        !self.in_bounds(p) || self.walls[self.index(p)]
    }

    pub fn obstacles(&self) -> impl Iterator<Item = Position> + '_ {
        (0..self.height)
            .flat_map(move |y| (0..self.width).map(move |x| Position::new(x, y)))
            .filter(move |p| self.walls[self.index(*p)])
    }

    pub fn floor_cells(&self) -> impl Iterator<Item = Position> + '_ {
        (0..self.height)
            .flat_map(move |y| (0..self.width).map(move |x| Position::new(x, y)))
            .filter(move |p| !self.walls[self.index(*p)])
    }

    fn index(&self, p: Position) -> usize {
        p.y * self.width + p.x
    }

    /// Directions leading from `p` to an in-bounds floor cell, in canonical order.
    pub fn open_directions(&self, p: Position) -> Vec<Direction> {
        Direction::ALL
            .into_iter()
            .filter(|&d| p.neighbor(d, self.width, self.height).is_some_and(|q| !self.is_obstacle(q)))
            .collect()
    }

    /// Destination of a move, or `None` if it would hit a wall or the border.
    pub fn destination(&self, p: Position, dir: Direction) -> Option<Position> {
        p.neighbor(dir, self.width, self.height).filter(|q| !self.is_obstacle(*q))
    }

    /// Breadth-first path lengths from `from` to every cell (row-major),
    /// `None` for unreachable cells and obstacles.
    pub fn bfs_distances(&self, from: Position) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.width * self.height];
        if self.is_obstacle(from) {
            return dist;
        }
        dist[self.index(from)] = Some(0);
        let mut queue = VecDeque::from([from]);
        while let Some(p) = queue.pop_front() {
            let d = dist[self.index(p)].unwrap_or(0);
            for dir in Direction::ALL {
                if let Some(q) = self.destination(p, dir) {
                    let i = self.index(q);
                    if dist[i].is_none() {
                        dist[i] = Some(d + 1);
                        queue.push_back(q);
                    }
                }
            }
        }
        dist
    }

    /// Length of the shortest obstacle-aware path, if any.
    pub fn path_length(&self, from: Position, to: Position) -> Option<u32> {
        self.bfs_distances(from).get(self.index(to)).copied().flatten()
    }

    /// First move of a shortest obstacle-aware path from `from` to `to`.
    ///
    /// Among several shortest paths the first direction in canonical order
    /// wins. Returns `None` when `from == to` or `to` is unreachable.
    pub fn first_step_towards(&self, from: Position, to: Position) -> Option<Direction> {
        if from == to || !self.in_bounds(to) {
            return None;
        }
        let dist = self.bfs_distances(to);
        let here = dist[self.index(from)]?;
        Direction::ALL.into_iter().find(|&d| {
            self.destination(from, d)
                .and_then(|q| dist[self.index(q)])
                .is_some_and(|dq| dq + 1 == here)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GameConfig {
    pub tick_duration_ms: u64,
    pub chase_probability: f64,
    pub max_game_ms: u64,
    pub seed: u64,
}

impl Default for GameConfig {
    fn default() -> Self {
        Self { tick_duration_ms: 150, chase_probability: 0.8, max_game_ms: 180_000, seed: 0 }
    }
}

impl GameConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), WorldError> {
        if self.tick_duration_ms == 0 {
            return Err(WorldError::InvalidConfig("tick_duration_ms must be > 0".into()));
        }
        if !(0.0..=1.0).contains(&self.chase_probability) {
            return Err(WorldError::InvalidConfig("chase_probability must lie in [0, 1]".into()));
        }
        Ok(())
    }

    /// Upper bound on the number of steps any game can take.
    pub fn max_steps(&self) -> u64 {
        self.max_game_ms.div_ceil(self.tick_duration_ms) + 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Running,
    Won,
    Captured,
}

impl Status {
    pub fn is_terminal(self) -> bool {
        self != Status::Running
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Running => "running",
            Status::Won => "won",
            Status::Captured => "captured",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Entity {
    Player,
    Opponent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GameEvent {
    RewardCaptured { at: Position },
    PlayerCaptured { at: Position },
    Won,
    TimedOut,
}

/// Complete snapshot of a running game.
#[derive(Debug, Clone)]
pub struct GameState {
    maze: Arc<Maze>,
    config: GameConfig,
    player: Position,
    opponent: Position,
    rewards_remaining: BTreeSet<Position>,
    tick: u64,
    elapsed_ms: u64,
    status: Status,
    rng: ChaCha8Rng,
}

impl GameState {
    pub fn new(maze: impl Into<Arc<Maze>>, config: GameConfig) -> Result<Self, WorldError> {
        config.validate()?;
        let maze = maze.into();
        Ok(GameState {
            player: maze.player_start,
            opponent: maze.opponent_start,
            rewards_remaining: maze.reward_spawns.clone(),
            maze,
            config,
            tick: 0,
            elapsed_ms: 0,
            status: Status::Running,
            rng: ChaCha8Rng::seed_from_u64(config.seed),
        })
    }

    pub fn maze(&self) -> &Maze {
        &self.maze
    }

    pub fn maze_arc(&self) -> &Arc<Maze> {
        &self.maze
    }

    pub fn config(&self) -> &GameConfig {
        &self.config
    }

    pub fn player(&self) -> Position {
        self.player
    }

    pub fn opponent(&self) -> Position {
        self.opponent
    }

    pub fn rewards_remaining(&self) -> &BTreeSet<Position> {
        &self.rewards_remaining
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn elapsed_ms(&self) -> u64 {
        self.elapsed_ms
    }

    pub fn status(&self) -> Status {
        self.status
    }

    pub fn legal_moves(&self, who: Entity) -> Vec<Direction> {
        if self.status.is_terminal() {
            return Vec::new();
        }
        let at = match who {
            Entity::Player => self.player,
            Entity::Opponent => self.opponent,
        };
        self.maze.open_directions(at)
    }

    /// Reward closest (Manhattan) to `from`; ties go to the lowest `y`, then `x`.
    pub fn nearest_reward(&self, from: Position) -> Result<Position, WorldError> {
        // BTreeSet iterates row-major, so min_by_key keeps the first of equals.
        self.rewards_remaining
            .iter()
            .copied()
            .min_by_key(|r| from.manhattan(*r))
            .ok_or(WorldError::NoRewards)
    }

    /// Chooses the opponent's move: with probability `chase_probability` the
    /// first step of a shortest path to the player, otherwise a uniformly
    /// random legal direction. Consumes generator state.
    pub fn opponent_policy(&mut self) -> Option<Direction> {
        let legal = self.legal_moves(Entity::Opponent);
        if legal.is_empty() {
            return None;
        }
        let roll: f64 = self.rng.gen();
        if roll < self.config.chase_probability {
            if let Some(d) = self.maze.first_step_towards(self.opponent, self.player) {
                return Some(d);
            }
        }
        Some(legal[self.rng.gen_range(0..legal.len())])
    }

    /// Advances the game by one tick.
    pub fn step(&mut self, player_move: Option<Direction>) -> Result<Vec<GameEvent>, WorldError> {
        if self.status.is_terminal() {
            return Err(WorldError::GameOver);
        }
        let mut events = Vec::new();
        self.tick += 1;
        self.elapsed_ms += self.config.tick_duration_ms;

        if let Some(to) = player_move.and_then(|d| self.maze.destination(self.player, d)) {
            self.player = to;
        }
        if self.player == self.opponent {
            self.status = Status::Captured;
            events.push(GameEvent::PlayerCaptured { at: self.player });
            return Ok(events);
        }
        if self.rewards_remaining.remove(&self.player) {
            events.push(GameEvent::RewardCaptured { at: self.player });
            if self.rewards_remaining.is_empty() {
                self.status = Status::Won;
                events.push(GameEvent::Won);
                return Ok(events);
            }
        }

        if let Some(to) = self.opponent_policy().and_then(|d| self.maze.destination(self.opponent, d)) {
            self.opponent = to;
        }
        if self.player == self.opponent {
            self.status = Status::Captured;
            events.push(GameEvent::PlayerCaptured { at: self.player });
            return Ok(events);
        }

        if self.elapsed_ms > self.config.max_game_ms {
            self.status = Status::Captured;
            events.push(GameEvent::TimedOut);
        }
        Ok(events)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn open(w: usize, h: usize, extra: &[(usize, usize, char)]) -> String {
        let mut rows = vec![vec!['.'; w]; h];
        for &(x, y, c) in extra {
            rows[y][x] = c;
        }
        rows.into_iter().map(|r| r.into_iter().collect::<String>() + "\n").collect()
    }

    #[test]
    fn new_game_initial_state() {
        let text = open(5, 5, &[(0, 0, 'P'), (4, 4, 'O'), (1, 2, 'R'), (3, 1, 'R'), (4, 0, 'R')]);
        let maze = Maze::parse(&text).unwrap();
        let s = GameState::new(maze, GameConfig::with_seed(42)).unwrap();
        assert_eq!(s.rewards_remaining().len(), 3);
        assert_eq!(s.status(), Status::Running);
        assert_eq!((s.tick(), s.elapsed_ms()), (0, 0));
        assert_eq!(s.player(), Position::new(0, 0));
        assert_eq!(s.opponent(), Position::new(4, 4));
    }

    #[test]
    fn rejects_walled_off_reward() {
        let text = "P..#.\n...#R\n..O##\n";
        assert_eq!(Maze::parse(text), Err(WorldError::UnreachableReward(Position::new(4, 1))));
    }

    #[test]
    fn rejects_spawn_on_obstacle() {
        let err = Maze::new(3, 3, [Position::new(0, 0)], [Position::new(2, 2)], Position::new(0, 0), Position::new(1, 1));
        assert_eq!(err, Err(WorldError::SpawnOnObstacle(Position::new(0, 0))));
    }

    #[test]
    fn parse_round_trips() {
        let text = "P.#\n.R.\n#.O\n";
        assert_eq!(Maze::parse(text).unwrap().to_text(), text);
        assert!(matches!(Maze::parse("P.\n.\n"), Err(WorldError::Parse { line: 2, .. })));
        assert!(matches!(Maze::parse("PX\nRO\n"), Err(WorldError::Parse { line: 1, .. })));
    }

    #[test]
    fn legal_moves_corner_and_walled() {
        let s = GameState::new(Maze::parse(&open(4, 4, &[(0, 0, 'P'), (3, 3, 'O'), (2, 2, 'R')])).unwrap(), GameConfig::default()).unwrap();
        assert_eq!(s.legal_moves(Entity::Player), vec![Direction::Right, Direction::Down]);

        let s = GameState::new(Maze::parse("#R#\n#P#\n###\nO..\n").unwrap(), GameConfig::default()).unwrap();
        assert_eq!(s.legal_moves(Entity::Player).len(), 1);
    }

    #[test]
    fn legal_moves_empty_when_terminal() {
        let mut s = GameState::new(Maze::parse("PRO\n...\n").unwrap(), GameConfig::default()).unwrap();
        s.step(Some(Direction::Right)).unwrap();
        assert_eq!(s.status(), Status::Won);
        assert!(s.legal_moves(Entity::Player).is_empty());
        assert_eq!(s.step(None), Err(WorldError::GameOver));
    }

    #[test]
    fn reward_capture_emits_event() {
        let text = open(6, 6, &[(2, 2, 'P'), (3, 2, 'R'), (0, 5, 'R'), (5, 5, 'O')]);
        let mut s = GameState::new(Maze::parse(&text).unwrap(), GameConfig::default()).unwrap();
        let ev = s.step(Some(Direction::Right)).unwrap();
        assert_eq!(ev[0], GameEvent::RewardCaptured { at: Position::new(3, 2) });
        assert!(!s.rewards_remaining().contains(&Position::new(3, 2)));
        assert_eq!(s.status(), Status::Running);
        assert_eq!(s.elapsed_ms(), 150);
    }

    #[test]
    fn moving_onto_opponent_captures() {
        let mut s = GameState::new(Maze::parse("PO.\n..R\n").unwrap(), GameConfig::default()).unwrap();
        let ev = s.step(Some(Direction::Right)).unwrap();
        assert_eq!(s.status(), Status::Captured);
        assert_eq!(ev, vec![GameEvent::PlayerCaptured { at: Position::new(1, 0) }]);
        assert_eq!(s.rewards_remaining().len(), 1);
    }

    #[test]
    fn illegal_move_stays() {
        let mut s = GameState::new(Maze::parse("P#R\n...\n..O\n").unwrap(), GameConfig { chase_probability: 0.0, ..GameConfig::default() }).unwrap();
        s.step(Some(Direction::Right)).unwrap();
        assert_eq!(s.player(), Position::new(0, 0));
        s.step(Some(Direction::Up)).unwrap();
        assert_eq!(s.player(), Position::new(0, 0));
    }

    #[test]
    fn timeout_counts_as_capture() {
        let cfg = GameConfig { tick_duration_ms: 100, max_game_ms: 250, chase_probability: 0.0, seed: 3 };
        let mut s = GameState::new(Maze::parse(&open(9, 9, &[(0, 0, 'P'), (8, 8, 'O'), (8, 0, 'R')])).unwrap(), cfg).unwrap();
        let mut steps = 0;
        while s.status() == Status::Running {
            s.step(None).unwrap();
            steps += 1;
        }
        assert!(steps <= cfg.max_steps());
        assert_eq!(s.elapsed_ms(), 300);
        assert_eq!(s.status(), Status::Captured);
    }

    #[test]
    fn opponent_chases_along_corridor() {
        let cfg = GameConfig { chase_probability: 1.0, ..GameConfig::default() };
        let mut s = GameState::new(Maze::parse("O..P\n...R\n").unwrap(), cfg).unwrap();
        assert_eq!(s.opponent_policy(), Some(Direction::Right));
    }

    #[test]
    fn opponent_random_is_reproducible() {
        let cfg = GameConfig { chase_probability: 0.0, seed: 9, ..GameConfig::default() };
        let maze = Arc::new(Maze::parse(&open(5, 5, &[(0, 0, 'P'), (2, 2, 'O'), (4, 4, 'R')])).unwrap());
        let run = || {
            let mut s = GameState::new(maze.clone(), cfg).unwrap();
            (0..20).map(|_| s.opponent_policy()).collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn boxed_in_opponent_stays() {
        let mut s = GameState::new(Maze::parse(".#..\n#O#R\n.#P.\n").unwrap(), GameConfig::default()).unwrap();
        assert_eq!(s.opponent_policy(), None);
        s.step(None).unwrap();
        assert_eq!(s.opponent(), Position::new(1, 1));
    }

    #[test]
    fn nearest_reward_tie_breaks() {
        let s = GameState::new(Maze::parse(&open(6, 6, &[(0, 0, 'P'), (3, 3, 'O'), (2, 0, 'R'), (5, 5, 'R')])).unwrap(), GameConfig::default()).unwrap();
        assert_eq!(s.nearest_reward(Position::new(0, 0)), Ok(Position::new(2, 0)));

        let s = GameState::new(Maze::parse(&open(6, 6, &[(0, 0, 'P'), (5, 5, 'O'), (1, 2, 'R'), (2, 1, 'R')])).unwrap(), GameConfig::default()).unwrap();
        assert_eq!(s.nearest_reward(Position::new(0, 0)), Ok(Position::new(2, 1)));

        let s = GameState::new(Maze::parse("P.R\n..O\n").unwrap(), GameConfig::default()).unwrap();
        assert_eq!(s.nearest_reward(Position::new(0, 1)), Ok(Position::new(2, 0)));
    }

    #[test]
    fn first_step_prefers_canonical_order() {
        let maze = Maze::parse(&open(5, 5, &[(0, 0, 'P'), (4, 4, 'O'), (2, 2, 'R')])).unwrap();
        // Right and Down are both shortest; Right comes first canonically.
        assert_eq!(maze.first_step_towards(Position::new(0, 0), Position::new(2, 2)), Some(Direction::Right));
        assert_eq!(maze.first_step_towards(Position::new(2, 2), Position::new(2, 2)), None);
    }
}
