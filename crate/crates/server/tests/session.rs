use std::fs;
use std::net::SocketAddr;
use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use futures_util::{SinkExt, StreamExt};
use tokio::net::TcpStream;
use tokio::time::timeout;
use tokio_tungstenite::tungstenite::Message;
use tokio_tungstenite::{connect_async, MaybeTlsStream, WebSocketStream};

use mimic_core::{default_maze, play_game, read_trace, Direction, GameConfig, ScriptedPolicy, Status, TestId, DEFAULT_MAZE_ID};
use mimic_server::protocol::{ClientMessage, Mode, ServerMessage};
use mimic_server::{DataDir, ServerConfig};

/// Player shuttles on the top row; the opponent is sealed off below.
const SAFE_MAZE: &str = "P...R\n#####\nO....\n";
const TICK_MS: u64 = 40;
const WAIT: Duration = Duration::from_secs(10);

type Ws = WebSocketStream<MaybeTlsStream<TcpStream>>;

async fn start(dir: &Path) -> SocketAddr {
    let config = ServerConfig {
        addr: "127.0.0.1:0".parse().unwrap(),
        data_dir: dir.to_path_buf(),
        static_dir: None,
        game: GameConfig { tick_duration_ms: TICK_MS, chase_probability: 0.0, ..GameConfig::default() },
    };
    mimic_server::spawn(config).await.unwrap().0
}

async fn connect(addr: SocketAddr) -> Ws {
    connect_async(format!("ws://{addr}/ws")).await.unwrap().0
}

async fn send(ws: &mut Ws, msg: &ClientMessage) {
    ws.send(Message::Text(serde_json::to_string(msg).unwrap().into())).await.unwrap();
}

async fn recv(ws: &mut Ws) -> ServerMessage {
    loop {
        match timeout(WAIT, ws.next()).await.expect("server reply").expect("open socket").unwrap() {
            Message::Text(t) => return serde_json::from_str(&t).unwrap(),
            _ => continue,
        }
    }
}

/// Skips state frames until a message matching `pred` arrives.
async fn recv_until(ws: &mut Ws, pred: impl Fn(&ServerMessage) -> bool) -> ServerMessage {
    loop {
        let m = recv(ws).await;
        if pred(&m) {
            return m;
        }
    }
}

async fn recv_state(ws: &mut Ws) -> mimic_server::protocol::Snapshot {
    match recv_until(ws, |m| matches!(m, ServerMessage::State(_))).await {
        ServerMessage::State(s) => s,
        _ => unreachable!(),
    }
}

async fn recv_error(ws: &mut Ws) -> String {
    match recv_until(ws, |m| matches!(m, ServerMessage::Error { .. })).await {
        ServerMessage::Error { message } => message,
        _ => unreachable!(),
    }
}

fn hello(mode: Mode, maze: Option<&str>, model: Option<&str>) -> ClientMessage {
    ClientMessage::Hello { mode: Some(mode), maze: maze.map(String::from), model: model.map(String::from), seed: Some(3) }
}

fn data_dir_with_safe_maze() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::create_dir_all(dir.path().join("mazes")).unwrap();
    fs::write(dir.path().join("mazes/safe.txt"), SAFE_MAZE).unwrap();
    dir
}

/// Sends each input and waits two ticks, so every input lands on its own tick.
async fn play(ws: &mut Ws, inputs: &[Direction]) {
    for &d in inputs {
        send(ws, &ClientMessage::Input { direction: d }).await;
        recv_state(ws).await;
        recv_state(ws).await;
    }
}

fn shuttle(n: usize) -> Vec<Direction> {
    (0..n).map(|i| if i % 2 == 0 { Direction::Right } else { Direction::Left }).collect()
}

async fn end_session(ws: &mut Ws) -> (String, usize) {
    send(ws, &ClientMessage::End).await;
    match recv_until(ws, |m| matches!(m, ServerMessage::End { .. })).await {
        ServerMessage::End { outcome, moves, trace_id, .. } => {
            assert_eq!(outcome, "aborted");
            (trace_id.expect("trace persisted"), moves)
        }
        _ => unreachable!(),
    }
}

fn stored_moves(dir: &Path, trace_id: &str) -> Vec<Option<Direction>> {
    let text = fs::read(dir.join(format!("traces/trace_{trace_id}.csv"))).unwrap();
    read_trace(text.as_slice()).unwrap().moves().collect()
}

#[tokio::test]
async fn catalog_only_hello() {
    let dir = data_dir_with_safe_maze();
    let addr = start(dir.path()).await;
    let mut ws = connect(addr).await;
    send(&mut ws, &ClientMessage::Hello { mode: None, maze: None, model: None, seed: None }).await;
    match recv(&mut ws).await {
        ServerMessage::Hello { session_id, catalog, .. } => {
            assert!(session_id.is_none());
            assert_eq!(catalog.mazes, vec!["default".to_string(), "safe".to_string()]);
            assert!(catalog.traces.is_empty() && catalog.models.is_empty());
        }
        other => panic!("unexpected {other:?}"),
    }
    assert!(dir.path().join("traces").is_dir() && dir.path().join("models").is_dir());
}

#[tokio::test]
async fn human_play_round_trip() {
    let dir = data_dir_with_safe_maze();
    let addr = start(dir.path()).await;
    let mut ws = connect(addr).await;
    send(&mut ws, &hello(Mode::HumanPlay, Some("safe"), None)).await;
    match recv(&mut ws).await {
        ServerMessage::Hello { session_id, mode, maze, tick_duration_ms, .. } => {
            assert!(session_id.is_some());
            assert_eq!(mode, Some(Mode::HumanPlay));
            let maze = maze.unwrap();
            assert_eq!((maze.id.as_str(), maze.width, maze.height), ("safe", 5, 3));
            assert_eq!(tick_duration_ms, Some(TICK_MS));
        }
        other => panic!("unexpected {other:?}"),
    }
    let first = recv_state(&mut ws).await;
    assert_eq!((first.tick, first.status), (0, Status::Running));

    let inputs = shuttle(24);
    play(&mut ws, &inputs).await;
    let (trace_id, moves) = end_session(&mut ws).await;
    assert_eq!(moves, inputs.len());
    let expected: Vec<_> = inputs.iter().map(|&d| Some(d)).collect();
    assert_eq!(stored_moves(dir.path(), &trace_id), expected);

    let index: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("index.json")).unwrap()).unwrap();
    assert_eq!(index["traces"][0]["id"], trace_id.as_str());
    assert_eq!(index["traces"][0]["mode"], "human_play");
    assert_eq!(index["traces"][0]["moves"], inputs.len());

    send(&mut ws, &ClientMessage::Input { direction: Direction::Left }).await;
    assert_eq!(recv_error(&mut ws).await, "game over");
}

#[tokio::test]
async fn latest_input_in_a_tick_wins() {
    let dir = data_dir_with_safe_maze();
    let addr = start(dir.path()).await;
    let mut ws = connect(addr).await;
    send(&mut ws, &hello(Mode::HumanPlay, Some("safe"), None)).await;
    recv_state(&mut ws).await;
    for _ in 0..3 {
        // one frame, three messages: they always land inside one tick
        let burst = [Direction::Up, Direction::Left, Direction::Right]
            .map(|d| serde_json::to_string(&ClientMessage::Input { direction: d }).unwrap())
            .join("\n");
        ws.send(Message::Text(burst.into())).await.unwrap();
        recv_state(&mut ws).await;
        recv_state(&mut ws).await;
    }
    let (trace_id, moves) = end_session(&mut ws).await;
    assert_eq!(moves, 3);
    assert_eq!(stored_moves(dir.path(), &trace_id), vec![Some(Direction::Right); 3]);
}

#[tokio::test]
async fn disconnect_persists_partial_trace() {
    let dir = data_dir_with_safe_maze();
    let addr = start(dir.path()).await;
    let mut ws = connect(addr).await;
    send(&mut ws, &hello(Mode::HumanPlay, Some("safe"), None)).await;
    recv_state(&mut ws).await;
    play(&mut ws, &shuttle(5)).await;
    drop(ws);

    let data = dir.path().to_path_buf();
    let stored = timeout(WAIT, async move {
        loop {
            let files: Vec<_> = fs::read_dir(data.join("traces")).unwrap().filter_map(Result::ok).collect();
            if let Some(f) = files.first() {
                let trace = read_trace(fs::read(f.path()).unwrap().as_slice()).unwrap();
                if trace.rows.len() == 5 {
                    return trace;
                }
            }
            tokio::time::sleep(Duration::from_millis(20)).await;
        }
    })
    .await
    .expect("trace written after disconnect");
    assert_eq!(stored.maze_ref, "safe");
}

#[tokio::test]
async fn protocol_errors() {
    let dir = data_dir_with_safe_maze();
    let addr = start(dir.path()).await;
    let mut ws = connect(addr).await;

    send(&mut ws, &ClientMessage::Input { direction: Direction::Up }).await;
    assert_eq!(recv_error(&mut ws).await, "no active session");
    send(&mut ws, &ClientMessage::End).await;
    assert_eq!(recv_error(&mut ws).await, "no active session");

    ws.send(Message::Text("{\"type\":\"warp\"}".into())).await.unwrap();
    assert!(recv_error(&mut ws).await.starts_with("bad message"));

    send(&mut ws, &hello(Mode::BotWatch, None, Some("t3-9-000000000000"))).await;
    assert_eq!(recv_error(&mut ws).await, "model not found");

    send(&mut ws, &hello(Mode::HumanPlay, Some("nowhere"), None)).await;
    assert_eq!(recv_error(&mut ws).await, "maze not found");

    send(&mut ws, &ClientMessage::TrainRequest { traces: vec!["x".into()], config: "t9".into() }).await;
    assert!(recv_error(&mut ws).await.contains("t3-9"));

    send(&mut ws, &ClientMessage::TrainRequest { traces: vec!["missing".into()], config: "t3-9".into() }).await;
    assert_eq!(recv_error(&mut ws).await, "trace not found");
}

/// Stores scripted traces and returns their ids.
fn seed_traces(dir: &Path, n: u64) -> Vec<String> {
    let store = DataDir::open(dir).unwrap();
    let maze = Arc::new(default_maze());
    (0..n)
        .map(|seed| {
            let t = play_game(ScriptedPolicy::CautiousCollector { flee_radius: 4 }, maze.clone(), DEFAULT_MAZE_ID, GameConfig::with_seed(seed)).unwrap();
            store.save_trace(&t, Mode::HumanPlay, "won", 0).unwrap();
            t.game_id
        })
        .collect()
}

async fn train(ws: &mut Ws, traces: &[String], config: &str) -> ServerMessage {
    send(ws, &ClientMessage::TrainRequest { traces: traces.to_vec(), config: config.into() }).await;
    recv_until(ws, |m| matches!(m, ServerMessage::TrainResult { .. } | ServerMessage::Error { .. })).await
}

#[tokio::test]
async fn training_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let ids = seed_traces(dir.path(), 4);
    let addr = start(dir.path()).await;
    let mut ws = connect(addr).await;

    let ServerMessage::TrainResult { model_id, config, report } = train(&mut ws, &ids, "t3-9").await else { panic!("training failed") };
    assert_eq!(config, "t3-9");
    assert!(model_id.starts_with("t3-9-"));
    assert_eq!(report.k, 10);
    assert_eq!(report.accuracy, 1.0);
    let model = dir.path().join(format!("models/{model_id}.json"));
    let first = fs::read(&model).unwrap();
    assert!(dir.path().join(format!("models/{model_id}.rules.txt")).exists());
    assert!(dir.path().join(format!("models/{model_id}.report.json")).exists());

    // same traces in another order: same id, same bytes
    let mut reversed = ids.clone();
    reversed.reverse();
    let ServerMessage::TrainResult { model_id: again, .. } = train(&mut ws, &reversed, "t3-9").await else { panic!("retraining failed") };
    assert_eq!(again, model_id);
    assert_eq!(fs::read(&model).unwrap(), first);

    send(&mut ws, &ClientMessage::Hello { mode: None, maze: None, model: None, seed: None }).await;
    match recv_until(&mut ws, |m| matches!(m, ServerMessage::Hello { .. })).await {
        ServerMessage::Hello { catalog, .. } => assert_eq!(catalog.models, vec![model_id]),
        _ => unreachable!(),
    }
}

#[tokio::test]
async fn single_class_training_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let store = DataDir::open(dir.path()).unwrap();
    let mut t = play_game(ScriptedPolicy::GreedyCollector, Arc::new(default_maze()), DEFAULT_MAZE_ID, GameConfig::with_seed(0)).unwrap();
    t.rows.truncate(1);
    t.game_id = "short".into();
    store.save_trace(&t, Mode::HumanPlay, "aborted", 0).unwrap();
    drop(store);
    let addr = start(dir.path()).await;
    let mut ws = connect(addr).await;
    match train(&mut ws, &["short".to_string()], "t3-9").await {
        ServerMessage::Error { message } => assert_eq!(message, "dataset has one class"),
        other => panic!("unexpected {other:?}"),
    }
}

#[tokio::test]
async fn bot_watch_streams_decisions() {
    let dir = tempfile::tempdir().unwrap();
    let ids = seed_traces(dir.path(), 4);
    let (model_id, _) = DataDir::open(dir.path()).unwrap().train_from_traces(&ids, TestId::T3_9).unwrap();
    let addr = start(dir.path()).await;
    let mut ws = connect(addr).await;

    send(&mut ws, &hello(Mode::BotWatch, None, Some(&model_id))).await;
    match recv(&mut ws).await {
        ServerMessage::Hello { mode, maze, .. } => {
            assert_eq!(mode, Some(Mode::BotWatch));
            assert_eq!(maze.unwrap().id, DEFAULT_MAZE_ID);
        }
        other => panic!("unexpected {other:?}"),
    }
    let initial = recv_state(&mut ws).await;
    assert!(initial.decision.is_none());
    for _ in 0..5 {
        let s = recv_state(&mut ws).await;
        let d = s.decision.expect("bot states carry the decision");
        assert!(["go_ahead", "get_away"].contains(&d.class.as_str()));
        assert!(["risky", "dangerous", "safe", "easy"].contains(&d.situation.as_str()));
        assert!(["wise", "brave", "prudent", "passive"].contains(&d.attitude.as_str()));
        assert!(["good", "scared", "kamikaze", "bad"].contains(&d.movement.as_str()));
    }
    send(&mut ws, &ClientMessage::Input { direction: Direction::Up }).await;
    assert_eq!(recv_error(&mut ws).await, "input rejected: bot_watch session");
}

#[tokio::test]
async fn concurrent_sessions_are_independent() {
    let dir = data_dir_with_safe_maze();
    let addr = start(dir.path()).await;
    let mut a = connect(addr).await;
    let mut b = connect(addr).await;
    send(&mut a, &hello(Mode::HumanPlay, Some("safe"), None)).await;
    send(&mut b, &hello(Mode::HumanPlay, Some("safe"), None)).await;
    recv_state(&mut a).await;
    recv_state(&mut b).await;

    let (ia, ib) = (shuttle(4), vec![Direction::Up; 6]);
    tokio::join!(play(&mut a, &ia), play(&mut b, &ib));
    let (ta, ma) = end_session(&mut a).await;
    let (tb, mb) = end_session(&mut b).await;
    assert_ne!(ta, tb);
    assert_eq!((ma, mb), (4, 6));
    assert_eq!(stored_moves(dir.path(), &ta), ia.iter().map(|&d| Some(d)).collect::<Vec<_>>());
    assert_eq!(stored_moves(dir.path(), &tb), ib.iter().map(|&d| Some(d)).collect::<Vec<_>>());
}
