use std::collections::BTreeMap;
use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use thiserror::Error;

use mimic_core::eval::cross_validate;
use mimic_core::trace::replay;
use mimic_core::tree::{induce_with, InduceConfig, SplitCriterion};
use mimic_core::{
    build_dataset, default_maze, read_trace, run_bot, simulate, write_arff, write_trace, ClassLabel, Dataset, DecisionTree, GameConfig,
    Maze, Outcome, ScriptedPolicy, Status, TestId, Trace, DEFAULT_MAZE_ID,
};
use mimic_server::ServerConfig;

use crate::{Command, GameArgs};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

fn data<E: std::fmt::Display>(context: impl std::fmt::Display) -> impl FnOnce(E) -> CliError {
    move |e| CliError::Data(format!("{context}: {e}"))
}

fn parse_config(s: &str) -> Result<TestId, CliError> {
    s.parse().map_err(|e: mimic_core::PerceptionError| CliError::Usage(e.to_string()))
}

/// `(id, maze)`; the id is the file stem, or the bundled maze's id.
fn load_maze(path: Option<&Path>) -> Result<(String, Maze), CliError> {
    match path {
        None => Ok((DEFAULT_MAZE_ID.to_string(), default_maze())),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(data(p.display()))?;
            let maze = Maze::parse(&text).map_err(data(p.display()))?;
            let id = p.file_stem().and_then(|s| s.to_str()).unwrap_or("maze").to_string();
            Ok((id, maze))
        }
    }
}

fn write_traces(dir: &Path, traces: &[Trace]) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(data(dir.display()))?;
    for t in traces {
        let path = dir.join(t.file_name());
        let mut out = BufWriter::new(fs::File::create(&path).map_err(data(path.display()))?);
        write_trace(t, &mut out).map_err(data(path.display()))?;
        out.flush().map_err(data(path.display()))?;
    }
    Ok(())
}

/// Directory (all `*.csv` inside) or glob pattern, sorted by path.
fn trace_files(spec: &str) -> Result<Vec<PathBuf>, CliError> {
    let dir = Path::new(spec);
    let mut files: Vec<PathBuf> = if dir.is_dir() {
        fs::read_dir(dir)
            .map_err(data(spec))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|e| e == "csv"))
            .collect()
    } else {
        glob::glob(spec).map_err(|e| CliError::Usage(format!("bad pattern '{spec}': {e}")))?.filter_map(Result::ok).collect()
    };
    files.sort();
    if files.is_empty() {
        return Err(CliError::Data(format!("no trace files match '{spec}'")));
    }
    Ok(files)
}

fn summary(outcomes: &[(bool, u64)]) -> String {
    let n = outcomes.len();
    let won = outcomes.iter().filter(|o| o.0).count();
    let mean = outcomes.iter().map(|o| o.1).sum::<u64>() as f64 / n as f64;
    format!("{n} games: won {won} ({:.1}%), mean duration {mean:.0} ms", 100.0 * won as f64 / n as f64)
}

pub fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Simulate { game, policy, flee_radius, out } => cmd_simulate(&game, &policy, flee_radius, &out),
        Command::BuildDataset { traces, config, maze, out } => cmd_build_dataset(&traces, &config, &maze, &out),
        Command::Train { dataset, out, gain_ratio, stamp } => cmd_train(&dataset, &out, gain_ratio, stamp),
        Command::Evaluate { dataset, k, seed, out } => cmd_evaluate(&dataset, k, seed, out.as_deref()),
        Command::RunBot { model, config, game, out } => cmd_run_bot(&model, &config, &game, out.as_deref()),
        Command::Serve { addr, data_dir, static_dir } => {
            let config = ServerConfig { addr, data_dir, static_dir, ..ServerConfig::default() };
            let rt = tokio::runtime::Runtime::new().map_err(data("runtime"))?;
            rt.block_on(mimic_server::serve(config)).map_err(data("server"))
        }
    }
}

fn cmd_simulate(game: &GameArgs, policy: &str, flee_radius: usize, out: &Path) -> Result<(), CliError> {
    if game.games == 0 {
        return Err(CliError::Usage("nothing to simulate".into()));
    }
    let mut policy: ScriptedPolicy = policy.parse().map_err(CliError::Usage)?;
    if let ScriptedPolicy::CautiousCollector { flee_radius: r } = &mut policy {
        *r = flee_radius;
    }
    let (maze_id, maze) = load_maze(game.maze.as_deref())?;
    let traces = simulate(policy, Arc::new(maze.clone()), &maze_id, GameConfig::with_seed(game.seed), game.games).map_err(data("simulate"))?;
    write_traces(out, &traces)?;
    let outcomes = traces
        .iter()
        .map(|t| replay(t, &maze).map(|s| (s.status() == Status::Won, s.elapsed_ms())))
        .collect::<Result<Vec<_>, _>>()
        .map_err(data("replay"))?;
    println!("{policy}: {} -> {}", summary(&outcomes), out.display());
    Ok(())
}

fn cmd_build_dataset(traces: &str, config: &str, extra_mazes: &[PathBuf], out: &Path) -> Result<(), CliError> {
    let cfg = parse_config(config)?;
    let mut mazes = BTreeMap::from([(DEFAULT_MAZE_ID.to_string(), default_maze())]);
    for p in extra_mazes {
        let (id, m) = load_maze(Some(p))?;
        mazes.insert(id, m);
    }
    let traces = trace_files(traces)?
        .iter()
        .map(|p| fs::File::open(p).map_err(data(p.display())).and_then(|f| read_trace(BufReader::new(f)).map_err(data(p.display()))))
        .collect::<Result<Vec<_>, _>>()?;
    let d = build_dataset(cfg, &traces, &mazes).map_err(data("build-dataset"))?;
    if let Some(dir) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(data(dir.display()))?;
    }
    if out.extension().is_some_and(|e| e == "arff") {
        let f = fs::File::create(out).map_err(data(out.display()))?;
        write_arff(&d, BufWriter::new(f)).map_err(data(out.display()))?;
    } else {
        d.save_csv(out).map_err(data(out.display()))?;
    }
    let [go, get] = d.class_counts();
    println!(
        "{}: {} instances, {} columns ({} {go}, {} {get}) -> {}",
        cfg.as_str(),
        d.len(),
        d.schema.len() + 1,
        ClassLabel::GoAhead.as_str(),
        ClassLabel::GetAway.as_str(),
        out.display()
    );
    Ok(())
}

/// `model.json` → `model.rules.txt`.
pub fn rules_path(model: &Path) -> PathBuf {
    model.with_extension("rules.txt")
}

fn cmd_train(dataset: &Path, out: &Path, gain_ratio: bool, stamp: bool) -> Result<(), CliError> {
    let d = Dataset::load(dataset).map_err(data(dataset.display()))?;
    let criterion = if gain_ratio { SplitCriterion::GainRatio } else { SplitCriterion::InformationGain };
    let mut tree = induce_with(&d, InduceConfig { criterion }).map_err(data("train"))?;
    if stamp {
        tree.metadata.induced_at = SystemTime::now().duration_since(UNIX_EPOCH).ok().map(|t| t.as_secs());
    }
    fs::write(out, tree.to_model_string()).map_err(data(out.display()))?;
    let rules = rules_path(out);
    fs::write(&rules, tree.export_rules()).map_err(data(rules.display()))?;
    println!(
        "{}: {} leaves, depth {}, {} instances -> {} (+ {})",
        tree.metadata.config_id,
        tree.root.leaf_count(),
        tree.root.depth(),
        d.len(),
        out.display(),
        rules.display()
    );
    Ok(())
}

fn cmd_evaluate(dataset: &Path, k: usize, seed: u64, out: Option<&Path>) -> Result<(), CliError> {
    if k < 2 {
        return Err(CliError::Usage("k must be ≥ 2".into()));
    }
    let d = Dataset::load(dataset).map_err(data(dataset.display()))?;
    let report = cross_validate(&d, k, seed).map_err(data("evaluate"))?;
    print!("{report}");
    if let Some(out) = out {
        fs::write(out, report.to_string()).map_err(data(out.display()))?;
        let json = out.with_extension("json");
        fs::write(&json, report.to_json()).map_err(data(json.display()))?;
    }
    Ok(())
}

fn cmd_run_bot(model: &Path, config: &str, game: &GameArgs, out: Option<&Path>) -> Result<(), CliError> {
    if game.games == 0 {
        return Err(CliError::Usage("no games to run".into()));
    }
    let cfg = parse_config(config)?;
    let file = fs::File::open(model).map_err(data(model.display()))?;
    let tree = Arc::new(DecisionTree::load_model(BufReader::new(file)).map_err(data(model.display()))?);
    let (maze_id, maze) = load_maze(game.maze.as_deref())?;
    let maze = Arc::new(maze);
    let mut traces = Vec::new();
    let mut outcomes = Vec::new();
    for i in 0..game.games as u64 {
        let (trace, outcome, ms) =
            run_bot(tree.clone(), cfg, maze.clone(), &maze_id, GameConfig::with_seed(game.seed.wrapping_add(i))).map_err(data("run-bot"))?;
        outcomes.push((outcome == Outcome::Won, ms));
        traces.push(trace);
    }
    if let Some(dir) = out {
        write_traces(dir, &traces)?;
    }
    println!("bot {}: {}", cfg.as_str(), summary(&outcomes));
    Ok(())
}
