use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn mimic(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mimic")).current_dir(dir).args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn simulated(games: &str) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let o = mimic(dir.path(), &["simulate", "--games", games, "--seed", "2", "--out", "traces"]);
    assert!(o.status.success(), "{}", stderr(&o));
    dir
}

fn header_columns(csv: &Path) -> usize {
    fs::read_to_string(csv).unwrap().lines().next().unwrap().split(',').count()
}

#[test]
fn help_and_usage_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(mimic(dir.path(), &["--help"]).status.code(), Some(0));
    assert_eq!(mimic(dir.path(), &["--version"]).status.code(), Some(0));
    assert_eq!(mimic(dir.path(), &["teleport"]).status.code(), Some(1));
    assert_eq!(mimic(dir.path(), &["train"]).status.code(), Some(1));

    let o = mimic(dir.path(), &["simulate", "--games", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("nothing to simulate"));

    let o = mimic(dir.path(), &["simulate", "--policy", "sprinter"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("greedy_collector"));
}

#[test]
fn simulate_writes_one_trace_per_game() {
    let dir = simulated("3");
    let mut names: Vec<String> = fs::read_dir(dir.path().join("traces")).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert_eq!(names, ["trace_cautious_collector-2.csv", "trace_cautious_collector-3.csv", "trace_cautious_collector-4.csv"]);
    let o = mimic(dir.path(), &["simulate", "--games", "2", "--policy", "greedy", "--out", "greedy"]);
    assert!(stdout(&o).starts_with("greedy_collector: 2 games: won "), "{}", stdout(&o));
}

#[test]
fn dataset_column_counts() {
    let dir = simulated("2");
    for (cfg, cols) in [("t1", 7), ("t2-9", 9), ("t2-17", 17), ("t3-9", 9), ("t3-17", 17)] {
        let out = format!("{cfg}.csv");
        let o = mimic(dir.path(), &["build-dataset", "--traces", "traces", "--config", cfg, "--out", &out]);
        assert!(o.status.success(), "{}", stderr(&o));
        assert_eq!(header_columns(&dir.path().join(&out)), cols, "{cfg}");
        assert!(dir.path().join(format!("{cfg}.schema.json")).exists());
    }
    let o = mimic(dir.path(), &["build-dataset", "--traces", "traces/*.csv", "--config", "t3-9", "--out", "t3.arff"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let arff = fs::read_to_string(dir.path().join("t3.arff")).unwrap();
    assert!(arff.to_lowercase().contains("@relation"));
}

#[test]
fn bad_inputs() {
    let dir = simulated("1");
    let o = mimic(dir.path(), &["build-dataset", "--traces", "traces", "--config", "t4", "--out", "x.csv"]);
    assert_eq!(o.status.code(), Some(1));
    for id in ["t1", "t2-9", "t2-17", "t3-9", "t3-17"] {
        assert!(stderr(&o).contains(id), "{}", stderr(&o));
    }

    let o = mimic(dir.path(), &["build-dataset", "--traces", "nothing-here", "--config", "t1", "--out", "x.csv"]);
    assert_eq!(o.status.code(), Some(2));

    let o = mimic(dir.path(), &["build-dataset", "--traces", "traces", "--config", "t3-9", "--out", "t3.csv"]);
    assert!(o.status.success());
    let o = mimic(dir.path(), &["evaluate", "--dataset", "t3.csv", "--k", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("k must be"));

    fs::write(dir.path().join("broken.json"), "{ not a model").unwrap();
    let o = mimic(dir.path(), &["run-bot", "--model", "broken.json", "--config", "t3-9"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn train_evaluate_and_run_bot() {
    let dir = simulated("6");
    let p = dir.path();
    assert!(mimic(p, &["build-dataset", "--traces", "traces", "--config", "t3-9", "--out", "t3.csv"]).status.success());
    let o = mimic(p, &["train", "--dataset", "t3.csv", "--out", "model.json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rules = fs::read_to_string(p.join("model.rules.txt")).unwrap();
    assert!(rules.contains("get_away") && rules.contains("go_ahead"));

    let o = mimic(p, &["evaluate", "--dataset", "t3.csv", "--out", "report.txt"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read_to_string(p.join("report.txt")).unwrap(), stdout(&o));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(p.join("report.json")).unwrap()).unwrap();
    assert_eq!(json["accuracy"], 1.0);
    assert_eq!(json["k"], 10);

    let o = mimic(p, &["run-bot", "--model", "model.json", "--config", "t3-9", "--games", "4", "--seed", "50", "--out", "bot"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("bot t3-9: 4 games: won "), "{}", stdout(&o));
    assert_eq!(fs::read_dir(p.join("bot")).unwrap().count(), 4);

    // a t3-9 tree cannot read t3-17 rows
    let o = mimic(p, &["run-bot", "--model", "model.json", "--config", "t3-17"]);
    assert_eq!(o.status.code(), Some(2));

    // gain ratio and stamping both produce loadable models
    assert!(mimic(p, &["train", "--dataset", "t3.csv", "--out", "gr.json", "--gain-ratio", "--stamp"]).status.success());
    assert!(mimic(p, &["run-bot", "--model", "gr.json", "--config", "t3-9"]).status.success());
}
