//! `mimic`: simulate games, build datasets, train, evaluate, run the bot and
//! serve live sessions.

mod commands;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mimic_core::policy::DEFAULT_FLEE_RADIUS;

#[derive(Debug, Parser)]
#[command(name = "mimic", version, about = "Imitation learning for a maze-chase game")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
pub struct GameArgs {
    /// Maze file; the bundled maze when omitted.
    #[arg(long)]
    pub maze: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub games: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Play scripted games and write one trace CSV per game.
    Simulate {
        #[command(flatten)]
        game: GameArgs,
        /// greedy_collector, cautious_collector or random_walker.
        #[arg(long, default_value = "cautious_collector")]
        policy: String,
        /// Flee radius of the cautious collector.
        #[arg(long, default_value_t = DEFAULT_FLEE_RADIUS)]
        flee_radius: usize,
        #[arg(long, default_value = "traces")]
        out: PathBuf,
    },
    /// Turn traces into a labeled dataset (CSV + schema sidecar, or ARFF).
    BuildDataset {
        /// Trace directory or glob pattern.
        #[arg(long)]
        traces: String,
        /// t1, t2-9, t2-17, t3-9 or t3-17.
        #[arg(long)]
        config: String,
        /// Extra maze files, referenced by file stem.
        #[arg(long)]
        maze: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Induce a tree and write the model plus its rules.
    Train {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Use the gain ratio instead of information gain.
        #[arg(long)]
        gain_ratio: bool,
        /// Record the induction time in the model metadata.
        #[arg(long)]
        stamp: bool,
    },
    /// Stratified k-fold cross-validation.
    Evaluate {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Text report path; a JSON summary is written next to it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Let a trained tree play.
    RunBot {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        config: String,
        #[command(flatten)]
        game: GameArgs,
        /// Directory for the bot traces.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the WebSocket session server.
    Serve {
        #[arg(long, env = "MIMIC_ADDR", default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
        #[arg(long, env = "MIMIC_DATA_DIR", default_value = "data")]
        data_dir: PathBuf,
        /// Built UI bundle to serve at `/`.
        #[arg(long, env = "MIMIC_STATIC_DIR")]
        static_dir: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
