//! File-backed data directory:
//!
//! ```text
//! <root>/index.json
//! <root>/mazes/<id>.txt
//! <root>/traces/trace_<id>.csv
//! <root>/models/<id>.json   (+ <id>.rules.txt, <id>.report.json)
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use mimic_core::eval::{cross_validate, EvalReport};
use mimic_core::{build_dataset, induce, read_trace, write_trace, DecisionTree, Maze, TestId, Trace, DEFAULT_MAZE, DEFAULT_MAZE_ID};

use crate::protocol::{Catalog, Mode};
use crate::ServerError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub id: String,
    pub file: String,
    pub maze: String,
    pub mode: Mode,
    pub outcome: String,
    pub duration_ms: u64,
    pub moves: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelEntry {
    pub id: String,
    pub file: String,
    pub config: String,
    pub maze: String,
    pub traces: Vec<String>,
    pub accuracy: f64,
    pub roc_area: f64,
    pub prc_area: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Index {
    pub traces: Vec<TraceEntry>,
    pub models: Vec<ModelEntry>,
}

pub struct DataDir {
    root: PathBuf,
    index: Mutex<Index>,
}

/// Ids end up in file names, so they are limited to a safe alphabet.
pub fn valid_id(id: &str) -> bool {
    !id.is_empty() && id.len() <= 128 && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
}

fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(tmp, path)
}

impl DataDir {
    /// Opens (creating if needed) a data directory and seeds the default maze.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, ServerError> {
        let root = root.into();
        for sub in ["traces", "models", "mazes"] {
            fs::create_dir_all(root.join(sub))?;
        }
        let default = root.join("mazes").join(format!("{DEFAULT_MAZE_ID}.txt"));
        if !default.exists() {
            fs::write(&default, DEFAULT_MAZE)?;
        }
        let index_path = root.join("index.json");
        let index = if index_path.exists() {
            serde_json::from_slice(&fs::read(&index_path)?).map_err(|e| ServerError::Store(format!("index.json: {e}")))?
        } else {
            Index::default()
        };
        Ok(Self { root, index: Mutex::new(index) })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn index(&self) -> Index {
        self.index.lock().expect("index lock").clone()
    }

    fn update_index(&self, f: impl FnOnce(&mut Index)) -> Result<(), ServerError> {
        let mut index = self.index.lock().expect("index lock");
        f(&mut index);
        let text = serde_json::to_vec_pretty(&*index).expect("index serialises");
        write_atomic(&self.root.join("index.json"), &text)?;
        Ok(())
    }

    pub fn maze_ids(&self) -> Result<Vec<String>, ServerError> {
        let mut ids: Vec<String> = fs::read_dir(self.root.join("mazes"))?
            .filter_map(|e| e.ok())
            .filter_map(|e| e.file_name().to_str().and_then(|n| n.strip_suffix(".txt")).map(str::to_string))
            .filter(|id| valid_id(id))
            .collect();
        ids.sort();
        Ok(ids)
    }

    pub fn catalog(&self) -> Result<Catalog, ServerError> {
        let index = self.index();
        Ok(Catalog {
            mazes: self.maze_ids()?,
            traces: index.traces.iter().map(|t| t.id.clone()).collect(),
            models: index.models.iter().map(|m| m.id.clone()).collect(),
        })
    }

    pub fn load_maze(&self, id: &str) -> Result<Maze, ServerError> {
        let path = self.root.join("mazes").join(format!("{id}.txt"));
        if !valid_id(id) || !path.exists() {
            return Err(ServerError::NotFound("maze"));
        }
        Ok(Maze::parse(&fs::read_to_string(path)?)?)
    }

    pub fn trace_path(&self, id: &str) -> PathBuf {
        self.root.join("traces").join(format!("trace_{id}.csv"))
    }

    /// Writes the trace and records it in the index.
    pub fn save_trace(&self, trace: &Trace, mode: Mode, outcome: &str, duration_ms: u64) -> Result<(), ServerError> {
        if !valid_id(&trace.game_id) {
            return Err(ServerError::Store(format!("invalid trace id '{}'", trace.game_id)));
        }
        let path = self.trace_path(&trace.game_id);
        let mut out = BufWriter::new(fs::File::create(&path)?);
        write_trace(trace, &mut out)?;
        out.flush()?;
        let entry = TraceEntry {
            id: trace.game_id.clone(),
            file: format!("traces/{}", trace.file_name()),
            maze: trace.maze_ref.clone(),
            mode,
            outcome: outcome.to_string(),
            duration_ms,
            moves: trace.rows.len(),
        };
        self.update_index(|idx| {
            idx.traces.retain(|t| t.id != entry.id);
            idx.traces.push(entry);
        })
    }

    pub fn load_trace(&self, id: &str) -> Result<Trace, ServerError> {
        let path = self.trace_path(id);
        if !valid_id(id) || !path.exists() {
            return Err(ServerError::NotFound("trace"));
        }
        Ok(read_trace(BufReader::new(fs::File::open(path)?))?)
    }

    pub fn model_path(&self, id: &str) -> PathBuf {
        self.root.join("models").join(format!("{id}.json"))
    }

    pub fn model_entry(&self, id: &str) -> Option<ModelEntry> {
        self.index().models.into_iter().find(|m| m.id == id)
    }

    pub fn load_model(&self, id: &str) -> Result<(DecisionTree, ModelEntry), ServerError> {
        let entry = self.model_entry(id).ok_or(ServerError::NotFound("model"))?;
        let path = self.model_path(id);
        if !valid_id(id) || !path.exists() {
            return Err(ServerError::NotFound("model"));
        }
        let tree = DecisionTree::load_model(BufReader::new(fs::File::open(path)?))?;
        Ok((tree, entry))
    }

    /// Builds a dataset from stored traces, induces a tree, cross-validates
    /// it and stores the model. The model id is derived from the
    /// configuration and the trace ids, so retraining on the same traces
    /// rewrites the same file with the same bytes.
    pub fn train_from_traces(&self, trace_ids: &[String], cfg: TestId) -> Result<(String, EvalReport), ServerError> {
        if trace_ids.is_empty() {
            return Err(ServerError::Training("no traces selected".into()));
        }
        let mut ids = trace_ids.to_vec();
        ids.sort();
        ids.dedup();
        let traces = ids.iter().map(|id| self.load_trace(id)).collect::<Result<Vec<_>, _>>()?;
        let mut mazes = BTreeMap::new();
        for t in &traces {
            if !mazes.contains_key(&t.maze_ref) {
                mazes.insert(t.maze_ref.clone(), self.load_maze(&t.maze_ref)?);
            }
        }
        let data = build_dataset(cfg, &traces, &mazes)?;
        let counts = data.class_counts();
        if counts.contains(&0) {
            return Err(ServerError::Training("dataset has one class".into()));
        }
        let k = 10.min(data.len());
        let report = cross_validate(&data, k, 0)?;
        let tree = induce(&data)?;

        let mut h = Sha256::new();
        h.update(cfg.as_str());
        for id in &ids {
            h.update([0]);
            h.update(id);
        }
        let digest: String = h.finalize().iter().take(6).map(|b| format!("{b:02x}")).collect();
        let model_id = format!("{}-{digest}", cfg.as_str());

        write_atomic(&self.model_path(&model_id), tree.to_model_string().as_bytes())?;
        write_atomic(&self.root.join("models").join(format!("{model_id}.rules.txt")), tree.export_rules().as_bytes())?;
        write_atomic(&self.root.join("models").join(format!("{model_id}.report.json")), report.to_json().as_bytes())?;
        let entry = ModelEntry {
            id: model_id.clone(),
            file: format!("models/{model_id}.json"),
            config: cfg.as_str().to_string(),
            maze: traces[0].maze_ref.clone(),
            traces: ids,
            accuracy: report.accuracy,
            roc_area: report.roc_area,
            prc_area: report.prc_area,
        };
        self.update_index(|idx| {
            idx.models.retain(|m| m.id != entry.id);
            idx.models.push(entry);
        })?;
        Ok((model_id, report))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_are_restricted() {
        assert!(valid_id("t3-9-ab12_x"));
        assert!(!valid_id("../etc"));
        assert!(!valid_id(""));
        assert!(!valid_id("a b"));
    }

    #[test]
    fn open_creates_layout() {
        let dir = tempfile::tempdir().unwrap();
        let d = DataDir::open(dir.path()).unwrap();
        for sub in ["traces", "models", "mazes"] {
            assert!(dir.path().join(sub).is_dir());
        }
        assert_eq!(d.maze_ids().unwrap(), vec!["default".to_string()]);
        assert!(d.load_maze("default").is_ok());
        assert!(matches!(d.load_maze("nope"), Err(ServerError::NotFound("maze"))));
        assert!(matches!(d.load_model("nope"), Err(ServerError::NotFound("model"))));
    }
}
