//! Stratified k-fold cross-validation with accuracy, ROC area and PRC area.
//!
//! Out-of-fold predictions are pooled before computing the areas; per-fold
//! figures are reported alongside.

use std::fmt;

use log::warn;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{ClassLabel, Dataset};
use crate::tree::{induce_with, InduceConfig, TreeError};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("k must be >= 2")]
    InvalidK,
    #[error("k = {k} exceeds the {n} available instances")]
    TooFewInstances { k: usize, n: usize },
    #[error("predictions and truths differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("no predictions to score")]
    Empty,
    #[error("ROC area needs both classes among the truths")]
    SingleClass,
    #[error("PRC area needs at least one positive")]
    NoPositives,
    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// Share of positions where prediction equals truth.
pub fn accuracy(predictions: &[ClassLabel], truths: &[ClassLabel]) -> Result<f64, EvalError> {
    if predictions.len() != truths.len() {
        return Err(EvalError::LengthMismatch(predictions.len(), truths.len()));
    }
    if truths.is_empty() {
        return Err(EvalError::Empty);
    }
    let correct = predictions.iter().zip(truths).filter(|(p, t)| p == t).count();
    Ok(correct as f64 / truths.len() as f64)
}

/// Area under the ROC curve via the rank-sum statistic: the probability a
/// random positive scores above a random negative, ties counting one half.
/// `truths[i]` is true for positives.
pub fn roc_area(scores: &[f64], truths: &[bool]) -> Result<f64, EvalError> {
    if scores.len() != truths.len() {
        return Err(EvalError::LengthMismatch(scores.len(), truths.len()));
    }
    let n_pos = truths.iter().filter(|&&t| t).count();
    let n_neg = truths.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(EvalError::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // average 1-based ranks over tie groups
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let avg_rank = (i + j) as f64 / 2.0 + 1.0;
        rank_sum_pos += avg_rank * order[i..=j].iter().filter(|&&k| truths[k]).count() as f64;
        i = j + 1;
    }
    let u = rank_sum_pos - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}

/// Area under the precision-recall curve as average precision, sweeping
/// thresholds from the highest score down and treating equal scores as one
/// step.
pub fn prc_area(scores: &[f64], truths: &[bool]) -> Result<f64, EvalError> {
    if scores.len() != truths.len() {
        return Err(EvalError::LengthMismatch(scores.len(), truths.len()));
    }
    let n_pos = truths.iter().filter(|&&t| t).count();
    if n_pos == 0 {
        return Err(EvalError::NoPositives);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let (mut tp, mut fp, mut ap) = (0usize, 0usize, 0.0);
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let group_tp = order[i..=j].iter().filter(|&&k| truths[k]).count();
        tp += group_tp;
        fp += j + 1 - i - group_tp;
        if group_tp > 0 {
            ap += group_tp as f64 / n_pos as f64 * (tp as f64 / (tp + fp) as f64);
        }
        i = j + 1;
    }
    Ok(ap)
}

/// `(train, test)` indices of one fold.
pub type Fold = (Vec<usize>, Vec<usize>);

/// Splits row indices into `k` (train, test) pairs. Each class is shuffled
/// and dealt round-robin, continuing where the previous class stopped, so
/// fold sizes and class shares differ by at most one instance.
pub fn kfold_split(d: &Dataset, k: usize, seed: u64) -> Result<Vec<Fold>, EvalError> {
    if k < 2 {
        return Err(EvalError::InvalidK);
    }
    if d.len() < k {
        return Err(EvalError::TooFewInstances { k, n: d.len() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let counts = d.class_counts();
    let groups: Vec<Vec<usize>> = if counts.iter().any(|&c| c > 0 && c < k) {
        warn!("a class has fewer than {k} instances; falling back to unstratified folds");
        vec![(0..d.len()).collect()]
    } else {
        ClassLabel::ALL
            .iter()
            .map(|&c| (0..d.len()).filter(|&i| d.rows[i].class == Some(c)).collect())
            .collect()
    };
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for mut g in groups {
        g.shuffle(&mut rng);
        for i in g {
            folds[next].push(i);
            next = (next + 1) % k;
        }
    }
    Ok((0..k)
        .map(|f| {
            let mut test = folds[f].clone();
            test.sort_unstable();
            let mut train: Vec<usize> = folds.iter().enumerate().filter(|(g, _)| *g != f).flat_map(|(_, v)| v.iter().copied()).collect();
            train.sort_unstable();
            (train, test)
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldMetrics {
    pub fold: usize,
    pub n_test: usize,
    pub accuracy: f64,
    /// `None` when the test fold holds a single class.
    pub roc_area: Option<f64>,
    pub prc_area: Option<f64>,
}

/// Confusion counts indexed `[truth][prediction]` in [`ClassLabel::ALL`] order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Confusion(pub [[usize; 2]; 2]);

impl Confusion {
    pub fn total(&self) -> usize {
        self.0.iter().flatten().sum()
    }

    pub fn correct(&self) -> usize {
        self.0[0][0] + self.0[1][1]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub config_id: String,
    pub n_instances: usize,
    pub k: usize,
    pub seed: u64,
    pub accuracy: f64,
    pub roc_area: f64,
    pub prc_area: f64,
    pub confusion: Confusion,
    pub per_fold: Vec<FoldMetrics>,
}

impl EvalReport {
    /// Machine-readable summary.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises") + "\n"
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "=== {}-fold cross-validation: {} ({} instances, seed {}) ===", self.k, self.config_id, self.n_instances, self.seed)?;
        writeln!(f, "Accuracy  {:.3}", self.accuracy)?;
        writeln!(f, "ROC Area  {:.3}", self.roc_area)?;
        writeln!(f, "PRC Area  {:.3}", self.prc_area)?;
        writeln!(f)?;
        writeln!(f, "Confusion (rows = truth, cols = predicted)")?;
        writeln!(f, "            go_ahead  get_away")?;
        for (c, row) in ClassLabel::ALL.iter().zip(self.confusion.0) {
            writeln!(f, "{:<10} {:>9} {:>9}", c.as_str(), row[0], row[1])?;
        }
        writeln!(f)?;
        writeln!(f, "fold  n_test  accuracy  roc    prc")?;
        let opt = |v: Option<f64>| v.map_or("  -  ".to_string(), |x| format!("{x:.3}"));
        for m in &self.per_fold {
            writeln!(f, "{:>4}  {:>6}  {:>8.3}  {}  {}", m.fold, m.n_test, m.accuracy, opt(m.roc_area), opt(m.prc_area))?;
        }
        Ok(())
    }
}

/// Trains on each training split, scores the held-out fold and pools the
/// out-of-fold predictions.
pub fn cross_validate(d: &Dataset, k: usize, seed: u64) -> Result<EvalReport, EvalError> {
    cross_validate_with(d, k, seed, InduceConfig::default())
}

pub fn cross_validate_with(d: &Dataset, k: usize, seed: u64, config: InduceConfig) -> Result<EvalReport, EvalError> {
    let folds = kfold_split(d, k, seed)?;
    let mut confusion = Confusion::default();
    let mut scores = Vec::with_capacity(d.len());
    let mut truths = Vec::with_capacity(d.len());
    let mut per_fold = Vec::with_capacity(k);
    for (f, (train, test)) in folds.iter().enumerate() {
        let tree = induce_with(&d.subset(train), config)?;
        let (mut fp, mut fs, mut ft) = (Vec::new(), Vec::new(), Vec::new());
        for &i in test {
            let row = &d.rows[i];
            let truth = row.class.expect("dataset rows are labeled");
            let (pred, score) = tree.classify(row)?;
            confusion.0[truth.index()][pred.index()] += 1;
            fp.push(pred);
            ft.push(truth);
            fs.push(score);
        }
        let fb: Vec<bool> = ft.iter().map(|&t| t == ClassLabel::POSITIVE).collect();
        per_fold.push(FoldMetrics {
            fold: f,
            n_test: test.len(),
            accuracy: accuracy(&fp, &ft)?,
            roc_area: roc_area(&fs, &fb).ok(),
            prc_area: prc_area(&fs, &fb).ok(),
        });
        scores.extend(fs);
        truths.extend(fb);
    }
    Ok(EvalReport {
        config_id: d.schema.relation.clone(),
        n_instances: d.len(),
        k,
        seed,
        accuracy: confusion.correct() as f64 / confusion.total() as f64,
        roc_area: roc_area(&scores, &truths)?,
        prc_area: prc_area(&scores, &truths)?,
        confusion,
        per_fold,
    })
}
