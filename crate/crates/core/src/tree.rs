//! Unpruned C4.5-style decision trees.
//!
//! Nominal attributes split into one branch per declared value and are not
//! tested twice on a path; numeric attributes split at the midpoint between
//! consecutive distinct observed values and may be reused with another
//! threshold. Attributes are ranked by information gain (gain ratio is
//! available as an alternative criterion).

use std::fmt::Write as _;
use std::io;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{AttributeKind, ClassLabel, Dataset, Instance, Schema, Value};

/// Gains closer than this are treated as equal.
const GAIN_EPS: f64 = 1e-12;

pub const MODEL_FORMAT: &str = "mimic-tree/1";

#[derive(Debug, Error)]
pub enum TreeError {
    #[error("class counts are all zero")]
    EmptyCounts,
    #[error("cannot induce a tree from an empty dataset")]
    EmptyDataset,
    #[error("instance does not match the tree schema: {0}")]
    Schema(String),
    #[error("model file: {0}")]
    Model(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Shannon entropy in bits of a class distribution.
pub fn entropy(counts: &[usize]) -> Result<f64, TreeError> {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return Err(TreeError::EmptyCounts);
    }
    let n = total as f64;
    Ok(counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum())
}

fn entropy_or_zero(counts: &[usize; 2]) -> f64 {
    entropy(counts).unwrap_or(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitCriterion {
    #[default]
    InformationGain,
    GainRatio,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct InduceConfig {
    pub criterion: SplitCriterion,
}

/// How a node partitions its instances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Split {
    Nominal { attribute: usize },
    Numeric { attribute: usize, threshold: f64 },
}

impl Split {
    pub fn attribute(&self) -> usize {
        match *self {
            Split::Nominal { attribute } | Split::Numeric { attribute, .. } => attribute,
        }
    }
}

/// Result of scoring one attribute on a set of instances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitScore {
    pub gain: f64,
    /// Criterion value actually used for ranking (gain or gain ratio).
    pub score: f64,
    pub split: Split,
    /// Number of non-empty branches the split produces.
    pub branches: usize,
}

fn class_counts<'a>(rows: impl IntoIterator<Item = &'a Instance>) -> [usize; 2] {
    let mut c = [0; 2];
    for r in rows {
        if let Some(k) = r.class {
            c[k.index()] += 1;
        }
    }
    c
}

fn weighted_child_entropy(children: &[[usize; 2]], total: usize) -> (f64, f64) {
    let n = total as f64;
    let mut rem = 0.0;
    let mut split_info = 0.0;
    for c in children {
        let m = (c[0] + c[1]) as f64;
        if m > 0.0 {
            rem += m / n * entropy_or_zero(c);
            split_info -= m / n * (m / n).log2();
        }
    }
    (rem, split_info)
}

fn score_of(gain: f64, split_info: f64, criterion: SplitCriterion) -> f64 {
    match criterion {
        SplitCriterion::InformationGain => gain,
        SplitCriterion::GainRatio if split_info > 0.0 => gain / split_info,
        SplitCriterion::GainRatio => 0.0,
    }
}

fn score_attribute(schema: &Schema, rows: &[&Instance], attr: usize, criterion: SplitCriterion) -> Option<SplitScore> {
    let parent = class_counts(rows.iter().copied());
    let total = rows.len();
    let h = entropy_or_zero(&parent);
    match &schema.attributes[attr].kind {
        AttributeKind::Nominal { values } => {
            let mut children = vec![[0usize; 2]; values.len()];
            for r in rows {
                if let (Value::Nominal(k), Some(c)) = (r.values[attr], r.class) {
                    children[k][c.index()] += 1;
                }
            }
            let branches = children.iter().filter(|c| c[0] + c[1] > 0).count();
            let (rem, si) = weighted_child_entropy(&children, total);
            let gain = (h - rem).max(0.0);
            Some(SplitScore { gain, score: score_of(gain, si, criterion), split: Split::Nominal { attribute: attr }, branches })
        }
        AttributeKind::Numeric => {
            let mut pts: Vec<(f64, ClassLabel)> = rows
                .iter()
                .filter_map(|r| match (r.values[attr], r.class) {
                    (Value::Numeric(x), Some(c)) => Some((x, c)),
                    _ => None,
                })
                .collect();
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut best: Option<SplitScore> = None;
            let mut left = [0usize; 2];
            for i in 0..pts.len().saturating_sub(1) {
                left[pts[i].1.index()] += 1;
                if pts[i].0 == pts[i + 1].0 {
                    continue;
                }
                let right = [parent[0] - left[0], parent[1] - left[1]];
                let (rem, si) = weighted_child_entropy(&[left, right], total);
                let gain = (h - rem).max(0.0);
                let score = score_of(gain, si, criterion);
                if best.is_none_or(|b| score > b.score + GAIN_EPS) {
                    let threshold = pts[i].0 + (pts[i + 1].0 - pts[i].0) / 2.0;
                    best = Some(SplitScore { gain, score, split: Split::Numeric { attribute: attr, threshold }, branches: 2 });
                }
            }
            best
        }
    }
}

/// Information gain of `attr` on the whole dataset, with the split that
/// achieves it. Numeric attributes report their best midpoint threshold.
/// An attribute with a single observed value has gain 0 (and no numeric
/// threshold).
pub fn information_gain(d: &Dataset, attr: usize) -> Result<(f64, Option<Split>), TreeError> {
    if d.is_empty() {
        return Err(TreeError::EmptyDataset);
    }
    let rows: Vec<&Instance> = d.rows.iter().collect();
    Ok(match score_attribute(&d.schema, &rows, attr, SplitCriterion::InformationGain) {
        Some(s) => (s.gain, Some(s.split)),
        None => (0.0, None),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "lowercase")]
pub enum TreeNode {
    Internal {
        /// Attribute name, kept for readability and checked on load.
        name: String,
        split: Split,
        /// Nominal: one child per declared value. Numeric: `[<= θ, > θ]`.
        children: Vec<TreeNode>,
    },
    Leaf {
        class: ClassLabel,
        /// Training instances per class (`[go_ahead, get_away]`).
        counts: [usize; 2],
    },
}

fn majority(counts: [usize; 2]) -> ClassLabel {
    // Ties go to the first declared class.
    if counts[1] > counts[0] {
        ClassLabel::GetAway
    } else {
        ClassLabel::GoAhead
    }
}

impl TreeNode {
    pub fn leaf_count(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Internal { children, .. } => children.iter().map(TreeNode::leaf_count).sum(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Internal { children, .. } => 1 + children.iter().map(TreeNode::depth).max().unwrap_or(0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeMetadata {
    pub training_size: usize,
    pub config_id: String,
    pub criterion: SplitCriterion,
    /// Unix seconds; left empty unless the caller stamps it, so that model
    /// files stay reproducible.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub induced_at: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub format: String,
    pub schema: Schema,
    pub metadata: TreeMetadata,
    pub root: TreeNode,
}

struct Inducer<'a> {
    schema: &'a Schema,
    config: InduceConfig,
}

impl Inducer<'_> {
    fn grow(&self, rows: &[&Instance], used_nominal: &mut Vec<bool>) -> TreeNode {
        let counts = class_counts(rows.iter().copied());
        let leaf = TreeNode::Leaf { class: majority(counts), counts };
        if counts[0] == 0 || counts[1] == 0 {
            return leaf;
        }

        let mut best: Option<SplitScore> = None;
        let mut fallback: Option<SplitScore> = None;
        for (attr, &used) in used_nominal.iter().enumerate() {
            if used {
                continue;
            }
            let Some(s) = score_attribute(self.schema, rows, attr, self.config.criterion) else {
                continue;
            };
            if s.branches < 2 {
                continue;
            }
            if fallback.is_none() {
                fallback = Some(s);
            }
            if s.gain > GAIN_EPS && best.is_none_or(|b| s.score > b.score + GAIN_EPS) {
                best = Some(s);
            }
        }
        // With no informative attribute left, a zero-gain split that still
        // separates instances keeps training accuracy at 100% on consistent
        // data (e.g. XOR patterns). Indistinguishable rows end in a leaf.
        let Some(chosen) = best.or(fallback) else {
            return leaf;
        };

        let attr = chosen.split.attribute();
        let name = self.schema.attributes[attr].name.clone();
        let children = match chosen.split {
            Split::Nominal { .. } => {
                let n_values = self.schema.attributes[attr].values().len();
                used_nominal[attr] = true;
                let children = (0..n_values)
                    .map(|k| {
                        let sub: Vec<&Instance> =
                            rows.iter().copied().filter(|r| r.values[attr] == Value::Nominal(k)).collect();
                        if sub.is_empty() {
                            TreeNode::Leaf { class: majority(counts), counts: [0, 0] }
                        } else {
                            self.grow(&sub, used_nominal)
                        }
                    })
                    .collect();
                used_nominal[attr] = false;
                children
            }
            Split::Numeric { threshold, .. } => {
                let (le, gt): (Vec<&Instance>, Vec<&Instance>) =
                    rows.iter().partition(|r| matches!(r.values[attr], Value::Numeric(x) if x <= threshold));
                vec![self.grow(&le, used_nominal), self.grow(&gt, used_nominal)]
            }
        };
        TreeNode::Internal { name, split: chosen.split, children }
    }
}

/// Induces an unpruned tree with information gain.
pub fn induce(d: &Dataset) -> Result<DecisionTree, TreeError> {
    induce_with(d, InduceConfig::default())
}

pub fn induce_with(d: &Dataset, config: InduceConfig) -> Result<DecisionTree, TreeError> {
    if d.is_empty() {
        return Err(TreeError::EmptyDataset);
    }
    let rows: Vec<&Instance> = d.rows.iter().collect();
    let inducer = Inducer { schema: &d.schema, config };
    let root = inducer.grow(&rows, &mut vec![false; d.schema.len()]);
    Ok(DecisionTree {
        format: MODEL_FORMAT.to_string(),
        schema: d.schema.clone(),
        metadata: TreeMetadata {
            training_size: d.len(),
            config_id: d.schema.relation.clone(),
            criterion: config.criterion,
            induced_at: None,
        },
        root,
    })
}

impl DecisionTree {
    /// Predicted class and score, the share of `get_away` training
    /// instances at the reached leaf. Leaves no training instance reached
    /// score 1 or 0 according to their class.
    pub fn classify(&self, inst: &Instance) -> Result<(ClassLabel, f64), TreeError> {
        self.schema.check(inst).map_err(TreeError::Schema)?;
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Leaf { class, counts } => {
                    let total = counts[0] + counts[1];
                    let score = if total == 0 {
                        if *class == ClassLabel::POSITIVE { 1.0 } else { 0.0 }
                    } else {
                        counts[ClassLabel::POSITIVE.index()] as f64 / total as f64
                    };
                    return Ok((*class, score));
                }
                TreeNode::Internal { split, children, .. } => {
                    node = match (*split, inst.values[split.attribute()]) {
                        (Split::Nominal { .. }, Value::Nominal(k)) => &children[k],
                        (Split::Numeric { threshold, .. }, Value::Numeric(x)) => &children[usize::from(x > threshold)],
                        _ => return Err(TreeError::Schema("value kind differs from split kind".into())),
                    };
                }
            }
        }
    }

    /// Class only.
    pub fn predict(&self, inst: &Instance) -> Result<ClassLabel, TreeError> {
        self.classify(inst).map(|(c, _)| c)
    }

    /// One `IF ... THEN ...` line per root-to-leaf path.
    pub fn export_rules(&self) -> String {
        let mut out = String::new();
        let mut conds = Vec::new();
        self.rules_rec(&self.root, &mut conds, &mut out);
        out
    }

    fn rules_rec(&self, node: &TreeNode, conds: &mut Vec<String>, out: &mut String) {
        match node {
            TreeNode::Leaf { class, counts } => {
                let lhs = if conds.is_empty() { "TRUE".to_string() } else { conds.join(" AND ") };
                let _ = writeln!(out, "IF {lhs} THEN {class} ({}/{})", counts[0], counts[1]);
            }
            TreeNode::Internal { name, split, children } => {
                for (k, child) in children.iter().enumerate() {
                    let cond = match split {
                        Split::Nominal { attribute } => {
                            format!("{name} = {}", self.schema.attributes[*attribute].values()[k])
                        }
                        Split::Numeric { threshold, .. } if k == 0 => format!("{name} <= {threshold}"),
                        Split::Numeric { threshold, .. } => format!("{name} > {threshold}"),
                    };
                    conds.push(cond);
                    self.rules_rec(child, conds, out);
                    conds.pop();
                }
            }
        }
    }

    /// JSON model file.
    pub fn to_model_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("tree serialises") + "\n"
    }

    pub fn save_model<W: io::Write>(&self, mut out: W) -> Result<(), TreeError> {
        out.write_all(self.to_model_string().as_bytes())?;
        Ok(())
    }

    /// Parses a model file and checks it against its embedded schema.
    pub fn load_model<R: io::Read>(input: R) -> Result<Self, TreeError> {
        let tree: DecisionTree = serde_json::from_reader(input).map_err(|e| TreeError::Model(e.to_string()))?;
        if tree.format != MODEL_FORMAT {
            return Err(TreeError::Model(format!("unsupported format '{}'", tree.format)));
        }
        tree.schema.validate().map_err(|e| TreeError::Model(e.to_string()))?;
        tree.check_node(&tree.root)?;
        Ok(tree)
    }

    /// Loads a model and requires its schema to equal `expected`.
    pub fn load_model_for<R: io::Read>(input: R, expected: &Schema) -> Result<Self, TreeError> {
        let tree = Self::load_model(input)?;
        if tree.schema != *expected {
            return Err(TreeError::Model(format!(
                "model schema '{}' does not match '{}'",
                tree.schema.relation, expected.relation
            )));
        }
        Ok(tree)
    }

    fn check_node(&self, node: &TreeNode) -> Result<(), TreeError> {
        let TreeNode::Internal { name, split, children } = node else {
            return Ok(());
        };
        let attr = self
            .schema
            .attributes
            .get(split.attribute())
            .ok_or_else(|| TreeError::Model(format!("attribute index {} out of range", split.attribute())))?;
        if attr.name != *name {
            return Err(TreeError::Model(format!("node names '{name}' but schema has '{}'", attr.name)));
        }
        let expected = match split {
            Split::Nominal { .. } if attr.is_nominal() => attr.values().len(),
            Split::Numeric { .. } if !attr.is_nominal() => 2,
            _ => return Err(TreeError::Model(format!("split kind does not match attribute '{name}'"))),
        };
        if children.len() != expected {
            return Err(TreeError::Model(format!("node '{name}' has {} children, expected {expected}", children.len())));
        }
        children.iter().try_for_each(|c| self.check_node(c))
    }
}
