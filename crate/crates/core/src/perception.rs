//! Fuzzy computational perceptions and the dataset builder.
//!
//! First-order perceptions map a crisp metric (a distance, the protection
//! ratio, elapsed time, closeness) onto a vocabulary of linguistic labels via
//! trapezoidal membership functions. Second-order perceptions combine two
//! first-order ones through an if-then rule base: every label pair fires with
//! the average of its two degrees, and each output label keeps the strongest
//! firing among the pairs that map to it.
//!
//! Instances carry two attributes per perception: the best label and its
//! degree.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{AttributeSpec, ClassLabel, Dataset, DatasetError, Instance, Schema, Value};
use crate::trace::{closeness, protection, Actor, Trace, TraceRow};
use crate::world::{GameConfig, Maze};

/// Rule bases shipped with the crate.
pub const RULES_MANIFEST: &str = include_str!("../rules/perception_rules.txt");

#[derive(Debug, Error)]
pub enum PerceptionError {
    #[error("malformed trapezoid ({0}, {1}, {2}, {3})")]
    Trapezoid(f64, f64, f64, f64),
    #[error("variable '{0}': {1}")]
    Variable(String, String),
    #[error("rules manifest line {line}: {msg}")]
    Manifest { line: usize, msg: String },
    #[error("rule base '{rule_base}' expects vocabulary {expected:?}, got {found:?}")]
    VocabularyMismatch { rule_base: String, expected: Vec<String>, found: Vec<String> },
    #[error("unknown {kind} label '{label}'")]
    UnknownLabel { kind: &'static str, label: String },
    #[error("unknown test configuration '{0}' (valid: t1, t2-9, t2-17, t3-9, t3-17)")]
    UnknownConfig(String),
    #[error("no traces to build a dataset from")]
    EmptyTraces,
    #[error("trace '{game_id}' references unknown maze '{maze}'")]
    UnknownMaze { game_id: String, maze: String },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

/// Trapezoidal membership function over `(a, b, c, d)`: zero outside
/// `[a, d]`, one on `[b, c]`, linear on the shoulders.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Trapezoid {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl Trapezoid {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self, PerceptionError> {
        if [a, b, c, d].iter().any(|v| v.is_nan()) || !(a <= b && b <= c && c <= d) {
            return Err(PerceptionError::Trapezoid(a, b, c, d));
        }
        Ok(Self { a, b, c, d })
    }

    pub fn params(&self) -> (f64, f64, f64, f64) {
        (self.a, self.b, self.c, self.d)
    }

    pub fn eval(&self, z: f64) -> f64 {
        let Trapezoid { a, b, c, d } = *self;
        if z < a || z > d {
            0.0
        } else if z >= b && z <= c {
            1.0
        } else if z < b {
            (z - a) / (b - a)
        } else {
            (d - z) / (d - c)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinguisticVariable {
    name: String,
    domain: (f64, f64),
    labels: Vec<(String, Trapezoid)>,
}

impl LinguisticVariable {
    pub fn new(name: impl Into<String>, domain: (f64, f64), labels: Vec<(String, Trapezoid)>) -> Result<Self, PerceptionError> {
        let name = name.into();
        if labels.is_empty() {
            return Err(PerceptionError::Variable(name, "no labels".into()));
        }
        for (label, t) in &labels {
            let (a, _, _, d) = t.params();
            if a < domain.0 || d > domain.1 {
                return Err(PerceptionError::Variable(name, format!("label '{label}' leaves the domain")));
            }
        }
        Ok(Self { name, domain, labels })
    }

    fn build(name: &str, domain: (f64, f64), labels: [(&str, [f64; 4]); 3]) -> Self {
        Self::from_params(name, domain, &labels)
    }

    fn from_params(name: &str, domain: (f64, f64), labels: &[(&str, [f64; 4])]) -> Self {
        let labels = labels
            .iter()
            .map(|(l, [a, b, c, d])| (l.to_string(), Trapezoid::new(*a, *b, *c, *d).expect("built-in trapezoid")))
            .collect();
        Self::new(name, domain, labels).expect("built-in variable")
    }

    /// Cell distance on `[0, n]`: small, medium, large. `n` is raised to 10
    /// on mazes too small to hold the fixed breakpoints.
    pub fn distance(name: &str, n: f64) -> Self {
        let n = n.max(10.0);
        Self::build(name, (0.0, n), [("small", [0.0, 0.0, 2.0, 6.0]), ("medium", [2.0, 6.0, 6.0, 10.0]), ("large", [6.0, 10.0, n, n])])
    }

    /// Obstacle ratio on `[0, 1]`: low, medium, high.
    pub fn protection() -> Self {
        Self::build(
            "protection",
            (0.0, 1.0),
            [("low", [0.0, 0.0, 0.25, 0.41]), ("medium", [0.25, 0.41, 0.58, 0.75]), ("high", [0.58, 0.75, 1.0, 1.0])],
        )
    }

    /// Elapsed milliseconds on `[0, n]`: little, reasonable, a_lot. `n` is
    /// at least 27 000.
    pub fn time(n: f64) -> Self {
        let n = n.max(27_000.0);
        Self::build(
            "time",
            (0.0, n),
            [
                ("little", [0.0, 0.0, 9_000.0, 15_000.0]),
                ("reasonable", [9_000.0, 15_000.0, 21_000.0, 27_000.0]),
                ("a_lot", [21_000.0, 27_000.0, n, n]),
            ],
        )
    }

    /// Signed distance advantage on `[-n, n]`, `n` at least 6.
    pub fn closeness(n: f64) -> Self {
        let n = n.max(6.0);
        Self::from_params(
            "closeness",
            (-n, n),
            &[
                ("much_closer", [2.0, 6.0, n, n]),
                ("closer", [-2.0, 2.0, 2.0, 6.0]),
                ("farther", [-6.0, -2.0, -2.0, 2.0]),
                ("much_farther", [-n, -n, -6.0, -2.0]),
            ],
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.labels.iter().map(|(l, _)| l.as_str())
    }

    pub fn trapezoid(&self, label: &str) -> Option<&Trapezoid> {
        self.labels.iter().find(|(l, _)| l == label).map(|(_, t)| t)
    }

    pub fn membership(&self, label: &str, z: f64) -> Option<f64> {
        self.labels.iter().find(|(l, _)| l == label).map(|(_, t)| t.eval(z))
    }

    /// First-order perception of `z` (clamped to the domain).
    pub fn perceive(&self, z: f64) -> ComputationalPerception {
        let z = z.clamp(self.domain.0, self.domain.1);
        ComputationalPerception {
            variable: self.name.clone(),
            entries: self.labels.iter().map(|(l, t)| (l.clone(), t.eval(z))).collect(),
        }
    }
}

/// Labels of a vocabulary with their validity degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComputationalPerception {
    pub variable: String,
    pub entries: Vec<(String, f64)>,
}

impl ComputationalPerception {
    pub fn new<S: Into<String>>(variable: impl Into<String>, entries: impl IntoIterator<Item = (S, f64)>) -> Self {
        Self { variable: variable.into(), entries: entries.into_iter().map(|(l, d)| (l.into(), d)).collect() }
    }

    pub fn degree(&self, label: &str) -> Option<f64> {
        self.entries.iter().find(|(l, _)| l == label).map(|(_, d)| *d)
    }

    /// Highest-degree entry; earlier labels win ties.
    pub fn best(&self) -> (&str, f64) {
        self.best_index().map_or(("", 0.0), |i| (self.entries[i].0.as_str(), self.entries[i].1))
    }

    pub fn best_index(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, (_, d)) in self.entries.iter().enumerate() {
            if best.is_none_or(|b| *d > self.entries[b].1) {
                best = Some(i);
            }
        }
        best
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(l, _)| l.as_str())
    }
}

/// If-then rules mapping a pair of input labels to an output label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FuzzyRuleBase {
    pub name: String,
    pub input_a: Vec<String>,
    pub input_b: Vec<String>,
    pub output: Vec<String>,
    /// Listed rules in declaration order: `(label_a, label_b, output)`.
    pub rules: Vec<(String, String, String)>,
    pub default: String,
}

impl FuzzyRuleBase {
    /// Checks that every label comes from the declared vocabularies and no
    /// pair is mapped to two different outputs.
    pub fn validate(&self) -> Result<(), String> {
        let known = |vocab: &[String], l: &str| vocab.iter().any(|v| v == l);
        if !known(&self.output, &self.default) {
            return Err(format!("default '{}' not in output vocabulary", self.default));
        }
        let mut seen: BTreeMap<(&str, &str), &str> = BTreeMap::new();
        for (a, b, out) in &self.rules {
            if !known(&self.input_a, a) || !known(&self.input_b, b) || !known(&self.output, out) {
                return Err(format!("rule '{out} <- {a}, {b}' uses an undeclared label"));
            }
            if let Some(prev) = seen.insert((a, b), out) {
                if prev != out {
                    return Err(format!("pair ({a}, {b}) maps to both '{prev}' and '{out}'"));
                }
            }
        }
        Ok(())
    }

    /// Output label for a pair: the listed rule if any, else the default.
    pub fn output_for(&self, a: &str, b: &str) -> &str {
        self.rules.iter().find(|(ra, rb, _)| ra == a && rb == b).map_or(&self.default, |(_, _, o)| o)
    }

    fn check_vocab(&self, expected: &[String], cp: &ComputationalPerception) -> Result<(), PerceptionError> {
        if cp.labels().ne(expected.iter().map(String::as_str)) {
            return Err(PerceptionError::VocabularyMismatch {
                rule_base: self.name.clone(),
                expected: expected.to_vec(),
                found: cp.labels().map(str::to_string).collect(),
            });
        }
        Ok(())
    }

    /// Second-order perception from two first-order ones.
    pub fn evaluate(&self, a: &ComputationalPerception, b: &ComputationalPerception) -> Result<ComputationalPerception, PerceptionError> {
        self.check_vocab(&self.input_a, a)?;
        self.check_vocab(&self.input_b, b)?;
        let mut degrees = vec![0.0_f64; self.output.len()];
        for (la, da) in &a.entries {
            for (lb, db) in &b.entries {
                let out = self.output_for(la, lb);
                let k = self.output.iter().position(|o| o == out).expect("validated output label");
                degrees[k] = degrees[k].max((da + db) / 2.0);
            }
        }
        Ok(ComputationalPerception { variable: self.name.clone(), entries: self.output.iter().cloned().zip(degrees).collect() })
    }

    fn to_manifest(&self, input_a_name: &str, input_b_name: &str) -> String {
        let mut s = format!("[{}]\n", self.name);
        s += &format!("input_a {input_a_name}: {}\n", self.input_a.join(", "));
        s += &format!("input_b {input_b_name}: {}\n", self.input_b.join(", "));
        s += &format!("output {}\n", self.output.join(", "));
        for (a, b, o) in &self.rules {
            s += &format!("{o} <- {a}, {b}\n");
        }
        s += &format!("default {}\n", self.default);
        s
    }
}

/// A parsed rules manifest: rule bases keyed by section name, plus the
/// input variable names declared for each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RulesManifest {
    pub bases: Vec<(FuzzyRuleBase, String, String)>,
}

impl RulesManifest {
    pub fn parse(text: &str) -> Result<Self, PerceptionError> {
        let mut bases: Vec<(FuzzyRuleBase, String, String)> = Vec::new();
        let mut last_line = 0;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            last_line = line_no;
            let err = |msg: String| PerceptionError::Manifest { line: line_no, msg };
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                Self::finish(&bases, line_no)?;
                let rb = FuzzyRuleBase {
                    name: name.trim().to_string(),
                    input_a: vec![],
                    input_b: vec![],
                    output: vec![],
                    rules: vec![],
                    default: String::new(),
                };
                bases.push((rb, String::new(), String::new()));
                continue;
            }
            let (rb, a_name, b_name) = bases.last_mut().ok_or_else(|| err("rule outside a [section]".into()))?;
            let list = |s: &str| s.split(',').map(|l| l.trim().to_string()).filter(|l| !l.is_empty()).collect::<Vec<_>>();
            if let Some(rest) = line.strip_prefix("input_a ") {
                let (n, v) = rest.split_once(':').ok_or_else(|| err("expected 'input_a name: labels'".into()))?;
                *a_name = n.trim().to_string();
                rb.input_a = list(v);
            } else if let Some(rest) = line.strip_prefix("input_b ") {
                let (n, v) = rest.split_once(':').ok_or_else(|| err("expected 'input_b name: labels'".into()))?;
                *b_name = n.trim().to_string();
                rb.input_b = list(v);
            } else if let Some(rest) = line.strip_prefix("output ") {
                rb.output = list(rest);
            } else if let Some(rest) = line.strip_prefix("default ") {
                rb.default = rest.trim().to_string();
            } else if let Some((out, ins)) = line.split_once("<-") {
                let ins = list(ins);
                if ins.len() != 2 {
                    return Err(err("rule needs exactly two input labels".into()));
                }
                rb.rules.push((ins[0].clone(), ins[1].clone(), out.trim().to_string()));
            } else {
                return Err(err(format!("unrecognised line '{line}'")));
            }
        }
        Self::finish(&bases, last_line)?;
        Ok(Self { bases })
    }

    fn finish(bases: &[(FuzzyRuleBase, String, String)], line: usize) -> Result<(), PerceptionError> {
        if let Some((rb, _, _)) = bases.last() {
            rb.validate().map_err(|msg| PerceptionError::Manifest { line, msg: format!("[{}] {msg}", rb.name) })?;
        }
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&FuzzyRuleBase> {
        self.bases.iter().find(|(rb, _, _)| rb.name == name).map(|(rb, _, _)| rb)
    }

    pub fn to_text(&self) -> String {
        self.bases.iter().map(|(rb, a, b)| rb.to_manifest(a, b)).collect::<Vec<_>>().join("\n")
    }
}

/// Every perception in the network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cp {
    DistanceOpponentReward,
    DistancePlayerReward,
    DistancePlayerOpponent,
    Protection,
    Time,
    Closeness,
    Attitude,
    Movement,
    Situation,
}

impl Cp {
    pub const ALL: [Cp; 9] = [
        Cp::DistanceOpponentReward,
        Cp::DistancePlayerReward,
        Cp::DistancePlayerOpponent,
        Cp::Protection,
        Cp::Time,
        Cp::Closeness,
        Cp::Attitude,
        Cp::Movement,
        Cp::Situation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Cp::DistanceOpponentReward => "distance_opponent_reward",
            Cp::DistancePlayerReward => "distance_player_reward",
            Cp::DistancePlayerOpponent => "distance_player_opponent",
            Cp::Protection => "protection",
            Cp::Time => "time",
            Cp::Closeness => "closeness",
            Cp::Attitude => "attitude",
            Cp::Movement => "movement",
            Cp::Situation => "situation",
        }
    }
}

impl fmt::Display for Cp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The outcome of running the network on one observation.
#[derive(Debug, Clone, PartialEq)]
pub struct Perceptions {
    cps: Vec<ComputationalPerception>,
}

impl Perceptions {
    pub fn get(&self, cp: Cp) -> &ComputationalPerception {
        &self.cps[cp as usize]
    }

    pub fn best_label(&self, cp: Cp) -> &str {
        self.get(cp).best().0
    }

    pub fn iter(&self) -> impl Iterator<Item = (Cp, &ComputationalPerception)> {
        Cp::ALL.into_iter().zip(&self.cps)
    }
}

/// First-order variables plus the three rule bases, parameterised by the
/// scenario's maximum distance and game length.
#[derive(Debug, Clone)]
pub struct PerceptionNetwork {
    distance_por: LinguisticVariable,
    distance_pr: LinguisticVariable,
    distance_or: LinguisticVariable,
    protection: LinguisticVariable,
    time: LinguisticVariable,
    closeness: LinguisticVariable,
    situation: FuzzyRuleBase,
    attitude: FuzzyRuleBase,
    movement: FuzzyRuleBase,
}

impl PerceptionNetwork {
    pub fn new(max_distance: usize, max_game_ms: u64) -> Self {
        let manifest = RulesManifest::parse(RULES_MANIFEST).expect("built-in rules manifest");
        let rb = |n: &str| manifest.get(n).cloned().expect("built-in rule base");
        let n = max_distance as f64;
        Self {
            distance_por: LinguisticVariable::distance(Cp::DistancePlayerOpponent.name(), n),
            distance_pr: LinguisticVariable::distance(Cp::DistancePlayerReward.name(), n),
            distance_or: LinguisticVariable::distance(Cp::DistanceOpponentReward.name(), n),
            protection: LinguisticVariable::protection(),
            time: LinguisticVariable::time(max_game_ms as f64),
            closeness: LinguisticVariable::closeness(n),
            situation: rb("situation"),
            attitude: rb("attitude"),
            movement: rb("movement"),
        }
    }

    pub fn for_game(maze: &Maze, config: &GameConfig) -> Self {
        Self::new(maze.max_distance(), config.max_game_ms)
    }

    pub fn rule_base(&self, cp: Cp) -> Option<&FuzzyRuleBase> {
        match cp {
            Cp::Situation => Some(&self.situation),
            Cp::Attitude => Some(&self.attitude),
            Cp::Movement => Some(&self.movement),
            _ => None,
        }
    }

    pub fn variable(&self, cp: Cp) -> Option<&LinguisticVariable> {
        match cp {
            Cp::DistanceOpponentReward => Some(&self.distance_or),
            Cp::DistancePlayerReward => Some(&self.distance_pr),
            Cp::DistancePlayerOpponent => Some(&self.distance_por),
            Cp::Protection => Some(&self.protection),
            Cp::Time => Some(&self.time),
            Cp::Closeness => Some(&self.closeness),
            _ => None,
        }
    }

    /// Ordered label vocabulary of a perception.
    pub fn vocabulary(&self, cp: Cp) -> Vec<String> {
        match (self.variable(cp), self.rule_base(cp)) {
            (Some(v), _) => v.labels().map(str::to_string).collect(),
            (_, Some(rb)) => rb.output.clone(),
            _ => unreachable!("every perception has a variable or a rule base"),
        }
    }

    pub fn perceive(&self, row: &TraceRow, maze: &Maze) -> Perceptions {
        let d_po = row.player_opponent_distance();
        let d_pr = row.player_reward_distance();
        let d_or = row.opponent_reward_distance();
        let dor = self.distance_or.perceive(d_or as f64);
        let dpr = self.distance_pr.perceive(d_pr as f64);
        let dpo = self.distance_por.perceive(d_po as f64);
        let prot = self.protection.perceive(protection(maze, row.player, row.opponent));
        let time = self.time.perceive(row.time_ms as f64);
        let close = self.closeness.perceive(closeness(d_pr, d_or) as f64);
        let attitude = self.attitude.evaluate(&dpr, &dor).expect("network vocabularies");
        let movement = self.movement.evaluate(&dpr, &dpo).expect("network vocabularies");
        let situation = self.situation.evaluate(&prot, &dpo).expect("network vocabularies");
        Perceptions { cps: vec![dor, dpr, dpo, prot, time, close, attitude, movement, situation] }
    }

    /// Unlabeled instance for `cfg`: best label and degree per perception.
    pub fn build_instance(&self, cfg: TestId, row: &TraceRow, maze: &Maze) -> Instance {
        let p = self.perceive(row, maze);
        let mut values = Vec::with_capacity(cfg.cps().len() * 2);
        for &cp in cfg.cps() {
            let cp = p.get(cp);
            let k = cp.best_index().expect("non-empty vocabulary");
            values.push(Value::Nominal(k));
            values.push(Value::Numeric(cp.entries[k].1));
        }
        Instance::new(values, None)
    }

    pub fn schema(&self, cfg: TestId) -> Schema {
        let mut attrs = Vec::new();
        for &cp in cfg.cps() {
            attrs.push(AttributeSpec::nominal(format!("cp_{}", cp.name()), self.vocabulary(cp)));
            attrs.push(AttributeSpec::numeric(format!("dv_{}", cp.name())));
        }
        Schema::new(cfg.relation(), attrs).expect("generated schema is valid")
    }
}

/// Best label of a perception: highest degree, earliest label on ties.
pub fn best_label(cp: &ComputationalPerception) -> (&str, f64) {
    cp.best()
}

/// Class from the change in player-opponent distance: keeping or growing
/// the gap is evading, unless the opponent is far enough to be ignored.
pub fn label_distance_rule(prev_d_po: usize, curr_d_po: usize, curr_distance: &ComputationalPerception) -> ClassLabel {
    if curr_distance.best().0 == "large" {
        ClassLabel::GoAhead
    } else if curr_d_po >= prev_d_po {
        ClassLabel::GetAway
    } else {
        ClassLabel::GoAhead
    }
}

const ATTITUDES: [&str; 4] = ["wise", "brave", "prudent", "passive"];
const MOVEMENTS: [&str; 4] = ["good", "scared", "kamikaze", "bad"];
const SITUATIONS: [&str; 4] = ["risky", "dangerous", "safe", "easy"];

/// Class from the second-order labels: go ahead only when the attitude is
/// wise, the movement good or scared and the situation safe or easy.
pub fn label_t3(attitude: &str, movement: &str, situation: &str) -> Result<ClassLabel, PerceptionError> {
    let check = |kind: &'static str, vocab: &[&str], l: &str| {
        if vocab.contains(&l) {
            Ok(())
        } else {
            Err(PerceptionError::UnknownLabel { kind, label: l.to_string() })
        }
    };
    check("attitude", &ATTITUDES, attitude)?;
    check("movement", &MOVEMENTS, movement)?;
    check("situation", &SITUATIONS, situation)?;
    let go = attitude == "wise" && matches!(movement, "good" | "scared") && matches!(situation, "safe" | "easy");
    Ok(if go { ClassLabel::GoAhead } else { ClassLabel::GetAway })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Labeling {
    DistanceRule,
    RuleBaseT3,
}

/// The five experiment configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TestId {
    #[serde(rename = "t1")]
    T1,
    #[serde(rename = "t2-9")]
    T2_9,
    #[serde(rename = "t2-17")]
    T2_17,
    #[serde(rename = "t3-9")]
    T3_9,
    #[serde(rename = "t3-17")]
    T3_17,
}

const T1_CPS: [Cp; 3] = [Cp::Protection, Cp::DistancePlayerOpponent, Cp::Closeness];
const NINE_CPS: [Cp; 4] = [Cp::Time, Cp::Attitude, Cp::Movement, Cp::Situation];
const SEVENTEEN_CPS: [Cp; 8] = [
    Cp::DistanceOpponentReward,
    Cp::DistancePlayerReward,
    Cp::DistancePlayerOpponent,
    Cp::Protection,
    Cp::Time,
    Cp::Attitude,
    Cp::Movement,
    Cp::Situation,
];

impl TestId {
    pub const ALL: [TestId; 5] = [TestId::T1, TestId::T2_9, TestId::T2_17, TestId::T3_9, TestId::T3_17];

    /// Perceptions used as attributes, in column order.
    pub fn cps(self) -> &'static [Cp] {
        match self {
            TestId::T1 => &T1_CPS,
            TestId::T2_9 | TestId::T3_9 => &NINE_CPS,
            TestId::T2_17 | TestId::T3_17 => &SEVENTEEN_CPS,
        }
    }

    pub fn labeling(self) -> Labeling {
        match self {
            TestId::T1 | TestId::T2_9 | TestId::T2_17 => Labeling::DistanceRule,
            TestId::T3_9 | TestId::T3_17 => Labeling::RuleBaseT3,
        }
    }

    /// Column count including the class.
    pub fn columns(self) -> usize {
        self.cps().len() * 2 + 1
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TestId::T1 => "t1",
            TestId::T2_9 => "t2-9",
            TestId::T2_17 => "t2-17",
            TestId::T3_9 => "t3-9",
            TestId::T3_17 => "t3-17",
        }
    }

    pub fn relation(self) -> String {
        self.as_str().replace('-', "_")
    }
}

impl fmt::Display for TestId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TestId {
    type Err = PerceptionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        TestId::ALL.into_iter().find(|t| t.as_str() == norm).ok_or_else(|| PerceptionError::UnknownConfig(s.to_string()))
    }
}

/// Class of a row under `cfg`'s labeling. `prev_d_po` is the
/// player-opponent distance on the previous row.
pub fn label_row(cfg: TestId, p: &Perceptions, prev_d_po: usize, row: &TraceRow) -> Result<ClassLabel, PerceptionError> {
    match cfg.labeling() {
        Labeling::DistanceRule => {
            Ok(label_distance_rule(prev_d_po, row.player_opponent_distance(), p.get(Cp::DistancePlayerOpponent)))
        }
        Labeling::RuleBaseT3 => {
            label_t3(p.best_label(Cp::Attitude), p.best_label(Cp::Movement), p.best_label(Cp::Situation))
        }
    }
}

/// One labeled instance per human row of every trace.
pub fn build_dataset(cfg: TestId, traces: &[Trace], mazes: &BTreeMap<String, Maze>) -> Result<Dataset, PerceptionError> {
    if traces.is_empty() {
        return Err(PerceptionError::EmptyTraces);
    }
    let mut schema = None;
    let mut rows = Vec::new();
    for trace in traces {
        let maze = mazes
            .get(&trace.maze_ref)
            .ok_or_else(|| PerceptionError::UnknownMaze { game_id: trace.game_id.clone(), maze: trace.maze_ref.clone() })?;
        let net = PerceptionNetwork::for_game(maze, &trace.config);
        let s = net.schema(cfg);
        match &schema {
            None => schema = Some(s),
            Some(prev) if *prev != s => {
                return Err(DatasetError::Schema(format!("trace '{}' yields a different schema", trace.game_id)).into())
            }
            _ => {}
        }
        let mut prev_d_po = None;
        for row in trace.rows.iter().filter(|r| r.actor == Actor::Human) {
            let d_po = row.player_opponent_distance();
            let p = net.perceive(row, maze);
            let class = label_row(cfg, &p, prev_d_po.unwrap_or(d_po), row)?;
            let mut inst = net.build_instance(cfg, row, maze);
            inst.class = Some(class);
            rows.push(inst);
            prev_d_po = Some(d_po);
        }
    }
    Ok(Dataset::new(schema.expect("at least one trace"), rows)?)
}
