//! Labeled datasets over mixed nominal/numeric attributes.
//!
//! Two on-disk forms are supported: CSV with a JSON schema sidecar
//! (`<name>.schema.json`), and the attribute-relation (ARFF) text format.

use std::fmt;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("row {row} does not conform to schema: {msg}")]
    Conformance { row: usize, msg: String },
}

/// The action class. `GetAway` is the positive class for scoring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassLabel {
    GoAhead,
    GetAway,
}

impl ClassLabel {
    /// Declaration order; also the tie-break order for majority votes.
    pub const ALL: [ClassLabel; 2] = [ClassLabel::GoAhead, ClassLabel::GetAway];
    pub const POSITIVE: ClassLabel = ClassLabel::GetAway;

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ClassLabel::GoAhead => "go_ahead",
            ClassLabel::GetAway => "get_away",
        }
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "go_ahead" => Ok(ClassLabel::GoAhead),
            "get_away" => Ok(ClassLabel::GetAway),
            other => Err(format!("unknown class '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum AttributeKind {
    Nominal { values: Vec<String> },
    Numeric,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeSpec {
    pub name: String,
    #[serde(flatten)]
    pub kind: AttributeKind,
}

impl AttributeSpec {
    pub fn nominal<S: Into<String>>(name: impl Into<String>, values: impl IntoIterator<Item = S>) -> Self {
        Self { name: name.into(), kind: AttributeKind::Nominal { values: values.into_iter().map(Into::into).collect() } }
    }

    pub fn numeric(name: impl Into<String>) -> Self {
        Self { name: name.into(), kind: AttributeKind::Numeric }
    }

    pub fn is_nominal(&self) -> bool {
        matches!(self.kind, AttributeKind::Nominal { .. })
    }

    /// Declared values of a nominal attribute (empty for numeric).
    pub fn values(&self) -> &[String] {
        match &self.kind {
            AttributeKind::Nominal { values } => values,
            AttributeKind::Numeric => &[],
        }
    }

    pub fn value_index(&self, label: &str) -> Option<usize> {
        self.values().iter().position(|v| v == label)
    }

    fn validate(&self) -> Result<(), DatasetError> {
        if let AttributeKind::Nominal { values } = &self.kind {
            if values.is_empty() {
                return Err(DatasetError::Schema(format!("nominal attribute '{}' has no values", self.name)));
            }
            for (i, v) in values.iter().enumerate() {
                if values[..i].contains(v) {
                    return Err(DatasetError::Schema(format!("attribute '{}' repeats value '{v}'", self.name)));
                }
            }
        }
        Ok(())
    }
}

/// A single attribute value. Nominal values are indices into the
/// attribute's declared value list.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Value {
    Nominal(usize),
    Numeric(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub values: Vec<Value>,
    pub class: Option<ClassLabel>,
}

impl Instance {
    pub fn new(values: Vec<Value>, class: Option<ClassLabel>) -> Self {
        Self { values, class }
    }
}

/// Ordered attribute list; the class attribute is implicit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    pub relation: String,
    pub attributes: Vec<AttributeSpec>,
}

pub const CLASS_ATTRIBUTE: &str = "action";

impl Schema {
    pub fn new(relation: impl Into<String>, attributes: Vec<AttributeSpec>) -> Result<Self, DatasetError> {
        let schema = Self { relation: relation.into(), attributes };
        schema.validate()?;
        Ok(schema)
    }

    pub fn validate(&self) -> Result<(), DatasetError> {
        for (i, a) in self.attributes.iter().enumerate() {
            a.validate()?;
            if a.name == CLASS_ATTRIBUTE || self.attributes[..i].iter().any(|b| b.name == a.name) {
                return Err(DatasetError::Schema(format!("duplicate attribute name '{}'", a.name)));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.attributes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attributes.is_empty()
    }

    /// Checks arity and value kinds of an instance.
    pub fn check(&self, inst: &Instance) -> Result<(), String> {
        if inst.values.len() != self.attributes.len() {
            return Err(format!("expected {} values, found {}", self.attributes.len(), inst.values.len()));
        }
        for (a, v) in self.attributes.iter().zip(&inst.values) {
            match (&a.kind, v) {
                (AttributeKind::Nominal { values }, Value::Nominal(i)) if *i < values.len() => {}
                (AttributeKind::Nominal { .. }, Value::Nominal(i)) => {
                    return Err(format!("value index {i} undeclared for '{}'", a.name));
                }
                (AttributeKind::Numeric, Value::Numeric(x)) if x.is_finite() => {}
                _ => return Err(format!("wrong value kind for '{}'", a.name)),
            }
        }
        Ok(())
    }

    fn render(&self, i: usize, v: &Value) -> String {
        match v {
            Value::Nominal(k) => self.attributes[i].values()[*k].clone(),
            Value::Numeric(x) => x.to_string(),
        }
    }

    fn parse_value(&self, i: usize, text: &str) -> Result<Value, String> {
        let a = &self.attributes[i];
        match &a.kind {
            AttributeKind::Nominal { .. } => a
                .value_index(text)
                .map(Value::Nominal)
                .ok_or_else(|| format!("value '{text}' undeclared for '{}'", a.name)),
            AttributeKind::Numeric => {
                text.parse::<f64>().map(Value::Numeric).map_err(|_| format!("bad number '{text}' for '{}'", a.name))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub schema: Schema,
    pub rows: Vec<Instance>,
}

impl Dataset {
    pub fn new(schema: Schema, rows: Vec<Instance>) -> Result<Self, DatasetError> {
        for (i, r) in rows.iter().enumerate() {
            schema.check(r).map_err(|msg| DatasetError::Conformance { row: i + 1, msg })?;
            if r.class.is_none() {
                return Err(DatasetError::Conformance { row: i + 1, msg: "missing class".into() });
            }
        }
        Ok(Self { schema, rows })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Instances per class, in [`ClassLabel::ALL`] order.
    pub fn class_counts(&self) -> [usize; 2] {
        let mut counts = [0; 2];
        for r in &self.rows {
            if let Some(c) = r.class {
                counts[c.index()] += 1;
            }
        }
        counts
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset { schema: self.schema.clone(), rows: indices.iter().map(|&i| self.rows[i].clone()).collect() }
    }

    /// Writes the CSV body (header row of attribute names plus `action`).
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), DatasetError> {
        let mut w = csv::Writer::from_writer(out);
        let header = self.schema.attributes.iter().map(|a| a.name.as_str()).chain([CLASS_ATTRIBUTE]);
        w.write_record(header).map_err(io::Error::other)?;
        for r in &self.rows {
            let mut rec: Vec<String> = r.values.iter().enumerate().map(|(i, v)| self.schema.render(i, v)).collect();
            rec.push(r.class.map_or("?", ClassLabel::as_str).to_string());
            w.write_record(&rec).map_err(io::Error::other)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: io::Read>(schema: Schema, input: R) -> Result<Dataset, DatasetError> {
        let mut rdr = csv::Reader::from_reader(input);
        let header = rdr.headers().map_err(|e| DatasetError::Parse { line: 1, msg: e.to_string() })?;
        let expected = schema.attributes.iter().map(|a| a.name.as_str()).chain([CLASS_ATTRIBUTE]);
        if header.iter().ne(expected) {
            return Err(DatasetError::Schema("CSV header does not match schema".into()));
        }
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| DatasetError::Parse { line, msg: e.to_string() })?;
            if rec.len() != schema.len() + 1 {
                return Err(DatasetError::Parse { line, msg: format!("expected {} fields", schema.len() + 1) });
            }
            let values = (0..schema.len())
                .map(|k| schema.parse_value(k, &rec[k]))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|msg| DatasetError::Parse { line, msg })?;
            let class = rec[schema.len()].parse().map_err(|msg| DatasetError::Parse { line, msg })?;
            rows.push(Instance::new(values, Some(class)));
        }
        Dataset::new(schema, rows)
    }

    /// Sidecar path for a CSV dataset: `x.csv` → `x.schema.json`.
    pub fn schema_path(csv_path: &Path) -> PathBuf {
        csv_path.with_extension("schema.json")
    }

    /// Writes `path` (CSV) and its schema sidecar.
    pub fn save_csv(&self, path: &Path) -> Result<(), DatasetError> {
        let mut body = Vec::new();
        self.write_csv(&mut body)?;
        std::fs::write(path, body)?;
        let schema = serde_json::to_string_pretty(&self.schema).map_err(io::Error::other)?;
        std::fs::write(Self::schema_path(path), schema + "\n")?;
        Ok(())
    }

    /// Loads a dataset from CSV (with sidecar) or ARFF, chosen by extension.
    pub fn load(path: &Path) -> Result<Dataset, DatasetError> {
        if path.extension().is_some_and(|e| e == "arff") {
            return read_arff(io::BufReader::new(std::fs::File::open(path)?));
        }
        let schema_text = std::fs::read_to_string(Self::schema_path(path))?;
        let schema: Schema = serde_json::from_str(&schema_text).map_err(|e| DatasetError::Schema(e.to_string()))?;
        schema.validate()?;
        Dataset::read_csv(schema, std::fs::File::open(path)?)
    }
}

fn arff_quote(s: &str) -> String {
    if s.chars().any(|c| c.is_whitespace() || ",{}'\"%".contains(c)) {
        format!("'{}'", s.replace('\'', "\\'"))
    } else {
        s.to_string()
    }
}

/// Attribute-relation export with nominal domains declared.
pub fn write_arff<W: Write>(ds: &Dataset, mut out: W) -> Result<(), DatasetError> {
    writeln!(out, "@relation {}", arff_quote(&ds.schema.relation))?;
    writeln!(out)?;
    for a in &ds.schema.attributes {
        match &a.kind {
            AttributeKind::Nominal { values } => {
                let vs: Vec<_> = values.iter().map(|v| arff_quote(v)).collect();
                writeln!(out, "@attribute {} {{{}}}", arff_quote(&a.name), vs.join(","))?;
            }
            AttributeKind::Numeric => writeln!(out, "@attribute {} numeric", arff_quote(&a.name))?,
        }
    }
    writeln!(out, "@attribute {CLASS_ATTRIBUTE} {{go_ahead,get_away}}")?;
    writeln!(out)?;
    writeln!(out, "@data")?;
    for r in &ds.rows {
        let mut fields: Vec<String> = r.values.iter().enumerate().map(|(i, v)| arff_quote(&ds.schema.render(i, v))).collect();
        fields.push(r.class.map_or("?", ClassLabel::as_str).to_string());
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(())
}

fn arff_tokens(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut quoted = false;
    let mut chars = s.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '\\' if quoted => {
                if let Some(n) = chars.next() {
                    cur.push(n);
                }
            }
            '\'' => quoted = !quoted,
            ',' if !quoted => out.push(std::mem::take(&mut cur).trim().to_string()),
            _ => cur.push(c),
        }
    }
    out.push(cur.trim().to_string());
    out
}

/// Reads the subset of ARFF this crate writes: nominal and numeric
/// attributes, dense data, last attribute is the class.
pub fn read_arff<R: BufRead>(input: R) -> Result<Dataset, DatasetError> {
    let mut relation = String::new();
    let mut attributes: Vec<AttributeSpec> = Vec::new();
    let mut rows = Vec::new();
    let mut in_data = false;
    let mut schema: Option<Schema> = None;
    for (i, line) in input.lines().enumerate() {
        let line_no = i + 1;
        let err = |msg: String| DatasetError::Parse { line: line_no, msg };
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        if !in_data {
            let lower = t.to_ascii_lowercase();
            if lower.starts_with("@relation") {
                relation = arff_tokens(t["@relation".len()..].trim()).concat();
            } else if lower.starts_with("@attribute") {
                let rest = t["@attribute".len()..].trim();
                let (name, kind) = split_attr_decl(rest).ok_or_else(|| err("bad @attribute".into()))?;
                let spec = if kind.starts_with('{') && kind.ends_with('}') {
                    AttributeSpec::nominal(name, arff_tokens(&kind[1..kind.len() - 1]))
                } else if matches!(kind.to_ascii_lowercase().as_str(), "numeric" | "real" | "integer") {
                    AttributeSpec::numeric(name)
                } else {
                    return Err(err(format!("unsupported attribute type '{kind}'")));
                };
                attributes.push(spec);
            } else if lower.starts_with("@data") {
                let class = attributes.pop().ok_or_else(|| err("no attributes".into()))?;
                if class.values() != ["go_ahead", "get_away"] {
                    return Err(err("last attribute must be the go_ahead/get_away class".into()));
                }
                schema = Some(Schema::new(relation.clone(), std::mem::take(&mut attributes))?);
                in_data = true;
            } else {
                return Err(err(format!("unexpected '{t}'")));
            }
            continue;
        }
        let schema = schema.as_ref().expect("schema set before @data");
        let fields = arff_tokens(t);
        if fields.len() != schema.len() + 1 {
            return Err(err(format!("expected {} fields", schema.len() + 1)));
        }
        let values = (0..schema.len()).map(|k| schema.parse_value(k, &fields[k])).collect::<Result<Vec<_>, _>>().map_err(err)?;
        let class = fields[schema.len()].parse().map_err(err)?;
        rows.push(Instance::new(values, Some(class)));
    }
    let schema = schema.ok_or(DatasetError::Parse { line: 0, msg: "missing @data".into() })?;
    Dataset::new(schema, rows)
}

fn split_attr_decl(rest: &str) -> Option<(String, &str)> {
    if let Some(stripped) = rest.strip_prefix('\'') {
        let end = stripped.find('\'')?;
        Some((stripped[..end].to_string(), stripped[end + 1..].trim()))
    } else {
        let end = rest.find(char::is_whitespace)?;
        Some((rest[..end].to_string(), rest[end..].trim()))
    }
}
