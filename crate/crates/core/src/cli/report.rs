//! Ordered key/value reports rendered as text lines or as a JSON object.
//!
//! Both renderings carry the same strings: a scalar prints as `key: value`
//! in text and as `"key": "value"` in JSON; a list prints as `[a, b]` in
//! text and as a JSON array of strings.

use serde_json::{Map, Value};

use crate::arith::{format_float, to_f64, Q};
use crate::spaces::MeasurableSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Exact,
    Float,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Val {
    Rat(Q),
    Float(f64),
    Text(String),
    List(Vec<Val>),
}

impl Val {
    pub fn rats<'a>(qs: impl IntoIterator<Item = &'a Q>) -> Val {
        Val::List(qs.into_iter().cloned().map(Val::Rat).collect())
    }

    pub fn texts<S: ToString>(items: impl IntoIterator<Item = S>) -> Val {
        Val::List(items.into_iter().map(|s| Val::Text(s.to_string())).collect())
    }

    fn render(&self, mode: Mode) -> Value {
        match self {
            Val::Rat(q) => Value::String(match mode {
                Mode::Exact => q.to_string(),
                Mode::Float => format_float(to_f64(q)),
            }),
            Val::Float(x) => Value::String(format_float(*x)),
            Val::Text(s) => Value::String(s.clone()),
            Val::List(items) => Value::Array(items.iter().map(|v| v.render(mode)).collect()),
        }
    }
}

impl From<Q> for Val {
    fn from(q: Q) -> Self {
        Val::Rat(q)
    }
}

impl From<&Q> for Val {
    fn from(q: &Q) -> Self {
        Val::Rat(q.clone())
    }
}

impl From<bool> for Val {
    fn from(b: bool) -> Self {
        Val::Text(b.to_string())
    }
}

impl From<usize> for Val {
    fn from(n: usize) -> Self {
        Val::Text(n.to_string())
    }
}

impl From<&str> for Val {
    fn from(s: &str) -> Self {
        Val::Text(s.to_string())
    }
}

impl From<String> for Val {
    fn from(s: String) -> Self {
        Val::Text(s)
    }
}

impl From<&MeasurableSet> for Val {
    fn from(s: &MeasurableSet) -> Self {
        Val::Text(set_text(s))
    }
}

/// `{a, b}` listing the points of a set.
pub fn set_text(s: &MeasurableSet) -> String {
    format!("{{{}}}", s.point_labels().join(", "))
}

/// Text form of one JSON value as produced by [`Report::to_json`].
pub fn value_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(items) => format!("[{}]", items.iter().map(value_text).collect::<Vec<_>>().join(", ")),
        other => other.to_string(),
    }
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    entries: Vec<(String, Val)>,
}

impl Report {
    pub fn new() -> Self {
        Report::default()
    }

    pub fn push(&mut self, key: impl Into<String>, val: impl Into<Val>) -> &mut Self {
        self.entries.push((key.into(), val.into()));
        self
    }

    pub fn entries(&self) -> &[(String, Val)] {
        &self.entries
    }

    pub fn to_text(&self, mode: Mode) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            out.push_str(k);
            out.push_str(": ");
            out.push_str(&value_text(&v.render(mode)));
            out.push('\n');
        }
        out
    }

    pub fn to_json_value(&self, mode: Mode) -> Value {
        let mut map = Map::new();
        for (k, v) in &self.entries {
            map.insert(k.clone(), v.render(mode));
        }
        Value::Object(map)
    }

    pub fn to_json(&self, mode: Mode) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json_value(mode)).expect("reports serialize");
        s.push('\n');
        s
    }
}

/// Rebuilds the text rendering from a JSON report, for equivalence checks.
pub fn json_to_text(json: &str) -> Option<String> {
    let v: Value = serde_json::from_str(json).ok()?;
    let obj = v.as_object()?;
    Some(obj.iter().map(|(k, v)| format!("{k}: {}\n", value_text(v))).collect())
}
