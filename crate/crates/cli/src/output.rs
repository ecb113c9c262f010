//! Rendering of command results. Every file starts with a stamp carrying
//! the tool version, schema version and full parameter echo.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde_json::{json, Value};

use crate::args::Format;

pub const SCHEMA: u32 = 1;

/// A tabular result with optional trailing summary lines.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    /// Emitted as `# key=value` lines after the rows (CSV) or as an object (JSON).
    pub summary: Vec<(String, Value)>,
}

#[derive(Debug, Clone)]
pub enum Body {
    Table(Table),
    Report(Value),
}

impl Body {
    fn default_format(&self) -> Format {
        match self {
            Body::Table(_) => Format::Csv,
            Body::Report(_) => Format::Json,
        }
    }
}

pub struct Rendered {
    pub command: &'static str,
    pub params: Value,
    pub body: Body,
}

/// Shortest round-trip representation, in exponent form for very small
/// or very large magnitudes.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && !(1e-4..1e16).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

/// `a.b.c = value` pairs of a nested JSON value.
fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(m) => m.iter().for_each(|(k, x)| flatten(&key(k), x, out)),
        Value::Array(a) => a.iter().enumerate().for_each(|(i, x)| flatten(&key(&i.to_string()), x, out)),
        other => out.push((prefix.to_string(), scalar(other))),
    }
}

impl Rendered {
    pub fn render(&self, format: Option<Format>) -> String {
        let version = env!("CARGO_PKG_VERSION");
        match format.unwrap_or_else(|| self.body.default_format()) {
            Format::Csv => {
                let mut s =
                    format!("# flowlab {version} schema={SCHEMA} command={} params={}\n", self.command, self.params);
                match &self.body {
                    Body::Table(t) => {
                        s.push_str(&t.columns.join(","));
                        s.push('\n');
                        for r in &t.rows {
                            s.push_str(&r.join(","));
                            s.push('\n');
                        }
                        for (k, v) in &t.summary {
                            let _ = writeln!(s, "# {k}={}", scalar(v));
                        }
                    }
                    Body::Report(v) => {
                        let mut pairs = Vec::new();
                        flatten("", v, &mut pairs);
                        s.push_str("key,value\n");
                        for (k, v) in pairs {
                            let _ = writeln!(s, "{k},{v}");
                        }
                    }
                }
                s
            }
            Format::Json => {
                let result = match &self.body {
                    Body::Table(t) => {
                        let rows: Vec<Value> = t
                            .rows
                            .iter()
                            .map(|r| {
                                Value::Object(t.columns.iter().zip(r).map(|(c, x)| (c.to_string(), cell(x))).collect())
                            })
                            .collect();
                        let summary: serde_json::Map<String, Value> = t.summary.iter().cloned().collect();
                        json!({ "rows": rows, "summary": summary })
                    }
                    Body::Report(v) => v.clone(),
                };
                let doc = json!({
                    "flowlab": version,
                    "schema": SCHEMA,
                    "command": self.command,
                    "params": self.params,
                    "result": result,
                });
                let mut s = serde_json::to_string_pretty(&doc).expect("JSON values serialize");
                s.push('\n');
                s
            }
        }
    }
}

/// Table cells are strings; numbers go back to JSON numbers.
fn cell(x: &str) -> Value {
    if x.is_empty() {
        return Value::Null;
    }
    x.parse::<f64>()
        .ok()
        .and_then(serde_json::Number::from_f64)
        .map(Value::Number)
        .unwrap_or_else(|| Value::String(x.to_string()))
}

pub fn emit(text: &str, path: Option<&Path>) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()
        }
    }
}
