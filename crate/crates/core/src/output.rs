//! Tabular results with a provenance header, written as CSV or JSON lines.
//!
//! CSV files start with a block of `# key: value` lines (command, config hash, seed,
//! code version, then any scalar results), followed by one header row whose column
//! names carry their units in brackets. The JSON-lines form holds the same data: a
//! `meta` object, a `summary` object, then one object per row.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use crate::error::Result;

/// Environment variable naming the directory used when `--out` is absent.
pub const OUT_DIR_ENV: &str = "FTF_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Jsonl,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Jsonl => "jsonl",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Flag(bool),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => fmt_num(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => csv_quote(s),
            Cell::Flag(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) if x.is_finite() => json!(x),
            Cell::Num(x) => json!(fmt_num(*x)),
            Cell::Int(i) => json!(i),
            Cell::Text(s) => json!(s),
            Cell::Flag(b) => json!(b),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Flag(x)
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

/// Shortest round-trip representation; identical input gives identical text.
fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:?}")
    }
}

fn csv_quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Debug, Clone)]
pub struct Column {
    pub name: String,
    pub unit: String,
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    /// Scalar results: (name, value, unit).
    pub summary: Vec<(String, Cell, String)>,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[(&str, &str)]) -> Self {
        Table {
            columns: columns.iter().map(|(n, u)| Column { name: n.to_string(), unit: u.to_string() }).collect(),
            ..Default::default()
        }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    pub fn summary(&mut self, key: &str, value: impl Into<Cell>, unit: &str) -> &mut Self {
        self.summary.push((key.to_string(), value.into(), unit.to_string()));
        self
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.csv(),
            Format::Jsonl => self.jsonl(),
        }
    }

    fn csv(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.meta {
            let _ = writeln!(s, "# {k}: {v}");
        }
        for (k, v, u) in &self.summary {
            let v = match v {
                Cell::Text(t) => t.clone(),
                other => other.csv(),
            };
            if u.is_empty() {
                let _ = writeln!(s, "# {k}: {v}");
            } else {
                let _ = writeln!(s, "# {k}: {v} [{u}]");
            }
        }
        let header: Vec<String> = self
            .columns
            .iter()
            .map(|c| if c.unit.is_empty() { c.name.clone() } else { format!("{} [{}]", c.name, c.unit) })
            .collect();
        let _ = writeln!(s, "{}", header.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        s
    }

    fn jsonl(&self) -> String {
        let mut meta = Map::new();
        for (k, v) in &self.meta {
            meta.insert(k.clone(), json!(v));
        }
        let units: Map<String, Value> = self.columns.iter().map(|c| (c.name.clone(), json!(c.unit))).collect();
        meta.insert("units".into(), Value::Object(units));
        let mut summary = Map::new();
        for (k, v, u) in &self.summary {
            summary.insert(k.clone(), json!({ "value": v.json(), "unit": u }));
        }
        let mut s = String::new();
        let _ = writeln!(s, "{}", json!({ "meta": meta }));
        let _ = writeln!(s, "{}", json!({ "summary": summary }));
        for row in &self.rows {
            let obj: Map<String, Value> = self.columns.iter().zip(row).map(|(c, v)| (c.name.clone(), v.json())).collect();
            let _ = writeln!(s, "{}", Value::Object(obj));
        }
        s
    }
}

/// Where a command's output goes: `--out`, else `$FTF_OUT_DIR/<command>.<ext>`, else stdout.
pub fn destination(out: Option<&Path>, command: &str, format: Format) -> Option<PathBuf> {
    if let Some(p) = out {
        return Some(p.to_path_buf());
    }
    std::env::var_os(OUT_DIR_ENV).map(|d| PathBuf::from(d).join(format!("{command}.{}", format.extension())))
}

pub fn write(table: &Table, format: Format, dest: Option<&Path>) -> Result<()> {
    let text = table.render(format);
    match dest {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(p, text)?;
        }
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}
