//! Deterministic result emission. A report is provenance metadata plus one
//! or more named tables; it renders as CSV with `# key = value` header
//! lines (the default) or as an equivalent JSON document. Nothing
//! time-dependent is ever written — the same invocation must produce
//! byte-identical files.

use clap::ValueEnum;
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Uint(u64),
    Num(f64),
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}
impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}
impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Uint(v)
    }
}
impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Uint(v as u64)
    }
}
impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            // shortest round-trip decimal; our text cells never contain
            // separators, so no quoting layer is needed
            Cell::Text(s) => {
                debug_assert!(!s.contains(',') && !s.contains('\n'));
                s.clone()
            }
            Cell::Uint(v) => format!("{v}"),
            Cell::Num(v) => format!("{v}"),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Text(s) => serde_json::Value::String(s.clone()),
            Cell::Uint(v) => serde_json::Value::from(*v),
            Cell::Num(v) => serde_json::Number::from_f64(*v)
                .map(serde_json::Value::Number)
                .unwrap_or(serde_json::Value::Null),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub name: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &'static str, columns: &[&'static str]) -> Self {
        Self { name, columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        assert_eq!(cells.len(), self.columns.len(), "row width mismatch in `{}`", self.name);
        self.rows.push(cells);
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    meta: Vec<(String, String)>,
    tables: Vec<Table>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Self {
            meta: vec![
                ("tool".into(), "cvswitch".into()),
                ("version".into(), env!("CARGO_PKG_VERSION").into()),
                ("command".into(), command.into()),
            ],
            tables: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl Into<String>) {
        self.meta.push((key.into(), value.into()));
    }

    pub fn push(&mut self, table: Table) {
        self.tables.push(table);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.render_csv(),
            Format::Json => self.render_json(),
        }
    }

    fn render_csv(&self) -> String {
        let mut out = String::new();
        for (key, value) in &self.meta {
            let _ = writeln!(out, "# {key} = {value}");
        }
        for (i, table) in self.tables.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            let _ = writeln!(out, "# table = {}", table.name);
            let _ = writeln!(out, "{}", table.columns.join(","));
            for row in &table.rows {
                let cells: Vec<String> = row.iter().map(Cell::csv).collect();
                let _ = writeln!(out, "{}", cells.join(","));
            }
        }
        out
    }

    fn render_json(&self) -> String {
        let mut meta = serde_json::Map::new();
        for (key, value) in &self.meta {
            meta.insert(key.clone(), serde_json::Value::String(value.clone()));
        }
        let tables: Vec<serde_json::Value> = self
            .tables
            .iter()
            .map(|t| {
                serde_json::json!({
                    "name": t.name,
                    "columns": t.columns,
                    "rows": t.rows.iter()
                        .map(|row| row.iter().map(Cell::json).collect::<Vec<_>>())
                        .collect::<Vec<_>>(),
                })
            })
            .collect();
        let document = serde_json::json!({
            "meta": serde_json::Value::Object(meta),
            "tables": tables,
        });
        let mut text = serde_json::to_string_pretty(&document).expect("report serializes");
        text.push('\n');
        text
    }
}
