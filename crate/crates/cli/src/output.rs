use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::error::{CliError, CliResult};

/// Output formats selectable with `--format`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Svg => "svg",
        }
    }
}

/// Twelve significant digits in scientific notation.
pub fn num(x: f64) -> String {
    format!("{x:.11e}")
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(usize),
    Num(f64),
    Text(String),
}

/// Column-oriented data product written as CSV or JSON.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(columns: &[S]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn push_nums(&mut self, row: impl IntoIterator<Item = f64>) {
        self.push(row.into_iter().map(Cell::Num).collect());
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            for (k, cell) in row.iter().enumerate() {
                if k > 0 {
                    s.push(',');
                }
                match cell {
                    Cell::Int(i) => write!(s, "{i}").unwrap(),
                    Cell::Num(x) => s.push_str(&num(*x)),
                    Cell::Text(t) => s.push_str(t),
                }
            }
            s.push('\n');
        }
        s
    }

    /// `{"columns": [...], "rows": [[...], ...]}`; non-finite numbers become null.
    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|c| match c {
                        Cell::Int(i) => Value::from(*i),
                        Cell::Num(x) => Value::from(*x),
                        Cell::Text(t) => Value::from(t.as_str()),
                    })
                    .collect()
            })
            .collect();
        serde_json::json!({ "columns": self.columns, "rows": rows })
    }
}

/// Writes into the output directory and records every path.
pub struct Sink {
    dir: PathBuf,
    pub written: Vec<PathBuf>,
}

impl Sink {
    pub fn new(dir: &Path) -> CliResult<Self> {
        fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn text(&mut self, name: &str, body: &str) -> CliResult<()> {
        let path = self.dir.join(name);
        fs::write(&path, body).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
        self.written.push(path);
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let mut body =
            serde_json::to_string_pretty(value).map_err(|e| CliError::Numeric(e.to_string()))?;
        body.push('\n');
        self.text(name, &body)
    }

    /// `stem.csv` and/or `stem.json` as selected.
    pub fn table(&mut self, stem: &str, table: &Table, formats: &[Format]) -> CliResult<()> {
        if formats.contains(&Format::Csv) {
            self.text(&format!("{stem}.csv"), &table.to_csv())?;
        }
        if formats.contains(&Format::Json) {
            self.json(&format!("{stem}.json"), &table.to_json())?;
        }
        Ok(())
    }
}
