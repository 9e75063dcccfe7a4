//! CSV and JSON rendering of a convergence report.

use std::io::Write;
use std::path::Path;

use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;

use super::{ConvergenceReport, HarnessError, KStatus};
use crate::estimators::RiskMeasure;

/// Bumped whenever the column set or order changes.
pub const SCHEMA_VERSION: u32 = 1;

const MEASURE_FIELDS: [&str; 9] = [
    "var",
    "estimate",
    "se",
    "exceedances",
    "a",
    "scaled",
    "k",
    "rel_gap",
    "p_scaled",
];

pub(crate) fn columns(measures: &[RiskMeasure]) -> Vec<String> {
    let mut cols = vec!["schema_version".to_string(), "p".to_string()];
    for m in measures {
        cols.extend(MEASURE_FIELDS.iter().map(|f| format!("{}_{f}", m.as_str())));
    }
    cols
}

/// One table entry.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Empty,
}

/// Shared by every text output: 17 significant digits, `inf` and `nan` spelled out.
pub fn format_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.16e}")
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Self::Num(v) => format_f64(*v),
            Self::Int(v) => v.to_string(),
            Self::Text(s) => s.clone(),
            Self::Empty => String::new(),
        }
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Self::Num(v) if v.is_finite() => s.serialize_f64(*v),
            Self::Num(v) => s.serialize_str(&format_f64(*v)),
            Self::Int(v) => s.serialize_u64(*v),
            Self::Text(t) => s.serialize_str(t),
            Self::Empty => s.serialize_none(),
        }
    }
}

/// Column names plus rows of cells, rendered as CSV or as JSON objects keyed by column.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

struct JsonRow<'a> {
    columns: &'a [String],
    cells: &'a [Cell],
}

impl Serialize for JsonRow<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.cells.len()))?;
        for (c, v) in self.columns.iter().zip(self.cells) {
            map.serialize_entry(c, v)?;
        }
        map.end()
    }
}

#[derive(Serialize)]
struct JsonDocument<'a, H: Serialize> {
    header: &'a H,
    rows: Vec<JsonRow<'a>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// RFC 4180 quoting, LF line endings.
    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(w);
        out.write_record(&self.columns)?;
        for row in &self.rows {
            out.write_record(row.iter().map(Cell::render))?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is UTF-8")
    }

    /// `{"header": ..., "rows": [{column: value}]}`, pretty-printed with a trailing newline.
    pub fn to_json_string<H: Serialize>(&self, header: &H) -> String {
        let rows = self
            .rows
            .iter()
            .map(|cells| JsonRow {
                columns: &self.columns,
                cells,
            })
            .collect();
        let mut s = serde_json::to_string_pretty(&JsonDocument { header, rows }).expect("table serializes");
        s.push('\n');
        s
    }
}

fn opt(v: Option<f64>) -> Cell {
    v.map_or(Cell::Empty, Cell::Num)
}

impl ConvergenceReport {
    /// Rows as cells in column order.
    fn cell_rows(&self) -> Vec<Vec<Cell>> {
        self.rows
            .iter()
            .map(|row| {
                let mut cells = vec![Cell::Int(SCHEMA_VERSION as u64), Cell::Num(row.p)];
                for (h, c) in self.header.measures.iter().zip(&row.cells) {
                    let k = match &h.k {
                        KStatus::Value { value, .. } => Cell::Num(*value),
                        other => Cell::Text(other.marker().into()),
                    };
                    cells.extend([
                        Cell::Num(c.var),
                        Cell::Num(c.estimate),
                        Cell::Num(c.standard_error),
                        Cell::Int(c.exceedances as u64),
                        Cell::Num(c.a),
                        Cell::Num(c.scaled),
                        k,
                        opt(c.rel_gap),
                        Cell::Num(c.p_scaled),
                    ]);
                }
                cells
            })
            .collect()
    }

    pub fn to_table(&self) -> Table {
        Table {
            columns: self.header.columns.clone(),
            rows: self.cell_rows(),
        }
    }

    pub fn to_csv_string(&self) -> String {
        self.to_table().to_csv_string()
    }

    /// Header object plus the CSV rows keyed by column name.
    pub fn to_json_string(&self) -> String {
        self.to_table().to_json_string(&self.header)
    }

    pub fn write_csv_file(&self, path: &Path) -> Result<(), HarnessError> {
        write_file(path, self.to_csv_string().as_bytes())
    }

    pub fn write_json_file(&self, path: &Path) -> Result<(), HarnessError> {
        write_file(path, self.to_json_string().as_bytes())
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), HarnessError> {
    std::fs::write(path, bytes).map_err(|source| HarnessError::Write {
        path: path.to_path_buf(),
        source,
    })
}
