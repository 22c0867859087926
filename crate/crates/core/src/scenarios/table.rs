//! Column-oriented result tables and their CSV / JSON encodings.
//!
//! CSV floats carry 17 significant digits so every value parses back to the
//! same `f64`. Fixed notation is used for magnitudes in `[1e-4, 1e16)`,
//! scientific otherwise; a float cell always contains `.`, `e`, `inf` or
//! `NaN`, which keeps it distinguishable from an integer cell.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde_json::{Map, Value};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    Float(Vec<f64>),
    Int(Vec<i64>),
    Text(Vec<String>),
}

impl Column {
    pub fn len(&self) -> usize {
        match self {
            Column::Float(v) => v.len(),
            Column::Int(v) => v.len(),
            Column::Text(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn cell(&self, row: usize) -> String {
        match self {
            Column::Float(v) => format_float(v[row]),
            Column::Int(v) => v[row].to_string(),
            Column::Text(v) => v[row].clone(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Column::Float(v) => v.iter().map(|&x| float_to_json(x)).collect(),
            Column::Int(v) => v.iter().map(|&x| Value::from(x)).collect(),
            Column::Text(v) => v.iter().map(|x| Value::from(x.as_str())).collect(),
        }
    }

    pub fn as_float(&self) -> Option<&[f64]> {
        match self {
            Column::Float(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<&[i64]> {
        match self {
            Column::Int(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_text(&self) -> Option<&[String]> {
        match self {
            Column::Text(v) => Some(v),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Json,
}

impl FromStr for TableFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(TableFormat::Csv),
            "json" => Ok(TableFormat::Json),
            other => Err(Error::Config(format!("unknown output format `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResultTable {
    columns: Vec<(String, Column)>,
    pub metadata: Map<String, Value>,
}

impl ResultTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a column. All columns must have the same length and distinct names.
    pub fn push_column(&mut self, name: impl Into<String>, column: Column) -> Result<()> {
        let name = name.into();
        if self.columns.iter().any(|(n, _)| *n == name) {
            return Err(Error::Table(format!("duplicate column `{name}`")));
        }
        if let Some((_, first)) = self.columns.first() {
            if first.len() != column.len() {
                return Err(Error::Table(format!(
                    "column `{name}` has {} rows, expected {}",
                    column.len(),
                    first.len()
                )));
            }
        }
        self.columns.push((name, column));
        Ok(())
    }

    pub fn with_column(mut self, name: impl Into<String>, column: Column) -> Result<Self> {
        self.push_column(name, column)?;
        Ok(self)
    }

    pub fn columns(&self) -> &[(String, Column)] {
        &self.columns
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|(n, _)| n == name).map(|(_, c)| c)
    }

    pub fn floats(&self, name: &str) -> Option<&[f64]> {
        self.column(name).and_then(Column::as_float)
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, |(_, c)| c.len())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.columns.iter().map(|(n, _)| n.as_str()))?;
        for row in 0..self.rows() {
            w.write_record(self.columns.iter().map(|(_, c)| c.cell(row)))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        let columns: Map<String, Value> = self.columns.iter().map(|(n, c)| (n.clone(), c.to_json())).collect();
        let mut root = Map::new();
        root.insert("columns".into(), Value::Object(columns));
        root.insert("metadata".into(), Value::Object(self.metadata.clone()));
        Value::Object(root)
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut out, &self.to_json())?;
        out.write_all(b"\n")?;
        Ok(())
    }

    pub fn write<W: Write>(&self, out: W, format: TableFormat) -> Result<()> {
        match format {
            TableFormat::Csv => self.write_csv(out),
            TableFormat::Json => self.write_json(out),
        }
    }

    pub fn to_bytes(&self, format: TableFormat) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        self.write(&mut buf, format)?;
        Ok(buf)
    }

    /// Parses CSV written by [`ResultTable::write_csv`]. Metadata is not part
    /// of the CSV encoding and comes back empty.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let names: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
        let mut cells: Vec<Vec<String>> = vec![Vec::new(); names.len()];
        for record in reader.records() {
            let record = record?;
            for (col, value) in cells.iter_mut().zip(record.iter()) {
                col.push(value.to_owned());
            }
        }
        let mut table = ResultTable::new();
        for (name, col) in names.into_iter().zip(cells) {
            table.push_column(name, infer_column(col))?;
        }
        Ok(table)
    }

    /// Parses JSON written by [`ResultTable::write_json`]. Integer arrays come
    /// back as `Int`, arrays holding any non-integer number (or `null`, the
    /// encoding of a non-finite float) as `Float`.
    pub fn from_json(text: &str) -> Result<Self> {
        let root: Value = serde_json::from_str(text)?;
        let columns = root
            .get("columns")
            .and_then(Value::as_object)
            .ok_or_else(|| Error::Table("missing `columns` object".into()))?;
        let mut table = ResultTable::new();
        for (name, values) in columns {
            let values = values
                .as_array()
                .ok_or_else(|| Error::Table(format!("column `{name}` is not an array")))?;
            table.push_column(name.clone(), json_column(name, values)?)?;
        }
        if let Some(meta) = root.get("metadata").and_then(Value::as_object) {
            table.metadata = meta.clone();
        }
        Ok(table)
    }
}

/// Writes `table` to `path`. For CSV, metadata goes to a `<path>.meta.json`
/// sidecar when `sidecar` is set.
pub fn emit_table(table: &ResultTable, path: &Path, format: TableFormat, sidecar: bool) -> Result<()> {
    fs::write(path, table.to_bytes(format)?)?;
    if sidecar && format == TableFormat::Csv {
        let mut meta = serde_json::to_vec_pretty(&Value::Object(table.metadata.clone()))?;
        meta.push(b'\n');
        fs::write(sidecar_path(path), meta)?;
    }
    Ok(())
}

pub fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".meta.json");
    name.into()
}

/// 17 significant digits; see the module docs.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.16e}");
    let exp: i32 = sci[sci.find('e').expect("exponent") + 1..].parse().expect("exponent");
    if (-4..16).contains(&exp) {
        format!("{:.*}", (16 - exp) as usize, x)
    } else {
        sci
    }
}

fn float_to_json(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

fn looks_like_float(s: &str) -> bool {
    s.contains(['.', 'e', 'E']) || s.ends_with("inf") || s == "NaN"
}

fn infer_column(cells: Vec<String>) -> Column {
    if !cells.is_empty() && cells.iter().all(|s| !looks_like_float(s) && s.parse::<i64>().is_ok()) {
        return Column::Int(cells.iter().map(|s| s.parse().unwrap()).collect());
    }
    if !cells.is_empty() && cells.iter().all(|s| looks_like_float(s) && s.parse::<f64>().is_ok()) {
        return Column::Float(cells.iter().map(|s| s.parse().unwrap()).collect());
    }
    if cells.is_empty() {
        return Column::Float(Vec::new());
    }
    Column::Text(cells)
}

fn json_column(name: &str, values: &[Value]) -> Result<Column> {
    if values.is_empty() {
        return Ok(Column::Float(Vec::new()));
    }
    if values.iter().all(Value::is_string) {
        return Ok(Column::Text(values.iter().map(|v| v.as_str().unwrap().to_owned()).collect()));
    }
    if values.iter().all(|v| v.is_i64()) {
        return Ok(Column::Int(values.iter().map(|v| v.as_i64().unwrap()).collect()));
    }
    values
        .iter()
        .map(|v| match v {
            Value::Null => Ok(f64::NAN),
            Value::Number(n) => n.as_f64().ok_or_else(|| Error::Table(format!("bad number in `{name}`"))),
            _ => Err(Error::Table(format!("column `{name}` mixes types"))),
        })
        .collect::<Result<Vec<_>>>()
        .map(Column::Float)
}
