//! Typed raw tables read from delimited text.
//!
//! A [`TableSchema`] names every column and fixes its type. Loading checks the
//! column count against the schema, parses numeric cells, and drops rows that
//! carry a missing value in a required column.

use std::path::Path;

use crate::error::{DataError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnKind {
    Categorical,
    Numeric,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: ColumnKind,
    /// Missing cells are kept (as `NaN` or `""`) instead of dropping the row.
    pub optional: bool,
}

/// What to do with a row whose fields do not parse or whose field count is
/// wrong.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MalformedPolicy {
    #[default]
    Error,
    Drop,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableSchema {
    pub columns: Vec<ColumnSpec>,
    pub delimiter: u8,
    /// First non-comment line holds column names, which must match.
    pub has_header: bool,
    /// Lines starting with this byte are skipped.
    pub comment: Option<u8>,
    /// Cell values (after trimming) that mean "missing".
    pub missing: Vec<String>,
    pub malformed: MalformedPolicy,
}

impl TableSchema {
    /// Comma-separated, headerless, `?` for missing, strict rows.
    pub fn new(columns: Vec<ColumnSpec>) -> Self {
        Self {
            columns,
            delimiter: b',',
            has_header: false,
            comment: None,
            missing: vec!["?".into(), String::new()],
            malformed: MalformedPolicy::Error,
        }
    }

    pub fn delimiter(mut self, d: u8) -> Self {
        self.delimiter = d;
        self
    }

    pub fn header(mut self, yes: bool) -> Self {
        self.has_header = yes;
        self
    }

    pub fn comment(mut self, c: u8) -> Self {
        self.comment = Some(c);
        self
    }

    pub fn malformed(mut self, policy: MalformedPolicy) -> Self {
        self.malformed = policy;
        self
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.columns.iter().map(|c| c.name.as_str())
    }
}

/// Column specs from `(name, kind)` pairs, all required.
pub fn columns(spec: &[(&str, ColumnKind)]) -> Vec<ColumnSpec> {
    spec.iter()
        .map(|&(name, kind)| ColumnSpec { name: name.to_string(), kind, optional: false })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum ColumnData {
    Categorical(Vec<String>),
    Numeric(Vec<f64>),
}

impl ColumnData {
    fn len(&self) -> usize {
        match self {
            Self::Categorical(v) => v.len(),
            Self::Numeric(v) => v.len(),
        }
    }

    fn select(&self, rows: &[usize]) -> Self {
        match self {
            Self::Categorical(v) => Self::Categorical(rows.iter().map(|&r| v[r].clone()).collect()),
            Self::Numeric(v) => Self::Numeric(rows.iter().map(|&r| v[r]).collect()),
        }
    }
}

/// Counts from one load.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LoadReport {
    /// Data rows in the file, excluding header, comments and blank lines.
    pub rows_read: usize,
    pub dropped_missing: usize,
    pub dropped_malformed: usize,
    /// 1-based line of the first dropped malformed row.
    pub first_malformed: Option<u64>,
}

impl LoadReport {
    pub fn kept(&self) -> usize {
        self.rows_read - self.dropped_missing - self.dropped_malformed
    }
}

/// Column-major table with one entry per schema column.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    names: Vec<String>,
    data: Vec<ColumnData>,
    rows: usize,
}

impl RawTable {
    pub fn len(&self) -> usize {
        self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn column(&self, name: &str) -> Result<&ColumnData> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| &self.data[i])
            .ok_or_else(|| DataError::Encoding { column: name.into(), message: "no such column".into() })
    }

    pub fn numeric(&self, name: &str) -> Result<&[f64]> {
        match self.column(name)? {
            ColumnData::Numeric(v) => Ok(v),
            ColumnData::Categorical(_) => {
                Err(DataError::Encoding { column: name.into(), message: "column is not numeric".into() })
            }
        }
    }

    pub fn categorical(&self, name: &str) -> Result<&[String]> {
        match self.column(name)? {
            ColumnData::Categorical(v) => Ok(v),
            ColumnData::Numeric(_) => {
                Err(DataError::Encoding { column: name.into(), message: "column is not categorical".into() })
            }
        }
    }

    /// Rows `rows`, in the given order.
    pub fn select(&self, rows: &[usize]) -> Self {
        Self {
            names: self.names.clone(),
            data: self.data.iter().map(|c| c.select(rows)).collect(),
            rows: rows.len(),
        }
    }

    /// Rows where `keep` is true.
    pub fn filter(&self, keep: &[bool]) -> Self {
        let rows: Vec<usize> = (0..self.rows).filter(|&r| keep[r]).collect();
        self.select(&rows)
    }

    /// Drops the named columns.
    pub fn without(&self, drop: &[String]) -> Self {
        let (names, data) = self
            .names
            .iter()
            .zip(&self.data)
            .filter(|(n, _)| !drop.contains(n))
            .map(|(n, c)| (n.clone(), c.clone()))
            .unzip();
        Self { names, data, rows: self.rows }
    }

    /// Numeric columns containing at least one `NaN`.
    pub fn columns_with_missing(&self) -> Vec<String> {
        self.names
            .iter()
            .zip(&self.data)
            .filter(|(_, c)| matches!(c, ColumnData::Numeric(v) if v.iter().any(|x| x.is_nan())))
            .map(|(n, _)| n.clone())
            .collect()
    }
}

/// Reads `path` according to `schema`.
pub fn load_csv(path: &Path, schema: &TableSchema) -> Result<(RawTable, LoadReport)> {
    if !path.exists() {
        return Err(DataError::MissingFile(path.to_path_buf()));
    }
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(schema.delimiter)
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(schema.comment)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;

    let width = schema.columns.len();
    let mut data: Vec<ColumnData> = schema
        .columns
        .iter()
        .map(|c| match c.kind {
            ColumnKind::Categorical => ColumnData::Categorical(Vec::new()),
            ColumnKind::Numeric => ColumnData::Numeric(Vec::new()),
        })
        .collect();
    let mut report = LoadReport::default();
    let mut first = true;
    let mut record = csv::StringRecord::new();
    let mut cells: Vec<Cell> = Vec::with_capacity(width);

    while reader.read_record(&mut record).map_err(|e| csv_error(path, e))? {
        let line = record.position().map_or(0, |p| p.line());
        if first {
            first = false;
            if record.len() != width {
                return Err(DataError::Schema { path: path.into(), expected: width, got: record.len() });
            }
            if schema.has_header {
                for (index, (got, expected)) in record.iter().zip(schema.names()).enumerate() {
                    if got != expected {
                        return Err(DataError::Header {
                            path: path.into(),
                            index,
                            expected: expected.into(),
                            got: got.into(),
                        });
                    }
                }
                continue;
            }
        }
        report.rows_read += 1;
        match parse_row(&record, schema, &mut cells) {
            Ok(true) => {
                for (col, cell) in data.iter_mut().zip(cells.drain(..)) {
                    match (col, cell) {
                        (ColumnData::Categorical(v), Cell::Text(s)) => v.push(s),
                        (ColumnData::Numeric(v), Cell::Number(x)) => v.push(x),
                        _ => unreachable!("cells follow the schema"),
                    }
                }
            }
            Ok(false) => report.dropped_missing += 1,
            Err(message) => match schema.malformed {
                MalformedPolicy::Error => {
                    return Err(DataError::Malformed { path: path.into(), row: line, message })
                }
                MalformedPolicy::Drop => {
                    report.dropped_malformed += 1;
                    report.first_malformed.get_or_insert(line);
                }
            },
        }
    }
    let rows = data.first().map_or(0, ColumnData::len);
    debug_assert_eq!(rows, report.kept());
    let table = RawTable { names: schema.names().map(String::from).collect(), data, rows };
    Ok((table, report))
}

enum Cell {
    Text(String),
    Number(f64),
}

/// `Ok(false)` when a required cell is missing.
fn parse_row(record: &csv::StringRecord, schema: &TableSchema, out: &mut Vec<Cell>) -> Result<bool, String> {
    out.clear();
    if record.len() != schema.columns.len() {
        return Err(format!("expected {} fields, found {}", schema.columns.len(), record.len()));
    }
    let mut complete = true;
    for (raw, col) in record.iter().zip(&schema.columns) {
        let missing = schema.missing.iter().any(|m| m == raw);
        if missing && !col.optional {
            complete = false;
        }
        out.push(match col.kind {
            ColumnKind::Categorical => Cell::Text(if missing { String::new() } else { raw.to_string() }),
            ColumnKind::Numeric if missing => Cell::Number(f64::NAN),
            ColumnKind::Numeric => match raw.parse::<f64>() {
                Ok(x) if x.is_finite() => Cell::Number(x),
                _ => return Err(format!("column {}: cannot parse {raw:?} as a number", col.name)),
            },
        });
    }
    Ok(complete)
}

fn csv_error(path: &Path, e: csv::Error) -> DataError {
    let row = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(source) => DataError::io(path, source),
        kind => DataError::Malformed { path: path.into(), row, message: format!("{kind:?}") },
    }
}
