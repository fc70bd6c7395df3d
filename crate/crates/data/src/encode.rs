//! Column encodings fitted on a training table and applied unchanged to
//! any other table with the same columns.
//!
//! Output columns follow the order of the `EncodingSpec` entries. Within a
//! column, one-hot blocks follow the sorted training vocabulary and bin
//! blocks follow the bin index.

use crate::error::{DataError, Result};
use crate::table::RawTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Directive {
    /// One binary column per training category.
    OneHot,
    /// Indicator of the interval between training quantile edges at
    /// `j/q`, `j = 1..q`; duplicate edges are merged.
    QuantileBin(usize),
    /// `x − mean_train(x)`.
    Center,
    Passthrough,
    /// Not a feature: identifiers, labels and sensitive attributes.
    Drop,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncodingSpec {
    entries: Vec<(String, Directive)>,
}

impl EncodingSpec {
    pub fn new<S: Into<String>>(entries: impl IntoIterator<Item = (S, Directive)>) -> Self {
        Self { entries: entries.into_iter().map(|(s, d)| (s.into(), d)).collect() }
    }

    pub fn entries(&self) -> &[(String, Directive)] {
        &self.entries
    }

    /// Every column of `table` has exactly one directive and every directive
    /// names a column.
    pub fn validate(&self, table: &RawTable) -> Result<()> {
        for name in table.names() {
            let n = self.entries.iter().filter(|(c, _)| c == name).count();
            if n != 1 {
                return Err(DataError::Encoding {
                    column: name.clone(),
                    message: format!("{n} directives, expected exactly one"),
                });
            }
        }
        if let Some((c, _)) = self.entries.iter().find(|(c, _)| !table.names().contains(c)) {
            return Err(DataError::Encoding { column: c.clone(), message: "directive for absent column".into() });
        }
        Ok(())
    }
}

/// Sample quantile with linear interpolation between order statistics:
/// `h = (n − 1)p`, `x[⌊h⌋] + (h − ⌊h⌋)(x[⌊h⌋+1] − x[⌊h⌋])`. `sorted` must be
/// nonempty and ascending.
pub fn quantile_linear(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Distinct quantile edges at levels `j/q`, `j = 1..q`.
pub fn quantile_edges(values: &[f64], q: usize) -> Vec<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut edges: Vec<f64> = (1..q).map(|j| quantile_linear(&sorted, j as f64 / q as f64)).collect();
    edges.dedup();
    edges
}

/// Number of edges strictly below `x`; a value equal to an edge falls in the
/// lower bin.
pub fn bin_index(edges: &[f64], x: f64) -> usize {
    edges.partition_point(|&e| e < x)
}

#[derive(Debug, Clone, PartialEq)]
enum Block {
    OneHot { column: String, vocab: Vec<String> },
    Bins { column: String, edges: Vec<f64> },
    Center { column: String, mean: f64 },
    Pass { column: String },
}

impl Block {
    fn width(&self) -> usize {
        match self {
            Block::OneHot { vocab, .. } => vocab.len(),
            Block::Bins { edges, .. } => edges.len() + 1,
            Block::Center { .. } | Block::Pass { .. } => 1,
        }
    }
}

/// Encoded feature matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Encoded {
    /// Row-major `rows × width`.
    pub x: Vec<f64>,
    pub rows: usize,
    pub width: usize,
    /// Cells whose category was absent from the training vocabulary.
    pub unseen: usize,
}

/// An [`EncodingSpec`] fitted on a training table.
#[derive(Debug, Clone, PartialEq)]
pub struct Encoder {
    blocks: Vec<Block>,
}

impl Encoder {
    pub fn fit(spec: &EncodingSpec, train: &RawTable) -> Result<Self> {
        spec.validate(train)?;
        if train.is_empty() {
            return Err(DataError::Encoding { column: "*".into(), message: "empty training table".into() });
        }
        let mut blocks = Vec::new();
        for (column, directive) in spec.entries() {
            let column = column.clone();
            let block = match *directive {
                Directive::Drop => continue,
                Directive::OneHot => {
                    let mut vocab = train.categorical(&column)?.to_vec();
                    vocab.sort();
                    vocab.dedup();
                    Block::OneHot { column, vocab }
                }
                Directive::QuantileBin(q) => {
                    if q == 0 {
                        return Err(DataError::Encoding { column, message: "zero quantile bins".into() });
                    }
                    let edges = quantile_edges(numeric_complete(train, &column)?, q);
                    Block::Bins { column, edges }
                }
                Directive::Center => {
                    let v = numeric_complete(train, &column)?;
                    let mean = v.iter().sum::<f64>() / v.len() as f64;
                    Block::Center { column, mean }
                }
                Directive::Passthrough => {
                    numeric_complete(train, &column)?;
                    Block::Pass { column }
                }
            };
            blocks.push(block);
        }
        Ok(Self { blocks })
    }

    pub fn width(&self) -> usize {
        self.blocks.iter().map(Block::width).sum()
    }

    /// Output column names: `col=value`, `col:bin<j>`, or `col`.
    pub fn feature_names(&self) -> Vec<String> {
        let mut out = Vec::with_capacity(self.width());
        for b in &self.blocks {
            match b {
                Block::OneHot { column, vocab } => out.extend(vocab.iter().map(|v| format!("{column}={v}"))),
                Block::Bins { column, edges } => out.extend((0..=edges.len()).map(|j| format!("{column}:bin{j}"))),
                Block::Center { column, .. } | Block::Pass { column } => out.push(column.clone()),
            }
        }
        out
    }

    /// Encodes `table`. Unseen categories give an all-zeros block and are
    /// counted and logged.
    pub fn apply(&self, table: &RawTable) -> Result<Encoded> {
        let rows = table.len();
        let width = self.width();
        let mut x = vec![0.0; rows * width];
        let mut offset = 0;
        let mut unseen = 0;
        for b in &self.blocks {
            match b {
                Block::OneHot { column, vocab } => {
                    let mut here = 0;
                    for (r, v) in table.categorical(column)?.iter().enumerate() {
                        match vocab.binary_search(v) {
                            Ok(j) => x[r * width + offset + j] = 1.0,
                            Err(_) => here += 1,
                        }
                    }
                    if here > 0 {
                        log::warn!("column {column}: {here} cells with categories unseen in training");
                    }
                    unseen += here;
                }
                Block::Bins { column, edges } => {
                    for (r, &v) in numeric_complete(table, column)?.iter().enumerate() {
                        x[r * width + offset + bin_index(edges, v)] = 1.0;
                    }
                }
                Block::Center { column, mean } => {
                    for (r, &v) in numeric_complete(table, column)?.iter().enumerate() {
                        x[r * width + offset] = v - mean;
                    }
                }
                Block::Pass { column } => {
                    for (r, &v) in numeric_complete(table, column)?.iter().enumerate() {
                        x[r * width + offset] = v;
                    }
                }
            }
            offset += b.width();
        }
        Ok(Encoded { x, rows, width, unseen })
    }
}

fn numeric_complete<'a>(table: &'a RawTable, column: &str) -> Result<&'a [f64]> {
    let v = table.numeric(column)?;
    if v.iter().any(|x| x.is_nan()) {
        return Err(DataError::Encoding { column: column.into(), message: "missing values".into() });
    }
    Ok(v)
}
