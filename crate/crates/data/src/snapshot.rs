//! Encoded datasets as column-ordered CSV.
//!
//! ```text
//! group,label,a:<attribute>...,x:<feature>...
//! 3,1,1,1,0,1,0,...
//! ```
//!
//! Reals are written in shortest round-trip form, so reading a snapshot
//! reproduces the dataset bit for bit.

use std::fs;
use std::path::Path;

use wfair_core::{Dataset, FeatureSchema, GroupId};

use crate::error::{DataError, Result};

pub fn to_bytes(data: &Dataset) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let mut header = vec!["group".to_string(), "label".to_string()];
    header.extend(data.attribute_names().iter().map(|n| format!("a:{n}")));
    header.extend(data.feature_names().iter().map(|n| format!("x:{n}")));
    w.write_record(&header).map_err(csv_io)?;
    let mut row: Vec<String> = Vec::with_capacity(header.len());
    for n in 0..data.len() {
        row.clear();
        row.push(data.group_of()[n].0.to_string());
        row.push(data.labels()[n].to_string());
        row.extend(data.a_row(n).iter().map(u32::to_string));
        row.extend(data.x_row(n).iter().map(f64::to_string));
        w.write_record(&row).map_err(csv_io)?;
    }
    w.into_inner().map_err(|e| csv_io(e.into_error().into()))
}

pub fn write(data: &Dataset, path: &Path) -> Result<()> {
    fs::write(path, to_bytes(data)?).map_err(|e| DataError::io(path, e))
}

pub fn read(path: &Path) -> Result<Dataset> {
    let bad = |message: String| DataError::Snapshot { path: path.into(), message };
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| bad(e.to_string()))?;
    let header = r.headers().map_err(|e| bad(e.to_string()))?.clone();
    if header.len() < 2 || &header[0] != "group" || &header[1] != "label" {
        return Err(bad("header must start with group,label".into()));
    }
    let mut attrs = Vec::new();
    let mut feats = Vec::new();
    for name in header.iter().skip(2) {
        if let Some(a) = name.strip_prefix("a:") {
            if !feats.is_empty() {
                return Err(bad("attribute column after feature columns".into()));
            }
            attrs.push(a.to_string());
        } else if let Some(x) = name.strip_prefix("x:") {
            feats.push(x.to_string());
        } else {
            return Err(bad(format!("unexpected column {name:?}")));
        }
    }
    let (k, d) = (attrs.len(), feats.len());
    let (mut x, mut a, mut y, mut g) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let row = i + 2;
        let field = |j: usize| -> Result<&str> {
            rec.get(j).ok_or_else(|| bad(format!("line {row}: missing field {}", j + 1)))
        };
        g.push(GroupId(field(0)?.parse().map_err(|e| bad(format!("line {row}: group: {e}")))?));
        y.push(field(1)?.parse().map_err(|e| bad(format!("line {row}: label: {e}")))?);
        for j in 0..k {
            a.push(field(2 + j)?.parse().map_err(|e| bad(format!("line {row}: attribute: {e}")))?);
        }
        for j in 0..d {
            x.push(field(2 + k + j)?.parse().map_err(|e| bad(format!("line {row}: feature: {e}")))?);
        }
    }
    Ok(Dataset::new(FeatureSchema::new(d, k), x, a, y, g)?.with_names(feats, attrs)?)
}

fn csv_io(e: csv::Error) -> DataError {
    DataError::Snapshot { path: "<memory>".into(), message: e.to_string() }
}
