//! Plain-text record of one preparation run.
//!
//! ```text
//! wfair-manifest v1
//! dataset = german
//! split = random 670/330 seed 0
//! source.german.data.sha256 = b21f3d81...
//! source.german.data.rows = 1000
//! ...
//! ```
//!
//! Keys appear in a fixed order and carry no timestamps, so unchanged inputs
//! give a byte-identical manifest.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use wfair_core::GroupId;

pub const MAGIC: &str = "wfair-manifest v1";

/// Counts for one raw file.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SourceStats {
    pub file: String,
    pub sha256: String,
    /// Data rows in the file before any drop.
    pub rows: usize,
    pub dropped_missing: usize,
    pub dropped_malformed: usize,
    /// Rows removed by the recipe's population filter.
    pub dropped_filtered: usize,
}

/// Counts for one encoded split.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SplitStats {
    pub rows: usize,
    /// Rows whose group does not occur in the training split.
    pub dropped_unseen_group: usize,
    /// Categorical cells outside the training vocabulary.
    pub unseen_categories: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupInfo {
    pub id: GroupId,
    pub name: String,
    pub train: usize,
    pub test: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Manifest {
    pub dataset: String,
    pub split: String,
    pub sources: Vec<SourceStats>,
    pub train: SplitStats,
    pub test: SplitStats,
    pub d: usize,
    pub k: usize,
    /// Published feature count for the recipe, when one exists.
    pub reference_d: Option<usize>,
    pub groups: Vec<GroupInfo>,
    /// Raw columns removed before encoding, beyond the recipe's fixed drops.
    pub dropped_columns: Vec<String>,
    /// `(file name, sha256)` of written snapshots.
    pub snapshots: Vec<(String, String)>,
}

impl Manifest {
    /// Data rows across all raw files.
    pub fn total_rows(&self) -> usize {
        self.sources.iter().map(|s| s.rows).sum()
    }

    /// One-line summary of drops and feature count, for failure reports.
    pub fn diagnostics(&self) -> String {
        let mut s = String::new();
        for src in &self.sources {
            let _ = write!(
                s,
                "{}: {} rows, dropped {} missing, {} malformed, {} filtered; ",
                src.file, src.rows, src.dropped_missing, src.dropped_malformed, src.dropped_filtered
            );
        }
        let _ = write!(s, "train {} / test {} rows; d = {}", self.train.rows, self.test.rows, self.d);
        if let Some(r) = self.reference_d {
            let _ = write!(s, " (reference {r}, difference {:+})", self.d as i64 - r as i64);
        }
        let _ = write!(s, "; k = {}; |A| = {}", self.k, self.groups.len());
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: &dyn std::fmt::Display| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("dataset", &self.dataset);
        kv("split", &self.split);
        for src in &self.sources {
            let f = &src.file;
            kv(&format!("source.{f}.sha256"), &src.sha256);
            kv(&format!("source.{f}.rows"), &src.rows);
            kv(&format!("source.{f}.dropped_missing"), &src.dropped_missing);
            kv(&format!("source.{f}.dropped_malformed"), &src.dropped_malformed);
            kv(&format!("source.{f}.dropped_filtered"), &src.dropped_filtered);
        }
        kv("rows.total", &self.total_rows());
        for (name, st) in [("train", &self.train), ("test", &self.test)] {
            kv(&format!("{name}.rows"), &st.rows);
            kv(&format!("{name}.dropped_unseen_group"), &st.dropped_unseen_group);
            kv(&format!("{name}.unseen_categories"), &st.unseen_categories);
        }
        kv("d", &self.d);
        if let Some(r) = self.reference_d {
            kv("d.reference", &r);
        }
        kv("k", &self.k);
        kv("groups", &self.groups.len());
        for g in &self.groups {
            kv(&format!("group.{}", g.id.0), &format!("{} train {} test {}", g.name, g.train, g.test));
        }
        if !self.dropped_columns.is_empty() {
            kv("dropped_columns", &self.dropped_columns.join(","));
        }
        for (f, h) in &self.snapshots {
            kv(&format!("snapshot.{f}.sha256"), h);
        }
        format!("{MAGIC}\n{s}")
    }
}

/// `key = value` pairs of a manifest; `None` if the magic line is absent.
pub fn parse_fields(text: &str) -> Option<BTreeMap<String, String>> {
    let mut lines = text.lines();
    if lines.next()? != MAGIC {
        return None;
    }
    Some(
        lines
            .filter_map(|l| l.split_once(" = "))
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect(),
    )
}
