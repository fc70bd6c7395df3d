//! Append-only results store.
//!
//! `results.tsv` holds one [`MetricsRow`] per line under a fixed header;
//! `configs.tsv` maps each configuration hash to its parameters, once per
//! hash; `failures.tsv` lists runs that errored. Writers hold an exclusive
//! lock on the file they append to, so concurrent processes interleave
//! whole lines only.
//!
//! ```text
//! method	dataset	split	seed	config	params	tag	err_05	err_exp	dd_05	sdd	spdd	spdd_unordered	pseudo_spdd	beliefs	trajectory
//! unconstrained	german	test	0	4f0c...	fit=unpenalized;mode=full	single	0.2545	...	runs/german/seed0/baseline/beliefs-test.tsv	-
//! ```

use std::collections::BTreeSet;
use std::fmt;
use std::fs::{self, File, OpenOptions};
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use wfair_core::MetricSet;

pub const RESULTS_FILE: &str = "results.tsv";
pub const CONFIGS_FILE: &str = "configs.tsv";
pub const FAILURES_FILE: &str = "failures.tsv";

pub const HEADER: [&str; 16] = [
    "method",
    "dataset",
    "split",
    "seed",
    "config",
    "params",
    "tag",
    "err_05",
    "err_exp",
    "dd_05",
    "sdd",
    "spdd",
    "spdd_unordered",
    "pseudo_spdd",
    "beliefs",
    "trajectory",
];

/// How a row entered the store.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tag {
    /// A stand-alone evaluation.
    Single,
    /// One point of a sweep.
    Grid,
    /// The sweep point chosen for its method.
    Selected,
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tag::Single => "single",
            Tag::Grid => "grid",
            Tag::Selected => "selected",
        })
    }
}

impl FromStr for Tag {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" => Ok(Tag::Single),
            "grid" => Ok(Tag::Grid),
            "selected" => Ok(Tag::Selected),
            _ => bail!("unknown row tag {s:?}"),
        }
    }
}

/// Metrics of one method on one split, with enough context to find the
/// persisted beliefs they were computed from.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub method: String,
    pub dataset: String,
    pub split: String,
    pub seed: u64,
    pub config: String,
    pub params: String,
    pub tag: Tag,
    pub metrics: MetricSet,
    pub beliefs: String,
    /// `-` when the method has no trajectory.
    pub trajectory: String,
}

fn clean(s: &str) -> String {
    s.replace(['\t', '\n', '\r'], " ")
}

impl MetricsRow {
    /// Errors in `[0, 1]`, disparities nonnegative, everything finite.
    pub fn check(&self) -> Result<()> {
        let m = &self.metrics;
        for (name, v) in [("err_05", m.err_05), ("err_exp", m.err_exp)] {
            if !(0.0..=1.0).contains(&v) {
                bail!("{name} = {v} outside [0, 1]");
            }
        }
        for (name, v) in [
            ("dd_05", m.dd_05),
            ("sdd", m.sdd),
            ("spdd", m.spdd),
            ("spdd_unordered", m.spdd_unordered),
            ("pseudo_spdd", m.pseudo_spdd),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                bail!("{name} = {v} is not a finite nonnegative disparity");
            }
        }
        Ok(())
    }

    pub fn to_line(&self) -> String {
        let m = &self.metrics;
        format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            clean(&self.method),
            clean(&self.dataset),
            clean(&self.split),
            self.seed,
            self.config,
            clean(&self.params),
            self.tag,
            m.err_05,
            m.err_exp,
            m.dd_05,
            m.sdd,
            m.spdd,
            m.spdd_unordered,
            m.pseudo_spdd,
            clean(&self.beliefs),
            clean(&self.trajectory),
        )
    }

    pub fn parse_line(line: &str) -> Result<Self> {
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != HEADER.len() {
            bail!("{} fields, expected {}", f.len(), HEADER.len());
        }
        let x = |j: usize| -> Result<f64> { f[j].parse().with_context(|| format!("column {}", HEADER[j])) };
        Ok(Self {
            method: f[0].into(),
            dataset: f[1].into(),
            split: f[2].into(),
            seed: f[3].parse().context("column seed")?,
            config: f[4].into(),
            params: f[5].into(),
            tag: f[6].parse()?,
            metrics: MetricSet {
                err_05: x(7)?,
                err_exp: x(8)?,
                dd_05: x(9)?,
                sdd: x(10)?,
                spdd: x(11)?,
                spdd_unordered: x(12)?,
                pseudo_spdd: x(13)?,
            },
            beliefs: f[14].into(),
            trajectory: f[15].into(),
        })
    }
}

/// The three store files under one directory.
#[derive(Debug, Clone)]
pub struct Store {
    dir: PathBuf,
}

/// Opens `path` for appending under an exclusive lock, writing `header` if
/// the file is empty, and returns the existing contents.
fn locked_append(path: &Path, header: &str) -> Result<(File, String)> {
    let mut f = OpenOptions::new()
        .read(true)
        .append(true)
        .create(true)
        .open(path)
        .with_context(|| format!("opening {}", path.display()))?;
    f.lock().with_context(|| format!("locking {}", path.display()))?;
    let mut existing = String::new();
    f.seek(SeekFrom::Start(0))?;
    f.read_to_string(&mut existing)?;
    if existing.is_empty() {
        writeln!(f, "{header}")?;
    }
    Ok((f, existing))
}

impl Store {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn results_path(&self) -> PathBuf {
        self.dir.join(RESULTS_FILE)
    }

    /// Appends `rows` in order and registers their configurations.
    pub fn append(&self, rows: &[MetricsRow]) -> Result<()> {
        fs::create_dir_all(&self.dir).with_context(|| format!("creating {}", self.dir.display()))?;
        for r in rows {
            r.check().with_context(|| format!("{} on {}", r.method, r.dataset))?;
        }
        let (mut f, _) = locked_append(&self.results_path(), &HEADER.join("\t"))?;
        let mut text = String::new();
        for r in rows {
            text.push_str(&r.to_line());
            text.push('\n');
        }
        f.write_all(text.as_bytes())?;
        drop(f);

        let (mut f, existing) = locked_append(&self.dir.join(CONFIGS_FILE), "config\tparams")?;
        let mut known: BTreeSet<String> =
            existing.lines().skip(1).filter_map(|l| l.split('\t').next()).map(str::to_string).collect();
        let mut text = String::new();
        for r in rows {
            if known.insert(r.config.clone()) {
                text.push_str(&format!("{}\t{}\n", r.config, clean(&r.params)));
            }
        }
        f.write_all(text.as_bytes())?;
        Ok(())
    }

    pub fn record_failure(&self, dataset: &str, seed: u64, params: &str, error: &str) -> Result<()> {
        fs::create_dir_all(&self.dir)?;
        let (mut f, _) = locked_append(&self.dir.join(FAILURES_FILE), "dataset\tseed\tparams\terror")?;
        writeln!(f, "{}\t{seed}\t{}\t{}", clean(dataset), clean(params), clean(error))?;
        Ok(())
    }

    /// Every row in file order.
    pub fn read(&self) -> Result<Vec<MetricsRow>> {
        let path = self.results_path();
        let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h == HEADER.join("\t") => {}
            _ => bail!("{} does not start with the results header", path.display()),
        }
        lines
            .enumerate()
            .map(|(i, l)| MetricsRow::parse_line(l).map_err(|e| anyhow!("{} line {}: {e}", path.display(), i + 2)))
            .collect()
    }
}
