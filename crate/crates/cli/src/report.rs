//! Tables and trade-off curves from the results store.
//!
//! Per dataset, `<dataset>.tsv` and `<dataset>.txt` list each method's
//! stand-alone and selected rows aggregated over seeds as mean and sample
//! standard deviation; `<dataset>-grid.tsv` does the same for every sweep
//! point. Metric columns come in the order Err-.5, Err-Exp, DD-.5, SDD,
//! SPDD, followed by unordered SPDD and pseudo-SPDD.
//!
//! Each trajectory referenced by the store becomes
//! `curves/<dataset>-seed<s>-<config>.tsv` with columns
//! `step, err_exp, sdd, spdd`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};

use crate::files::parse_trajectory;
use crate::layout::Layout;
use crate::results::{MetricsRow, Store, Tag};

pub const METRIC_LABELS: [&str; 7] = ["Err-.5", "Err-Exp", "DD-.5", "SDD", "SPDD", "SPDD-unordered", "pseudo-SPDD"];
const METRIC_KEYS: [&str; 7] = ["err_05", "err_exp", "dd_05", "sdd", "spdd", "spdd_unordered", "pseudo_spdd"];

fn values(r: &MetricsRow) -> [f64; 7] {
    let m = &r.metrics;
    [m.err_05, m.err_exp, m.dd_05, m.sdd, m.spdd, m.spdd_unordered, m.pseudo_spdd]
}

/// Mean and sample standard deviation (zero for a single value).
pub fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Rows sharing a method and configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub method: String,
    pub config: String,
    pub params: String,
    pub seeds: usize,
    /// `(mean, sd)` per metric, in column order.
    pub stats: [(f64, f64); 7],
}

/// Groups `rows` by (method, config) in order of first appearance.
pub fn aggregate<'a>(rows: impl IntoIterator<Item = &'a MetricsRow>) -> Vec<Aggregate> {
    let mut groups: Vec<(&MetricsRow, Vec<[f64; 7]>)> = Vec::new();
    for r in rows {
        match groups.iter_mut().find(|(g, _)| g.method == r.method && g.config == r.config) {
            Some((_, v)) => v.push(values(r)),
            None => groups.push((r, vec![values(r)])),
        }
    }
    groups
        .into_iter()
        .map(|(first, v)| {
            let stats = std::array::from_fn(|j| mean_sd(&v.iter().map(|x| x[j]).collect::<Vec<_>>()));
            Aggregate {
                method: first.method.clone(),
                config: first.config.clone(),
                params: first.params.clone(),
                seeds: v.len(),
                stats,
            }
        })
        .collect()
}

pub fn table_tsv(aggs: &[Aggregate]) -> String {
    let mut out = String::from("method\tconfig\tseeds");
    for k in METRIC_KEYS {
        let _ = write!(out, "\t{k}\t{k}_sd");
    }
    out.push_str("\tparams\n");
    for a in aggs {
        let _ = write!(out, "{}\t{}\t{}", a.method, a.config, a.seeds);
        for (m, s) in a.stats {
            let _ = write!(out, "\t{m}\t{s}");
        }
        let _ = writeln!(out, "\t{}", a.params);
    }
    out
}

/// Fixed-width table, four decimals, `mean ± sd`.
pub fn table_text(dataset: &str, aggs: &[Aggregate]) -> String {
    let mut cells: Vec<Vec<String>> = vec![std::iter::once("method".to_string())
        .chain(METRIC_LABELS.iter().map(|s| s.to_string()))
        .chain(["seeds".to_string()])
        .collect()];
    for a in aggs {
        let mut row = vec![a.method.clone()];
        row.extend(a.stats.iter().map(|(m, s)| format!("{m:.4} ± {s:.4}")));
        row.push(a.seeds.to_string());
        cells.push(row);
    }
    let widths: Vec<usize> =
        (0..cells[0].len()).map(|j| cells.iter().map(|r| r[j].chars().count()).max().unwrap_or(0)).collect();
    let mut out = format!("{dataset}\n");
    for row in &cells {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(j, (c, &w))| {
                let pad = w - c.chars().count();
                if j == 0 {
                    format!("{c}{}", " ".repeat(pad))
                } else {
                    format!("{}{c}", " ".repeat(pad))
                }
            })
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

/// Files written by [`report`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReportFiles {
    pub tables: Vec<PathBuf>,
    pub curves: Vec<PathBuf>,
}

/// Writes tables and curves under `layout.reports()`.
pub fn report(layout: &Layout) -> Result<ReportFiles> {
    let rows = Store::new(layout.results()).read()?;
    if rows.is_empty() {
        bail!("the results store {} holds no rows", layout.results().display());
    }
    let dir = layout.reports();
    let curves_dir = dir.join("curves");
    fs::create_dir_all(&curves_dir).with_context(|| format!("creating {}", curves_dir.display()))?;
    let mut by_dataset: BTreeMap<&str, Vec<&MetricsRow>> = BTreeMap::new();
    for r in &rows {
        by_dataset.entry(&r.dataset).or_default().push(r);
    }
    let mut files = ReportFiles::default();
    for (dataset, rows) in &by_dataset {
        let main = aggregate(rows.iter().copied().filter(|r| r.tag != Tag::Grid));
        let grid = aggregate(rows.iter().copied().filter(|r| r.tag == Tag::Grid));
        let mut outputs = vec![];
        if !main.is_empty() {
            outputs.push((dir.join(format!("{dataset}.tsv")), table_tsv(&main)));
            outputs.push((dir.join(format!("{dataset}.txt")), table_text(dataset, &main)));
        }
        if !grid.is_empty() {
            outputs.push((dir.join(format!("{dataset}-grid.tsv")), table_tsv(&grid)));
        }
        for (path, text) in outputs {
            fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
            files.tables.push(path);
        }
    }
    for r in &rows {
        if r.trajectory == "-" {
            continue;
        }
        let path = curves_dir.join(format!("{}-seed{}-{}.tsv", r.dataset, r.seed, r.config));
        if files.curves.contains(&path) {
            continue;
        }
        let src = layout.root().join(&r.trajectory);
        let text = fs::read_to_string(&src).with_context(|| format!("reading {}", src.display()))?;
        let points = parse_trajectory(&text).with_context(|| format!("parsing {}", src.display()))?;
        let mut out = String::from("step\terr_exp\tsdd\tspdd\n");
        for p in points {
            let _ = writeln!(out, "{}\t{}\t{}\t{}", p.step, p.err_exp, p.sdd, p.spdd);
        }
        fs::write(&path, out).with_context(|| format!("writing {}", path.display()))?;
        files.curves.push(path);
    }
    Ok(files)
}
