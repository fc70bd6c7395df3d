//! Grid sweeps and per-method selection.
//!
//! For every seed in the grid the sweep scores the unpenalized fit, its
//! quantile-matched variants (one per bin count and target) and each
//! penalized configuration, all on the test split. Penalized runs fan out
//! over a thread pool; rows are collected in grid order, so the store is the
//! same whatever the scheduling.

use std::collections::{BTreeMap, BTreeSet};

use anyhow::Result;
use rayon::prelude::*;
use wfair_core::{FeatureMode, QuantileBins, Target};
use wfair_data::Benchmark;

use crate::config::{Grid, RunConfig};
use crate::ops::{self, Env, PostConfig, Source, Split, Splits};
use crate::results::{MetricsRow, Store, Tag};

/// A configuration that errored, with the reason.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub seed: u64,
    pub params: String,
    pub error: String,
}

#[derive(Debug, Clone, Default)]
pub struct SweepOutcome {
    /// Every scored point, tagged [`Tag::Grid`], in grid order.
    pub grid: Vec<MetricsRow>,
    /// Copies of the chosen configuration's rows, tagged [`Tag::Selected`].
    pub selected: Vec<MetricsRow>,
    pub failures: Vec<Failure>,
}

fn seeds(grid: &Grid) -> Vec<u64> {
    let mut seen = BTreeSet::new();
    grid.runs.iter().map(|r| r.train.seed).filter(|s| seen.insert(*s)).collect()
}

fn modes(grid: &Grid, seed: u64) -> Vec<FeatureMode> {
    let mut out = Vec::new();
    for r in grid.runs.iter().filter(|r| r.train.seed == seed) {
        if !out.contains(&r.train.mode) {
            out.push(r.train.mode);
        }
    }
    out
}

/// Rows for the unpenalized fit and its post-processed variants.
fn reference_rows(env: &Env, s: &Splits, mode: FeatureMode, bins: &[usize]) -> Result<Vec<MetricsRow>> {
    let (model, _) = ops::baseline(env, s, mode)?;
    let mut rows = vec![ops::evaluate(env, s, &Source::Model(model.clone()), Split::Test, Tag::Grid)?];
    for &b in bins {
        for target in [Target::Barycenter, Target::Pooled] {
            let pc = PostConfig { target, bins: QuantileBins::new(b)?, ..PostConfig::default() };
            let beliefs = ops::postprocess(s, &model, &pc, Split::Test)?;
            rows.push(ops::evaluate(env, s, &Source::Beliefs(beliefs), Split::Test, Tag::Grid)?);
        }
    }
    Ok(rows)
}

fn penalized_row(env: &Env, s: &Splits, cfg: &RunConfig) -> Result<MetricsRow> {
    let model = ops::train(env, s, cfg)?;
    ops::evaluate(env, s, &Source::Model(model), Split::Test, Tag::Grid)
}

/// For each method, the configuration with the lowest mean SPDD over seeds
/// among those whose mean Err-.5 is within `err_budget`; ties keep the
/// earlier configuration.
pub fn select(rows: &[MetricsRow], err_budget: Option<f64>) -> Vec<MetricsRow> {
    // method -> config -> (first index, rows)
    let mut by_method: BTreeMap<&str, Vec<(&str, Vec<&MetricsRow>)>> = BTreeMap::new();
    for r in rows {
        let configs = by_method.entry(&r.method).or_default();
        match configs.iter_mut().find(|(c, _)| *c == r.config) {
            Some((_, v)) => v.push(r),
            None => configs.push((&r.config, vec![r])),
        }
    }
    let mut method_order: Vec<&str> = Vec::new();
    for r in rows {
        if !method_order.contains(&r.method.as_str()) {
            method_order.push(&r.method);
        }
    }
    let mut out = Vec::new();
    for method in method_order {
        let mean = |v: &[&MetricsRow], f: fn(&MetricsRow) -> f64| v.iter().map(|r| f(r)).sum::<f64>() / v.len() as f64;
        let mut best: Option<(f64, &Vec<&MetricsRow>)> = None;
        for (_, v) in &by_method[method] {
            if err_budget.is_some_and(|b| mean(v, |r| r.metrics.err_05) > b) {
                continue;
            }
            let spdd = mean(v, |r| r.metrics.spdd);
            if best.is_none_or(|(s, _)| spdd < s) {
                best = Some((spdd, v));
            }
        }
        match best {
            Some((_, v)) => out.extend(v.iter().map(|r| MetricsRow { tag: Tag::Selected, ..(*r).clone() })),
            None => log::warn!("{method}: no configuration meets the Err-.5 budget {err_budget:?}"),
        }
    }
    out
}

/// Runs `grid` on `bench`, appends grid and selection rows to `store`, and
/// records failures there.
pub fn sweep(env: &Env, bench: Benchmark, grid: &Grid, store: &Store) -> Result<SweepOutcome> {
    let mut out = SweepOutcome::default();
    for seed in seeds(grid) {
        let s = match Splits::load(env, bench, seed) {
            Ok(s) => s,
            Err(e) => {
                let f = Failure { seed, params: "prepare".into(), error: format!("{e:#}") };
                log::error!("{bench} seed {seed}: {}", f.error);
                store.record_failure(bench.name(), seed, &f.params, &f.error)?;
                out.failures.push(f);
                continue;
            }
        };
        for mode in modes(grid, seed) {
            match reference_rows(env, &s, mode, &grid.bins) {
                Ok(rows) => out.grid.extend(rows),
                Err(e) => {
                    let f = Failure { seed, params: ops::baseline_params(mode), error: format!("{e:#}") };
                    log::error!("{bench} seed {seed} baseline: {}", f.error);
                    store.record_failure(bench.name(), seed, &f.params, &f.error)?;
                    out.failures.push(f);
                }
            }
        }
        let runs: Vec<&RunConfig> = grid.runs.iter().filter(|r| r.train.seed == seed).collect();
        let results: Vec<Result<MetricsRow>> = runs.par_iter().map(|cfg| penalized_row(env, &s, cfg)).collect();
        for (cfg, r) in runs.iter().zip(results) {
            match r {
                Ok(row) => {
                    log::info!("{bench} seed {seed} {}: SPDD {:.4} Err-.5 {:.4}", cfg.compact(), row.metrics.spdd, row.metrics.err_05);
                    out.grid.push(row);
                }
                Err(e) => {
                    let f = Failure { seed, params: cfg.compact(), error: format!("{e:#}") };
                    log::error!("{bench} {}: {}", f.params, f.error);
                    store.record_failure(bench.name(), seed, &f.params, &f.error)?;
                    out.failures.push(f);
                }
            }
        }
    }
    store.append(&out.grid)?;
    out.selected = select(&out.grid, grid.err_budget);
    store.append(&out.selected)?;
    Ok(out)
}
