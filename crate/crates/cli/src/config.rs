//! Key-value run configurations and sweep grids.
//!
//! ```text
//! # comment
//! alpha = 0
//! beta = 30
//! eta = 0.01
//! steps = 80000
//! refresh = none
//! resolution = 100
//! mode = full
//! seed = 0
//! log_every = 100
//! init = baseline
//! ```
//!
//! A grid file uses the same keys with comma-separated value lists and
//! expands to their cartesian product, plus the post-processing keys
//! `bins` and `err_budget`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use wfair_core::TrainConfig;
use wfair_data::checksum::sha256_bytes;

/// Starting parameters for penalized training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Init {
    /// The converged unpenalized fit.
    #[default]
    Baseline,
    Zeros,
}

impl fmt::Display for Init {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Init::Baseline => "baseline",
            Init::Zeros => "zeros",
        })
    }
}

impl FromStr for Init {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "baseline" => Ok(Init::Baseline),
            "zeros" => Ok(Init::Zeros),
            _ => bail!("init must be baseline or zeros, got {s:?}"),
        }
    }
}

/// Everything needed to reproduce one training run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub train: TrainConfig,
    pub init: Init,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self { train: TrainConfig::default(), init: Init::Baseline }
    }
}

const KEYS: [&str; 10] =
    ["alpha", "beta", "eta", "steps", "refresh", "resolution", "mode", "seed", "log_every", "init"];

fn parse<T: FromStr>(key: &str, v: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    v.parse().map_err(|e| anyhow!("{key}: cannot parse {v:?}: {e}"))
}

/// `key = value` lines, ignoring blanks and `#` comments. Later keys win.
fn pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| anyhow!("line {}: expected key = value", i + 1))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

impl RunConfig {
    fn set(&mut self, key: &str, v: &str) -> Result<()> {
        let t = &mut self.train;
        match key {
            "alpha" => t.alpha = parse(key, v)?,
            "beta" => t.beta = parse(key, v)?,
            "eta" => t.eta = parse(key, v)?,
            "steps" => t.steps = parse(key, v)?,
            "refresh" => t.refresh = if v == "none" { None } else { Some(parse(key, v)?) },
            "resolution" => t.resolution = parse(key, v)?,
            "mode" => t.mode = parse(key, v)?,
            "seed" => t.seed = parse(key, v)?,
            "log_every" => t.log_every = parse(key, v)?,
            "init" => self.init = parse(key, v)?,
            _ => bail!("unknown configuration key {key:?}"),
        }
        Ok(())
    }

    /// Defaults overridden by the keys present in `text`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (k, v) in pairs(text)? {
            cfg.set(&k, &v)?;
        }
        cfg.train.validate()?;
        Ok(cfg)
    }

    /// Every key, in a fixed order; parsing this text gives back `self`.
    pub fn to_text(&self) -> String {
        let t = &self.train;
        let refresh = t.refresh.map_or("none".to_string(), |k| k.to_string());
        format!(
            "alpha = {}\nbeta = {}\neta = {}\nsteps = {}\nrefresh = {refresh}\nresolution = {}\nmode = {}\nseed = {}\nlog_every = {}\ninit = {}\n",
            t.alpha, t.beta, t.eta, t.steps, t.resolution, t.mode, t.seed, t.log_every, self.init
        )
    }

    /// Single-line `key=value` form of [`Self::to_text`].
    pub fn compact(&self) -> String {
        self.to_text().lines().map(|l| l.replace(" = ", "=")).collect::<Vec<_>>().join(";")
    }

    pub fn hash(&self) -> String {
        short_hash(&self.compact())
    }
}

/// First 16 hex digits of the SHA-256 of `params`.
pub fn short_hash(params: &str) -> String {
    sha256_bytes(params.as_bytes())[..16].to_string()
}

/// Expanded sweep grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    /// Penalized runs in expansion order (the last key varies fastest).
    pub runs: Vec<RunConfig>,
    /// Bin counts for the post-processing rows.
    pub bins: Vec<usize>,
    /// Err-.5 ceiling for selection; `None` selects by SPDD alone.
    pub err_budget: Option<f64>,
}

impl Grid {
    pub fn parse(text: &str) -> Result<Self> {
        let mut lists: BTreeMap<String, Vec<String>> = BTreeMap::new();
        let mut bins = vec![100];
        let mut err_budget = None;
        for (k, v) in pairs(text)? {
            let values: Vec<String> = v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
            if values.is_empty() {
                bail!("{k}: empty value list");
            }
            match k.as_str() {
                "bins" => bins = values.iter().map(|s| parse("bins", s)).collect::<Result<_>>()?,
                "err_budget" => {
                    err_budget = match values.as_slice() {
                        [one] if one == "none" => None,
                        [one] => Some(parse("err_budget", one)?),
                        _ => bail!("err_budget takes a single value"),
                    }
                }
                key if KEYS.contains(&key) => {
                    lists.insert(k, values);
                }
                _ => bail!("unknown grid key {k:?}"),
            }
        }
        if bins.contains(&0) {
            bail!("bins must be positive");
        }
        let mut runs = vec![RunConfig::default()];
        for key in KEYS {
            let Some(values) = lists.get(key) else { continue };
            let mut next = Vec::with_capacity(runs.len() * values.len());
            for base in &runs {
                for v in values {
                    let mut cfg = base.clone();
                    cfg.set(key, v).with_context(|| format!("grid key {key}"))?;
                    next.push(cfg);
                }
            }
            runs = next;
        }
        for r in &runs {
            r.train.validate()?;
        }
        Ok(Self { runs, bins, err_budget })
    }

    /// The published search space: α ∈ {0, 0.5}, nine β values from 1e-2 to
    /// 100, η ∈ {1e-4, …, 1e-1}, 80000 steps.
    pub fn default_text() -> &'static str {
        "alpha = 0, 0.5\nbeta = 0.01, 0.03, 0.1, 0.3, 1, 3, 10, 30, 100\neta = 0.0001, 0.001, 0.01, 0.1\nsteps = 80000\n"
    }
}
