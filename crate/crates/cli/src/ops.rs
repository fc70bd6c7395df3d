//! The work behind each subcommand, as library calls over a [`Layout`].

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use wfair_core::logistic::{self, fit_baseline};
use wfair_core::{
    trainer, Dataset, FeatureMode, GroupedBeliefs, LabeledBeliefs, MetricSet, ModelParams, QuantileBins,
    QuantileMatcher, Target, ThresholdGrid,
};
use wfair_data::Benchmark;

use crate::config::{short_hash, Init, RunConfig};
use crate::files::{beliefs_text, parse_beliefs, trajectory_text, BeliefRow, ModelFile};
use crate::layout::{Layout, BASELINE_RUN};
use crate::results::{MetricsRow, Tag};

pub const CONFIG_FILE: &str = "config.txt";
pub const MODEL_FILE: &str = "model.txt";
pub const TRAJECTORY_FILE: &str = "trajectory.tsv";
/// Sidecar next to post-processed beliefs holding their parameters.
pub const PARAMS_FILE: &str = "params.txt";

/// Resolution of the barycenter behind pseudo-SPDD in evaluations.
pub const EVAL_RESOLUTION: usize = 100;

pub const METHOD_UNCONSTRAINED: &str = "unconstrained";
pub const METHOD_PENALTY: &str = "penalty";

pub fn postprocess_method(target: Target) -> String {
    format!("postprocess-{target}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Split {
    Train,
    #[default]
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Test => "test",
        })
    }
}

impl FromStr for Split {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            _ => bail!("unknown split {s:?} (expected train or test)"),
        }
    }
}

/// Output root plus the raw-data directory used for on-demand preparation.
#[derive(Debug, Clone)]
pub struct Env {
    pub layout: Layout,
    pub data_dir: PathBuf,
}

/// Both splits of one prepared dataset.
#[derive(Debug, Clone)]
pub struct Splits {
    pub bench: Benchmark,
    pub seed: u64,
    pub train: Dataset,
    pub test: Dataset,
}

impl Splits {
    pub fn load(env: &Env, bench: Benchmark, seed: u64) -> Result<Self> {
        let (train, test) = env.layout.splits(bench, seed, &env.data_dir)?;
        Ok(Self { bench, seed, train, test })
    }

    pub fn get(&self, split: Split) -> &Dataset {
        match split {
            Split::Train => &self.train,
            Split::Test => &self.test,
        }
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn baseline_run(mode: FeatureMode) -> String {
    match mode {
        FeatureMode::Full => BASELINE_RUN.to_string(),
        FeatureMode::Blind => format!("{BASELINE_RUN}-{mode}"),
    }
}

pub fn baseline_params(mode: FeatureMode) -> String {
    format!("fit=unpenalized;mode={mode}")
}

/// Unpenalized fit, written once per (seed, mode) and reused afterwards.
pub fn baseline(env: &Env, s: &Splits, mode: FeatureMode) -> Result<(PathBuf, ModelParams)> {
    let path = env.layout.run(s.bench, s.seed, &baseline_run(mode)).join(MODEL_FILE);
    if path.exists() {
        let m = ModelFile::read(&path)?;
        if m.params.schema() == s.train.schema() && m.params.mode() == mode {
            return Ok((path, m.params));
        }
        log::warn!("{} does not match the prepared data; refitting", path.display());
    }
    let params = fit_baseline(&s.train, mode)?;
    let file = ModelFile { dataset: s.bench.name().to_string(), params };
    write(&path, &file.to_text())?;
    Ok((path, file.params))
}

/// Penalized training; writes config, model and trajectory into the run
/// directory and returns the model path.
pub fn train(env: &Env, s: &Splits, cfg: &RunConfig) -> Result<PathBuf> {
    let t = &cfg.train;
    let init = match cfg.init {
        Init::Baseline => baseline(env, s, t.mode)?.1,
        Init::Zeros => ModelParams::new(vec![0.0; s.train.schema().width(t.mode)], t.mode, s.train.schema())?,
    };
    let out = trainer::train_with_holdout(&s.train, &s.test, t, &init)
        .with_context(|| format!("training {} with {}", s.bench, cfg.compact()))?;
    let dir = env.layout.run(s.bench, s.seed, &cfg.hash());
    write(&dir.join(CONFIG_FILE), &cfg.to_text())?;
    write(&dir.join(TRAJECTORY_FILE), &trajectory_text(&out.trajectory))?;
    let model = dir.join(MODEL_FILE);
    write(&model, &ModelFile { dataset: s.bench.name().to_string(), params: out.params }.to_text())?;
    Ok(model)
}

fn load_model(s: &Splits, path: &Path) -> Result<ModelParams> {
    let m = ModelFile::read(path)?;
    if m.dataset != s.bench.name() {
        log::warn!("{} was trained on {}, evaluating on {}", path.display(), m.dataset, s.bench);
    }
    Ok(m.params)
}

fn belief_rows(ds: &Dataset, beliefs: &[f64], adjusted: &[f64]) -> Vec<BeliefRow> {
    (0..ds.len())
        .map(|n| BeliefRow { group: ds.group_of()[n], label: ds.labels()[n], belief: beliefs[n], adjusted: adjusted[n] })
        .collect()
}

/// Settings for quantile matching.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PostConfig {
    pub target: Target,
    pub bins: QuantileBins,
    pub resolution: usize,
}

impl Default for PostConfig {
    fn default() -> Self {
        Self { target: Target::Barycenter, bins: QuantileBins::default(), resolution: EVAL_RESOLUTION }
    }
}

impl PostConfig {
    pub fn params(&self, model: &str) -> String {
        format!("target={};bins={};resolution={};fit=train;model={model}", self.target, self.bins.get(), self.resolution)
    }
}

/// Fits group quantile maps on the model's training-split beliefs and
/// applies them to `split`; returns the beliefs file.
pub fn postprocess(s: &Splits, model: &Path, pc: &PostConfig, split: Split) -> Result<PathBuf> {
    let params = load_model(s, model)?;
    let fit_beliefs = logistic::predict(&params, &s.train)?;
    let fit = GroupedBeliefs::from_assignments(&fit_beliefs, s.train.group_of())?;
    let matcher = QuantileMatcher::fit(&fit, pc.target, pc.bins, pc.resolution)?;
    let ds = s.get(split);
    let beliefs = logistic::predict(&params, ds)?;
    let adjusted = beliefs
        .iter()
        .zip(ds.group_of())
        .map(|(&b, &g)| matcher.map(g, b))
        .collect::<wfair_core::Result<Vec<_>>>()?;
    let run = model.parent().and_then(Path::file_name).map_or("model".into(), |n| n.to_string_lossy().into_owned());
    let dir = model
        .parent()
        .unwrap_or(Path::new("."))
        .join(format!("post-{}-b{}", pc.target, pc.bins.get()));
    write(&dir.join(PARAMS_FILE), &format!("{}\n", pc.params(&run)))?;
    let path = dir.join(format!("beliefs-{split}.tsv"));
    write(&path, &beliefs_text(&belief_rows(ds, &beliefs, &adjusted)))?;
    Ok(path)
}

/// What to evaluate.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Model(PathBuf),
    /// A beliefs file; the `adjusted` column is scored.
    Beliefs(PathBuf),
}

/// Metrics of `beliefs` grouped and labelled by `rows`.
pub fn metrics_of(rows: &[BeliefRow]) -> Result<MetricSet> {
    let s: Vec<f64> = rows.iter().map(|r| r.adjusted).collect();
    let groups: Vec<_> = rows.iter().map(|r| r.group).collect();
    let g = GroupedBeliefs::from_assignments(&s, &groups)?;
    let lb = LabeledBeliefs::new(s, rows.iter().map(|r| r.label).collect())?;
    Ok(MetricSet::compute(&lb, &g, &ThresholdGrid::default(), EVAL_RESOLUTION)?)
}

fn display_path(layout: &Layout, p: &Path) -> String {
    p.strip_prefix(layout.root()).unwrap_or(p).display().to_string()
}

/// Scores `source` on `split`, persisting model beliefs next to the model.
/// The row is returned, not stored.
pub fn evaluate(env: &Env, s: &Splits, source: &Source, split: Split, tag: Tag) -> Result<MetricsRow> {
    let ds = s.get(split);
    let (rows, beliefs_path, method, params, trajectory) = match source {
        Source::Model(path) => {
            let p = load_model(s, path)?;
            let beliefs = logistic::predict(&p, ds)?;
            let rows = belief_rows(ds, &beliefs, &beliefs);
            let dir = path.parent().unwrap_or(Path::new("."));
            let out = dir.join(format!("beliefs-{split}.tsv"));
            write(&out, &beliefs_text(&rows))?;
            let cfg_path = dir.join(CONFIG_FILE);
            let (method, params, trajectory) = if cfg_path.exists() {
                let text = fs::read_to_string(&cfg_path)?;
                let cfg = RunConfig::parse(&text).with_context(|| format!("parsing {}", cfg_path.display()))?;
                let traj = dir.join(TRAJECTORY_FILE);
                let traj = if traj.exists() { display_path(&env.layout, &traj) } else { "-".into() };
                (METHOD_PENALTY.to_string(), cfg.compact(), traj)
            } else {
                (METHOD_UNCONSTRAINED.to_string(), baseline_params(p.mode()), "-".into())
            };
            (rows, out, method, params, trajectory)
        }
        Source::Beliefs(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let rows = parse_beliefs(&text).with_context(|| format!("parsing {}", path.display()))?;
            if rows.len() != ds.len() {
                log::warn!("{} holds {} rows, the {split} split of {} has {}", path.display(), rows.len(), s.bench, ds.len());
            }
            let sidecar = path.parent().unwrap_or(Path::new(".")).join(PARAMS_FILE);
            let params = fs::read_to_string(&sidecar).map(|t| t.trim().to_string()).unwrap_or_else(|_| "-".into());
            let method = params
                .split(';')
                .find_map(|kv| kv.strip_prefix("target="))
                .and_then(|t| t.parse::<Target>().ok())
                .map_or_else(|| "beliefs".to_string(), postprocess_method);
            (rows, path.clone(), method, params, "-".into())
        }
    };
    let metrics = metrics_of(&rows)?;
    let row = MetricsRow {
        method,
        dataset: s.bench.name().to_string(),
        split: split.to_string(),
        seed: s.seed,
        config: short_hash(&params),
        params,
        tag,
        metrics,
        beliefs: display_path(&env.layout, &beliefs_path),
        trajectory,
    };
    row.check()?;
    Ok(row)
}
