use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use wfair_cli::config::{Grid, RunConfig};
use wfair_cli::ops::{self, Env, PostConfig, Source, Split, Splits};
use wfair_cli::report::report;
use wfair_cli::results::{Store, Tag, HEADER};
use wfair_cli::sweep::sweep;
use wfair_cli::Layout;
use wfair_core::{FeatureMode, QuantileBins, Target};
use wfair_data::{Benchmark, DATA_DIR_ENV};

#[derive(Parser)]
#[command(name = "wfair", version, about = "Wasserstein-fair logistic regression benchmarks")]
struct Cli {
    /// Output root for snapshots, runs, results and reports.
    #[arg(long, global = true, default_value = "wfair-out")]
    out: PathBuf,
    /// Directory holding the raw UCI files.
    #[arg(long, global = true, env = DATA_DIR_ENV)]
    data_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct DatasetArgs {
    /// adult, german, bank or crime.
    #[arg(value_name = "DATASET")]
    positional: Option<Benchmark>,
    #[arg(long, conflicts_with = "positional")]
    dataset: Option<Benchmark>,
    /// Split seed.
    #[arg(long)]
    seed: Option<u64>,
}

impl DatasetArgs {
    fn bench(&self) -> Result<Benchmark> {
        match self.dataset.or(self.positional) {
            Some(b) => Ok(b),
            None => bail!("a dataset is required (adult, german, bank or crime)"),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Encode raw files into train/test snapshots and a manifest.
    Prepare {
        #[command(flatten)]
        data: DatasetArgs,
    },
    /// Train a penalized model, or the unpenalized baseline.
    Train {
        #[command(flatten)]
        data: DatasetArgs,
        /// Run configuration file; defaults apply to absent keys.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Fit the unpenalized baseline instead.
        #[arg(long, conflicts_with = "config")]
        baseline: bool,
        #[arg(long, default_value = "full", requires = "baseline")]
        mode: FeatureMode,
    },
    /// Quantile-match a model's beliefs onto a common target.
    Postprocess {
        #[command(flatten)]
        data: DatasetArgs,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value = "barycenter")]
        target: Target,
        #[arg(long, default_value_t = 100)]
        bins: usize,
        /// Barycenter atoms.
        #[arg(long, default_value_t = ops::EVAL_RESOLUTION)]
        resolution: usize,
        #[arg(long, default_value = "test")]
        split: Split,
    },
    /// Score a model or a beliefs file and append the row to the results store.
    Evaluate {
        #[command(flatten)]
        data: DatasetArgs,
        #[arg(long, required_unless_present = "beliefs")]
        model: Option<PathBuf>,
        #[arg(long, conflicts_with = "model")]
        beliefs: Option<PathBuf>,
        #[arg(long, default_value = "test")]
        split: Split,
    },
    /// Run a hyperparameter grid and select the best configuration per method.
    Sweep {
        #[command(flatten)]
        data: DatasetArgs,
        /// Grid file; the default grid is used when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Write tables and curve files from the results store.
    Report,
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let env = Env { layout: Layout::new(&cli.out), data_dir: wfair_data::data_dir(cli.data_dir.as_deref()) };
    let store = Store::new(env.layout.results());
    match cli.command {
        Command::Prepare { data } => {
            let text = env.layout.prepare(data.bench()?, data.seed.unwrap_or(0), &env.data_dir)?;
            print!("{text}");
        }
        Command::Train { data, config, baseline, mode } => {
            let bench = data.bench()?;
            if baseline {
                let s = Splits::load(&env, bench, data.seed.unwrap_or(0))?;
                let (path, _) = ops::baseline(&env, &s, mode)?;
                println!("{}", path.display());
            } else {
                let mut cfg = match &config {
                    Some(p) => RunConfig::parse(&fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)
                        .with_context(|| format!("parsing {}", p.display()))?,
                    None => RunConfig::default(),
                };
                if let Some(seed) = data.seed {
                    cfg.train.seed = seed;
                }
                let s = Splits::load(&env, bench, cfg.train.seed)?;
                println!("{}", ops::train(&env, &s, &cfg)?.display());
            }
        }
        Command::Postprocess { data, model, target, bins, resolution, split } => {
            let s = Splits::load(&env, data.bench()?, data.seed.unwrap_or(0))?;
            let pc = PostConfig { target, bins: QuantileBins::new(bins)?, resolution };
            println!("{}", ops::postprocess(&s, &model, &pc, split)?.display());
        }
        Command::Evaluate { data, model, beliefs, split } => {
            let s = Splits::load(&env, data.bench()?, data.seed.unwrap_or(0))?;
            let source = match (model, beliefs) {
                (Some(m), _) => Source::Model(m),
                (None, Some(b)) => Source::Beliefs(b),
                (None, None) => bail!("--model or --beliefs is required"),
            };
            let row = ops::evaluate(&env, &s, &source, split, Tag::Single)?;
            store.append(std::slice::from_ref(&row))?;
            println!("{}\n{}", HEADER.join("\t"), row.to_line());
        }
        Command::Sweep { data, config, jobs } => {
            let bench = data.bench()?;
            let text = match &config {
                Some(p) => fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
                None => Grid::default_text().to_string(),
            };
            let mut grid = Grid::parse(&text)?;
            if let Some(seed) = data.seed {
                for r in &mut grid.runs {
                    r.train.seed = seed;
                }
            }
            if let Some(n) = jobs {
                rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
            }
            let outcome = sweep(&env, bench, &grid, &store)?;
            println!("{}", HEADER.join("\t"));
            for r in &outcome.selected {
                println!("{}", r.to_line());
            }
            if !outcome.failures.is_empty() {
                log::warn!("{} runs failed; see {}", outcome.failures.len(), env.layout.results().display());
            }
        }
        Command::Report => {
            let files = report(&env.layout)?;
            for p in files.tables.iter().chain(&files.curves) {
                println!("{}", p.display());
            }
        }
    }
    Ok(())
}
