//! Where every artifact lives under an output root.
//!
//! ```text
//! <out>/prepared/<dataset>/seed<s>/{train.csv,test.csv,manifest.txt}
//! <out>/runs/<dataset>/seed<s>/<run>/{config.txt,model.txt,trajectory.tsv,beliefs-<split>.tsv}
//! <out>/results/{results.tsv,configs.tsv,failures.tsv}
//! <out>/reports/<dataset>.{tsv,txt}, <out>/reports/curves/<dataset>-seed<s>-<run>.tsv
//! ```
//!
//! `<run>` is `baseline` for the unpenalized fit and the configuration hash
//! otherwise.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use wfair_core::Dataset;
use wfair_data::{prepare, read_prepared, write_prepared, Benchmark, MANIFEST_FILE};

pub const BASELINE_RUN: &str = "baseline";

#[derive(Debug, Clone)]
pub struct Layout {
    root: PathBuf,
}

impl Layout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn prepared(&self, bench: Benchmark, seed: u64) -> PathBuf {
        self.root.join("prepared").join(bench.name()).join(format!("seed{seed}"))
    }

    pub fn run(&self, bench: Benchmark, seed: u64, run: &str) -> PathBuf {
        self.root.join("runs").join(bench.name()).join(format!("seed{seed}")).join(run)
    }

    pub fn results(&self) -> PathBuf {
        self.root.join("results")
    }

    pub fn reports(&self) -> PathBuf {
        self.root.join("reports")
    }

    /// Train and test splits for `seed`, preparing them from `data_dir` when
    /// no snapshot exists yet.
    pub fn splits(&self, bench: Benchmark, seed: u64, data_dir: &Path) -> Result<(Dataset, Dataset)> {
        let dir = self.prepared(bench, seed);
        if !dir.join(MANIFEST_FILE).exists() {
            log::info!("preparing {bench} seed {seed} into {}", dir.display());
            self.prepare(bench, seed, data_dir)?;
        }
        read_prepared(&dir).with_context(|| format!("reading snapshots in {}", dir.display()))
    }

    /// Writes snapshots and manifest; returns the manifest text.
    pub fn prepare(&self, bench: Benchmark, seed: u64, data_dir: &Path) -> Result<String> {
        let p = prepare(bench, data_dir, seed)
            .with_context(|| format!("preparing {bench} from {}", data_dir.display()))?;
        log::info!("{bench}: {}", p.manifest.diagnostics());
        let dir = self.prepared(bench, seed);
        let m = write_prepared(&p, &dir)?;
        Ok(m.to_text())
    }
}
