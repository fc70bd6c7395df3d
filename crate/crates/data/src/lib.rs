//! Ingestion, encoding, grouping and splitting for the tabular fairness
//! benchmarks.
//!
//! [`prepare`] turns raw UCI files into encoded train/test [`Dataset`]s plus a
//! [`Manifest`]; [`write_prepared`] persists them as CSV snapshots that
//! [`read_prepared`] loads back bit for bit.

pub mod checksum;
pub mod encode;
pub mod error;
pub mod manifest;
pub mod recipes;
pub mod snapshot;
pub mod split;
pub mod table;

use std::fs;
use std::path::{Path, PathBuf};

pub use encode::{Directive, Encoder, EncodingSpec};
pub use error::{DataError, Result};
pub use manifest::Manifest;
pub use recipes::{prepare, Benchmark, Prepared};
pub use table::{load_csv, LoadReport, RawTable, TableSchema};
use wfair_core::Dataset;

/// Environment variable naming the raw-data directory.
pub const DATA_DIR_ENV: &str = "WFAIR_DATA_DIR";
/// Raw-data directory used when neither a flag nor the variable is set.
pub const DEFAULT_DATA_DIR: &str = "data/uci";

pub const TRAIN_FILE: &str = "train.csv";
pub const TEST_FILE: &str = "test.csv";
pub const MANIFEST_FILE: &str = "manifest.txt";

/// `explicit`, else `$WFAIR_DATA_DIR`, else [`DEFAULT_DATA_DIR`].
pub fn data_dir(explicit: Option<&Path>) -> PathBuf {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(DATA_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_DATA_DIR))
}

/// Writes `train.csv`, `test.csv` and `manifest.txt` into `dir` (created if
/// needed) and returns the manifest with snapshot digests filled in.
pub fn write_prepared(p: &Prepared, dir: &Path) -> Result<Manifest> {
    fs::create_dir_all(dir).map_err(|e| DataError::io(dir, e))?;
    let mut manifest = p.manifest.clone();
    manifest.snapshots.clear();
    for (name, ds) in [(TRAIN_FILE, &p.train), (TEST_FILE, &p.test)] {
        let bytes = snapshot::to_bytes(ds)?;
        let path = dir.join(name);
        fs::write(&path, &bytes).map_err(|e| DataError::io(&path, e))?;
        manifest.snapshots.push((name.to_string(), checksum::sha256_bytes(&bytes)));
    }
    let path = dir.join(MANIFEST_FILE);
    fs::write(&path, manifest.to_text()).map_err(|e| DataError::io(&path, e))?;
    Ok(manifest)
}

/// Train and test snapshots from a directory written by [`write_prepared`].
pub fn read_prepared(dir: &Path) -> Result<(Dataset, Dataset)> {
    Ok((snapshot::read(&dir.join(TRAIN_FILE))?, snapshot::read(&dir.join(TEST_FILE))?))
}
