//! SHA-256 digests and `SHA256SUMS` files in `sha256sum` format.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{DataError, Result};

/// Name of the checksum file expected next to the raw files.
pub const SUMS_FILE: &str = "SHA256SUMS";

pub fn sha256_bytes(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| DataError::io(path, e))?;
    Ok(sha256_bytes(&bytes))
}

/// Parses `<hex>  <name>` lines (a `*` before the name is accepted).
pub fn parse_sums(text: &str) -> BTreeMap<String, String> {
    text.lines()
        .filter_map(|line| {
            let (hash, name) = line.trim().split_once(char::is_whitespace)?;
            let name = name.trim_start().trim_start_matches('*');
            Some((name.to_string(), hash.to_ascii_lowercase()))
        })
        .collect()
}

/// Digests of `files` inside `dir`, checked against `dir/SHA256SUMS` for
/// every file it lists. Files it does not list are accepted with a warning.
pub fn verify(dir: &Path, files: &[&str]) -> Result<Vec<(String, String)>> {
    let sums_path = dir.join(SUMS_FILE);
    let sums = match fs::read_to_string(&sums_path) {
        Ok(text) => parse_sums(&text),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => BTreeMap::new(),
        Err(e) => return Err(DataError::io(sums_path, e)),
    };
    let mut out = Vec::with_capacity(files.len());
    for &name in files {
        let path = dir.join(name);
        if !path.exists() {
            return Err(DataError::MissingFile(path));
        }
        let actual = sha256_file(&path)?;
        match sums.get(name) {
            Some(expected) if *expected != actual => {
                return Err(DataError::Checksum { file: name.into(), expected: expected.clone(), actual })
            }
            Some(_) => {}
            None => log::warn!("{name}: no recorded checksum in {}", sums_path.display()),
        }
        out.push((name.to_string(), actual));
    }
    Ok(out)
}
