//! On-disk cache of least-prime-factor tables.
//!
//! Files are raw little-endian `u32` arrays named by the limit, the segment
//! size and a format version, so tables built with different parameters never
//! collide.

use std::fs;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use super::{FactorSieve, SEGMENT_LEN};
use crate::error::Result;

pub const CACHE_VERSION: u32 = 1;

/// Environment variable naming the cache directory.
pub const CACHE_ENV: &str = "KOHNEN_SIEVE_CACHE";

pub fn cache_file(dir: &Path, limit: usize) -> PathBuf {
    dir.join(format!("lpf-x{limit}-seg{SEGMENT_LEN}-v{CACHE_VERSION}.bin"))
}

fn read_table(path: &Path, limit: usize) -> Result<Option<Vec<u32>>> {
    let meta = match fs::metadata(path) {
        Ok(m) => m,
        Err(_) => return Ok(None),
    };
    if meta.len() != 4 * (limit as u64 + 1) {
        return Ok(None);
    }
    let mut reader = BufReader::new(fs::File::open(path)?);
    let mut bytes = Vec::with_capacity(meta.len() as usize);
    reader.read_to_end(&mut bytes)?;
    Ok(Some(
        bytes
            .chunks_exact(4)
            .map(|b| u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
            .collect(),
    ))
}

fn write_table(path: &Path, table: &[u32]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut w = BufWriter::new(fs::File::create(&tmp)?);
        for v in table {
            w.write_all(&v.to_le_bytes())?;
        }
        w.flush()?;
    }
    fs::rename(tmp, path)?;
    Ok(())
}

/// Loads the table for `limit` from `dir` when present and well formed,
/// otherwise builds it and stores it there.
pub fn load_or_build(dir: Option<&Path>, limit: usize) -> Result<FactorSieve> {
    let Some(dir) = dir else {
        return FactorSieve::new(limit);
    };
    let path = cache_file(dir, limit);
    if let Some(table) = read_table(&path, limit)? {
        if let Ok(sieve) = FactorSieve::from_raw(table) {
            return Ok(sieve);
        }
    }
    let sieve = FactorSieve::new(limit)?;
    fs::create_dir_all(dir)?;
    write_table(&path, sieve.raw())?;
    Ok(sieve)
}

/// Directory from [`CACHE_ENV`], if set and non-empty.
pub fn dir_from_env() -> Option<PathBuf> {
    std::env::var_os(CACHE_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
}
