//! On-disk table cache keyed by function kind and limit.
//!
//! Files live at `<dir>/<kind>-<limit>.safl`. A missing file is a cache miss;
//! a present-but-corrupt file is an integrity error, which `load_or_build`
//! downgrades to a warning plus rebuild while direct loads stay loud.

use std::path::{Path, PathBuf};
use std::time::Instant;

use sumfunc_core::{build_table, read_table, write_table, FunctionKind, FunctionTable, Result};

/// Cache file path for a kind/limit pair. `:` in parameterized kind slugs is
/// replaced to keep names portable.
pub fn cache_path(dir: &Path, kind: FunctionKind, limit: u64) -> PathBuf {
    let slug = kind.slug().replace(':', "-");
    dir.join(format!("{slug}-{limit}.safl"))
}

/// Load the cached table if present. Absent file → `Ok(None)`; unreadable or
/// corrupt file → the underlying error.
pub fn cache_load(dir: &Path, kind: FunctionKind, limit: u64) -> Result<Option<FunctionTable>> {
    let path = cache_path(dir, kind, limit);
    if !path.exists() {
        return Ok(None);
    }
    let table = read_table(&path)?;
    Ok(Some(table))
}

/// Write the table into the cache, creating the directory as needed.
pub fn cache_store(dir: &Path, table: &FunctionTable) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = cache_path(dir, table.kind(), table.limit());
    write_table(table, &path)?;
    Ok(path)
}

/// How `load_or_build` obtained its table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableSource {
    CacheHit,
    Built,
    RebuiltAfterCorruption,
}

impl TableSource {
    pub fn as_str(self) -> &'static str {
        match self {
            TableSource::CacheHit => "cache-hit",
            TableSource::Built => "built",
            TableSource::RebuiltAfterCorruption => "rebuilt-after-corruption",
        }
    }
}

/// Fetch a table from the cache, or sieve it and store the result.
/// A checksum failure on the cached file is reported on stderr and the table
/// is rebuilt from scratch; I/O errors still propagate.
pub fn load_or_build(
    dir: &Path,
    kind: FunctionKind,
    limit: u64,
    segment: u64,
) -> Result<(FunctionTable, TableSource, f64)> {
    let start = Instant::now();
    match cache_load(dir, kind, limit) {
        Ok(Some(table)) => Ok((table, TableSource::CacheHit, start.elapsed().as_secs_f64())),
        Ok(None) => {
            let table = build_table(kind, limit, segment)?;
            cache_store(dir, &table)?;
            Ok((table, TableSource::Built, start.elapsed().as_secs_f64()))
        }
        Err(err) if err.is_integrity() => {
            eprintln!(
                "warning: cached table for kind={} limit={limit} failed verification ({err}); rebuilding",
                kind.slug()
            );
            let table = build_table(kind, limit, segment)?;
            cache_store(dir, &table)?;
            Ok((
                table,
                TableSource::RebuiltAfterCorruption,
                start.elapsed().as_secs_f64(),
            ))
        }
        Err(err) => Err(err),
    }
}
