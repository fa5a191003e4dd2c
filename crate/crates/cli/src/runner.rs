//! Deterministic parallel execution and file output.
//!
//! Replications are distributed over a worker pool by index; each
//! replication draws from its own stream derived from
//! `(master seed, substream key, replication index)`, and results are
//! collected in replication-index order before any aggregation.  The
//! output bytes are therefore a pure function of (config, seed),
//! independent of worker count and scheduling.

use crate::config::RunConfig;
use crate::manifest::{ExperimentReport, RunManifest};
use quiltlab_core::{derive_stream, Error, Result, Stream};
use rayon::prelude::*;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

/// Map `per` over replication indices `0..draws` on `cfg.workers` threads,
/// returning results in index order.
pub fn parallel_map<T: Send>(
    cfg: &RunConfig,
    key: &str,
    draws: u64,
    per: impl Fn(u64, &mut Stream) -> T + Sync,
) -> Result<Vec<T>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Numerical(format!("worker pool: {e}")))?;
    let seed = cfg.seed;
    Ok(pool.install(|| {
        (0..draws)
            .into_par_iter()
            .map(|rep| {
                let mut stream = derive_stream(seed, key, rep);
                per(rep, &mut stream)
            })
            .collect()
    }))
}

/// Fallible variant of [`parallel_map`]: the first error (in replication
/// order) is returned.
pub fn try_parallel_map<T: Send>(
    cfg: &RunConfig,
    key: &str,
    draws: u64,
    per: impl Fn(u64, &mut Stream) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    parallel_map(cfg, key, draws, per)?.into_iter().collect()
}

/// Write the experiment CSV into the output directory.
pub fn write_csv(cfg: &RunConfig, report: &ExperimentReport) -> Result<PathBuf> {
    fs::create_dir_all(&cfg.out_dir)?;
    let path = cfg.out_dir.join(format!("{}.csv", cfg.experiment));
    let mut f = fs::File::create(&path)?;
    writeln!(f, "{}", report.header)?;
    for row in &report.rows {
        writeln!(f, "{row}")?;
    }
    Ok(path)
}

/// Write the manifest JSON into the output directory.
pub fn write_manifest(out_dir: &PathBuf, manifest: &RunManifest) -> Result<PathBuf> {
    fs::create_dir_all(out_dir)?;
    let path = out_dir.join("manifest.json");
    let json = serde_json::to_string_pretty(manifest)
        .map_err(|e| Error::Numerical(format!("manifest serialization: {e}")))?;
    fs::write(&path, json + "\n")?;
    Ok(path)
}
