//! The run manifest: a JSON record tying every output file to the exact
//! configuration, seed and substream keys that produced it, plus the
//! per-criterion verdicts.
//!
//! Everything in the manifest is a pure function of (config, seed) —
//! worker count and timing deliberately stay out — so replaying a
//! manifest's config and seed reproduces the whole output tree byte for
//! byte, independent of scheduling.

use crate::config::RunConfig;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Version stamp written into every manifest.
pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// One acceptance or monitoring verdict.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriterionResult {
    pub name: String,
    /// Hard criteria gate the exit status; monitoring criteria never do.
    pub hard: bool,
    pub pass: bool,
    pub detail: String,
}

impl CriterionResult {
    pub fn hard(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        CriterionResult { name: name.into(), hard: true, pass, detail: detail.into() }
    }

    pub fn monitor(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        CriterionResult { name: name.into(), hard: false, pass, detail: detail.into() }
    }
}

/// The result of running one experiment: CSV content plus verdicts.
#[derive(Debug, Clone)]
pub struct ExperimentReport {
    /// CSV schema row, e.g. `"a,eta,hits,trials,estimate"`.
    pub header: String,
    /// Pre-formatted CSV data rows (no trailing newlines).
    pub rows: Vec<String>,
    pub criteria: Vec<CriterionResult>,
}

impl ExperimentReport {
    pub fn new(header: impl Into<String>) -> Self {
        ExperimentReport { header: header.into(), rows: Vec::new(), criteria: Vec::new() }
    }

    pub fn hard_pass(&self) -> bool {
        self.criteria.iter().filter(|c| c.hard).all(|c| c.pass)
    }
}

/// Manifest entry for one experiment of a run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    /// Echo of every resolved parameter (plus the seed).
    pub config: BTreeMap<String, String>,
    /// The stream-derivation key: replication `i` of this experiment uses
    /// the stream derived from `(master_seed, substream_key, i)`.
    pub substream_key: String,
    pub csv: String,
    pub criteria: Vec<CriterionResult>,
}

/// The top-level manifest written next to the CSV outputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub artifact_version: String,
    pub master_seed: u64,
    /// FNV-1a hash of the canonical configuration echo of all entries.
    pub config_hash: String,
    pub experiments: Vec<ManifestEntry>,
}

impl RunManifest {
    pub fn new(seed: u64) -> Self {
        RunManifest {
            artifact_version: ARTIFACT_VERSION.to_string(),
            master_seed: seed,
            config_hash: String::new(),
            experiments: Vec::new(),
        }
    }

    pub fn push(&mut self, cfg: &RunConfig, report: &ExperimentReport) {
        self.experiments.push(ManifestEntry {
            name: cfg.experiment.clone(),
            config: cfg.echo(),
            substream_key: cfg.experiment.clone(),
            csv: format!("{}.csv", cfg.experiment),
            criteria: report.criteria.clone(),
        });
    }

    /// Finalize the hash over the canonical config echo.
    pub fn seal(&mut self) {
        let mut canon = format!("seed={}\n", self.master_seed);
        for e in &self.experiments {
            canon.push_str(&e.name);
            canon.push('\n');
            for (k, v) in &e.config {
                canon.push_str(&format!("{k}={v}\n"));
            }
        }
        self.config_hash = format!("{:016x}", fnv1a(canon.as_bytes()));
    }
}

/// FNV-1a 64-bit hash.
fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xCBF29CE484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001B3);
    }
    h
}
