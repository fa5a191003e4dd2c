//! Experiment registry, deterministic parallel Monte Carlo execution and
//! file outputs for the `quiltlab` command-line interface.
//!
//! The contract of the harness is full determinism: for a fixed
//! (configuration, master seed), every output byte is a pure function of
//! the inputs, independent of worker count and scheduling.  Replications
//! draw from substreams keyed by `(seed, experiment, index)` and are
//! merged in fixed index order.

pub mod config;
pub mod experiments;
pub mod manifest;
pub mod registry;
pub mod runner;

use config::{RunConfig, Tier};
use manifest::{ExperimentReport, RunManifest};
use quiltlab_core::Result;

/// Run one resolved experiment, write its CSV, and append it to the
/// manifest.  Returns the report for verdict printing.
pub fn run_experiment(
    cfg: &RunConfig,
    manifest: &mut RunManifest,
) -> Result<ExperimentReport> {
    let exp = registry::find(&cfg.experiment)?;
    let mut report = (exp.run)(cfg)?;
    // draws = 0 is a vacuous run: header-only CSV, no verdicts, success.
    if cfg.params.get("draws") == Some(&config::ParamValue::Int(0)) {
        report.rows.clear();
        report.criteria.clear();
    }
    runner::write_csv(cfg, &report)?;
    manifest.push(cfg, &report);
    Ok(report)
}

/// Resolve a default configuration for `name` at the given tier, with
/// optional seed/workers/out overrides shared by `verify-all`.
pub fn resolve_default(
    name: &str,
    tier: Tier,
    seed: Option<u64>,
    workers: Option<usize>,
    out: Option<std::path::PathBuf>,
) -> Result<RunConfig> {
    let exp = registry::find(name)?;
    RunConfig::resolve(name, exp.schema, tier, None, seed, None, workers, out)
}
