//! Quilt continuity, the weight-increment moment monitor, and the
//! analytic lemma checks.

use super::fmt;
use crate::config::RunConfig;
use crate::manifest::{CriterionResult, ExperimentReport};
use crate::runner::try_parallel_map;
use quiltlab_core::{
    analytic_lemma_checks, build_quilt, derive_stream, increment_moment_experiment,
    sample_motion, Grid, Result, RewardFunction,
};

/// Quilt continuity and identity: stitch residual below 1e−9 on random
/// fabrics; the trivial stitch set reproduces its fabric bitwise.
pub fn quilt_continuity(cfg: &RunConfig) -> Result<ExperimentReport> {
    let draws = cfg.u64("draws");
    let grid = Grid::new(0.0, 1.0, 64)?;
    let stitches = [0.25, 0.625];

    let outcomes = try_parallel_map(cfg, &cfg.experiment, draws, |_, stream| {
        let fabrics: Vec<_> =
            (0..3).map(|i| sample_motion(grid, i as f64, stream)).collect();
        let q = build_quilt(&fabrics, &stitches)?;
        let residual = q.continuity_residual();
        // Trivial stitch set: the quilt is its only fabric, bitwise.
        let solo = build_quilt(&fabrics[..1], &[])?;
        let identity = solo
            .function()
            .values()
            .iter()
            .zip(fabrics[0].values())
            .all(|(a, b)| a.to_bits() == b.to_bits());
        Ok((residual, identity))
    })?;

    let mut rep = ExperimentReport::new("rep,residual,identity_ok");
    let mut worst = 0.0f64;
    let mut all_identity = true;
    for (i, (residual, identity)) in outcomes.iter().enumerate() {
        worst = worst.max(*residual);
        all_identity &= identity;
        rep.rows.push(format!("{i},{},{}", fmt(*residual), *identity as u8));
    }
    rep.criteria.push(CriterionResult::hard(
        "quilt-continuity",
        worst < 1e-9,
        format!("max stitch residual {worst:.2e} over {draws} instances"),
    ));
    rep.criteria.push(CriterionResult::hard(
        "trivial-stitch-identity",
        all_identity,
        "single-fabric quilt reproduces the fabric bitwise",
    ));
    Ok(rep)
}

/// Weight-increment moment monitor: the log-log slope of
/// `E|W^f(y) − W^f(0)|^{2−η}` against `y` should sit near `1 − η/2`.
pub fn increment_moment(cfg: &RunConfig) -> Result<ExperimentReport> {
    let draws = cfg.u64("draws");
    let eta = cfg.f64("eta");
    let n = 8usize;
    // 2n^{2/3} = 8 keeps every scaled coordinate on the 1/16-spaced grid.
    let grid = Grid::new(0.0, 10.0, 160)?;
    let fg = Grid::new(0.0, 1.0, 8)?;
    let f = RewardFunction::narrow_wedge(fg, (1.0, 1.0, 1.0))?;
    let ys = [0.0625, 0.125, 0.1875, 0.25];

    let mut rep = ExperimentReport::new("y,moment,stderr,slope,target_slope,r_squared");
    if draws == 0 {
        return Ok(rep);
    }
    let mut stream = derive_stream(cfg.seed, &cfg.experiment, 0);
    let report = increment_moment_experiment(n, grid, &f, eta, &ys, draws as usize, &mut stream)?;
    for row in &report.rows {
        rep.rows.push(format!(
            "{},{},{},{},{},{}",
            fmt(row.y),
            fmt(row.moment),
            fmt(row.stderr),
            fmt(report.slope),
            fmt(report.target_slope),
            fmt(report.r_squared)
        ));
    }
    let dev = (report.slope - report.target_slope).abs();
    rep.criteria.push(CriterionResult::monitor(
        "increment-moment-slope",
        dev <= 0.15,
        format!(
            "fitted slope {:.3} vs target {:.3} (|Δ| = {dev:.3}, R² {:.3})",
            report.slope, report.target_slope, report.r_squared
        ),
    ));
    Ok(rep)
}

/// The supporting analytic lemmas, each verified by closed form or
/// quadrature over its parameter lattice.
pub fn analytic_lemmas(cfg: &RunConfig) -> Result<ExperimentReport> {
    let _ = cfg;
    let mut rep = ExperimentReport::new("lemma,cases,worst_margin,pass");
    let checks = analytic_lemma_checks()?;
    let mut all = true;
    for c in &checks {
        all &= c.pass;
        rep.rows.push(format!("{},{},{},{}", c.name, c.cases, fmt(c.worst_margin), c.pass as u8));
    }
    rep.criteria.push(CriterionResult::hard(
        "analytic-lemmas",
        all,
        format!("{} lemma lattices, all margins non-negative", checks.len()),
    ));
    Ok(rep)
}
