//! Meander experiments: density normalization and Chapman–Kolmogorov
//! consistency by quadrature, the three appendix bound evaluations, and
//! the near-zero tail Monte Carlo.

use super::fmt;
use crate::config::RunConfig;
use crate::manifest::{CriterionResult, ExperimentReport};
use crate::runner::try_parallel_map;
use quiltlab_core::{
    adaptive_simpson, meander_bound_quadrature, meander_marginal_density,
    meander_transition_density, nz_event, sample_meander_bessel, wilson_ci, Grid, MeanderBound,
    MeanderState, Result,
};

/// Adaptive Simpson over `[a, b]` in fixed-width panels, so narrow peaks
/// cannot slip between the initial sample points of a single panel.
fn integrate_panels(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let width = 0.5;
    let n = ((b - a) / width).ceil().max(1.0) as usize;
    let h = (b - a) / n as f64;
    (0..n)
        .map(|i| adaptive_simpson(f, a + i as f64 * h, a + (i + 1) as f64 * h, tol / n as f64))
        .sum()
}

/// Transition/marginal normalization on fixed lattices plus the
/// Chapman–Kolmogorov residual at three parameter points.
pub fn densities(cfg: &RunConfig) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new("kind,s,x,t,value,residual");
    let tol_norm = cfg.f64("tol_norm");
    let tol_ck = cfg.f64("tol_ck");

    let mut worst_trans = 0.0f64;
    for &s in &[0.1, 0.3, 0.5] {
        for &x in &[0.2, 0.8, 1.5] {
            for &t in &[0.6, 0.8, 1.0] {
                let from = MeanderState::new(s, x)?;
                let mass = integrate_panels(
                    &|y| {
                        meander_transition_density(
                            from,
                            MeanderState { time: t, value: y.max(0.0) },
                        )
                        .unwrap_or(0.0)
                    },
                    0.0,
                    x + 10.0,
                    1e-10,
                );
                let r = (mass - 1.0).abs();
                worst_trans = worst_trans.max(r);
                rep.rows.push(format!(
                    "transition-norm,{},{},{},{},{}",
                    fmt(s), fmt(x), fmt(t), fmt(mass), fmt(r)
                ));
            }
        }
    }

    let mut worst_marg = 0.0f64;
    for &t in &[0.25, 0.5, 0.75, 1.0] {
        let mass = integrate_panels(
            &|y| meander_marginal_density(t, y.max(0.0)).unwrap_or(0.0),
            0.0,
            12.0,
            1e-10,
        );
        let r = (mass - 1.0).abs();
        worst_marg = worst_marg.max(r);
        rep.rows.push(format!("marginal-norm,0,0,{},{},{}", fmt(t), fmt(mass), fmt(r)));
    }

    // Chapman–Kolmogorov: p(s,x;t,y) = ∫ p(s,x;m,z) p(m,z;t,y) dz, sup
    // residual over a y-lattice at three (s, x, m, t) points.
    let mut worst_ck = 0.0f64;
    for &(s, x, m, t) in &[(0.2, 0.5, 0.45, 0.7), (0.1, 0.3, 0.5, 0.9), (0.3, 1.0, 0.6, 1.0)] {
        let from = MeanderState::new(s, x)?;
        let mut sup = 0.0f64;
        for iy in 1..=12 {
            let y = 0.25 * iy as f64;
            let direct = meander_transition_density(from, MeanderState::new(t, y)?)?;
            let via = integrate_panels(
                &|z| {
                    if z <= 0.0 {
                        return 0.0;
                    }
                    let mid = MeanderState { time: m, value: z };
                    meander_transition_density(from, mid).unwrap_or(0.0)
                        * meander_transition_density(mid, MeanderState { time: t, value: y })
                            .unwrap_or(0.0)
                },
                0.0,
                x + 10.0,
                1e-10,
            );
            sup = sup.max((direct - via).abs());
        }
        worst_ck = worst_ck.max(sup);
        rep.rows.push(format!(
            "chapman-kolmogorov,{},{},{},{},{}",
            fmt(s), fmt(x), fmt(t), fmt(m), fmt(sup)
        ));
    }

    // Sampler fidelity: KS distance of the one-point marginals of both
    // exact samplers against the tabulated quadrature CDF.
    let draws = cfg.u64("draws");
    let steps = cfg.usize("steps");
    if draws > 0 {
        let grid = Grid::new(0.0, 1.0, steps)?;
        let t_list = [0.25, 0.5, 1.0];
        let idx: Vec<usize> =
            t_list.iter().map(|&t| grid.index_of(t)).collect::<Result<_>>()?;
        let values = try_parallel_map(cfg, "meander-densities", draws, |_, stream| {
            let seq = quiltlab_core::sample_meander(grid, stream)?;
            let bes = sample_meander_bessel(grid, stream)?;
            Ok::<_, quiltlab_core::Error>([
                [seq.value(idx[0]), seq.value(idx[1]), seq.value(idx[2])],
                [bes.value(idx[0]), bes.value(idx[1]), bes.value(idx[2])],
            ])
        })?;
        let mut worst_ks = 0.0f64;
        for (si, sampler) in ["sequential", "bessel"].iter().enumerate() {
            for (ti, &t) in t_list.iter().enumerate() {
                let cdf = tabulated_marginal_cdf(t)?;
                let sample: Vec<f64> = values.iter().map(|v| v[si][ti]).collect();
                let (stat, _) = quiltlab_core::ks_one_sample(&sample, &|y| cdf.eval(y))?;
                worst_ks = worst_ks.max(stat);
                rep.rows
                    .push(format!("sampler-ks-{sampler},0,0,{},{},0", fmt(t), fmt(stat)));
            }
        }
        rep.criteria.push(CriterionResult::hard(
            "sampler-fidelity",
            worst_ks < cfg.f64("tol_ks"),
            format!("max KS over samplers × t: {worst_ks:.4} ({draws} draws)"),
        ));
    }

    rep.criteria.push(CriterionResult::hard(
        "transition-normalization",
        worst_trans <= tol_norm,
        format!("max |mass − 1| = {worst_trans:.3e} (tol {tol_norm:.0e})"),
    ));
    rep.criteria.push(CriterionResult::hard(
        "marginal-normalization",
        worst_marg <= tol_norm,
        format!("max |mass − 1| = {worst_marg:.3e} (tol {tol_norm:.0e})"),
    ));
    rep.criteria.push(CriterionResult::hard(
        "chapman-kolmogorov",
        worst_ck < tol_ck,
        format!("max residual = {worst_ck:.3e} (tol {tol_ck:.0e})"),
    ));
    Ok(rep)
}

/// A tabulated marginal CDF at time `t`: cumulative trapezoid of the
/// quadrature density on a fine lattice, normalized.
struct TabulatedCdf {
    h: f64,
    cdf: Vec<f64>,
}

impl TabulatedCdf {
    fn eval(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        let pos = y / self.h;
        let i = pos.floor() as usize;
        if i + 1 >= self.cdf.len() {
            return 1.0;
        }
        let frac = pos - i as f64;
        self.cdf[i] + frac * (self.cdf[i + 1] - self.cdf[i])
    }
}

fn tabulated_marginal_cdf(t: f64) -> Result<TabulatedCdf> {
    let n = 8192usize;
    let y_max = 12.0;
    let h = y_max / n as f64;
    let dens: Vec<f64> = (0..=n)
        .map(|i| meander_marginal_density(t, h * i as f64).unwrap_or(0.0))
        .collect();
    let mut cdf = quiltlab_core::cumulative_trapezoid(&dens, h);
    let total = *cdf.last().unwrap();
    for c in cdf.iter_mut() {
        *c /= total;
    }
    Ok(TabulatedCdf { h, cdf })
}

/// The three appendix meander probabilities evaluated by quadrature over
/// their parameter lattices, against the bounds 1/2, 3/4 and 0.967.
pub fn bounds(cfg: &RunConfig) -> Result<ExperimentReport> {
    let _ = cfg;
    let mut rep = ExperimentReport::new("which,eta,t,x,value,bound");
    let mut margins = [f64::INFINITY; 3];

    for &eta in &[0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5] {
        let v = meander_bound_quadrature(MeanderBound::FromZero { eta })?;
        margins[0] = margins[0].min(0.5 - v);
        rep.rows.push(format!("from-zero,{},0,0,{},0.5", fmt(eta), fmt(v)));
    }
    for &eta in &[0.01, 0.05, 0.1] {
        for &t in &[2.0 * eta, 0.3, 1.0 - 4.0 * eta] {
            for &xf in &[0.25, 0.6, 1.0] {
                let x = xf * 1.1 * f64::sqrt(eta);
                let v = meander_bound_quadrature(MeanderBound::Increment { eta, t, x })?;
                margins[1] = margins[1].min(0.75 - v);
                rep.rows.push(format!(
                    "increment,{},{},{},{},0.75",
                    fmt(eta), fmt(t), fmt(x), fmt(v)
                ));
            }
        }
    }
    for &eta in &[0.01, 0.05, 0.08] {
        // t spans the admissible interval (η, 1−10η].
        for &tf in &[0.25, 0.6, 1.0] {
            let t = f64::min(eta + tf * (1.0 - 11.0 * eta), 1.0 - 10.0 * eta);
            for &xf in &[1.2, 1.5, 3.0] {
                let x = xf * 1.1 * f64::sqrt(eta);
                let v =
                    meander_bound_quadrature(MeanderBound::ReturnFromAbove { eta, t, x })?;
                margins[2] = margins[2].min(0.967 - v);
                rep.rows.push(format!(
                    "return-from-above,{},{},{},{},0.967",
                    fmt(eta), fmt(t), fmt(x), fmt(v)
                ));
            }
        }
    }

    for (name, margin, bound) in [
        ("from-zero-bound", margins[0], "1/2"),
        ("increment-bound", margins[1], "3/4"),
        ("return-from-above-bound", margins[2], "0.967"),
    ] {
        rep.criteria.push(CriterionResult::hard(
            name,
            margin >= 0.0,
            format!("worst slack below {bound}: {margin:.4}"),
        ));
    }
    Ok(rep)
}

/// Near-zero tail Monte Carlo: `P(NZ(B_me, η, a)) ≤ 2a + 3·stderr` per
/// `(a, η)` cell, all cells evaluated on shared meander draws.
pub fn nz_tails(cfg: &RunConfig) -> Result<ExperimentReport> {
    let draws = cfg.u64("draws");
    let steps = cfg.usize("steps");
    let a_list = [0.05, 0.1, 0.2];
    let eta_list = [0.01, 0.05, 0.1];
    let mut rep = ExperimentReport::new("a,eta,hits,trials,estimate,wilson_lo,wilson_hi,bound");
    let grid = Grid::new(0.0, 1.0, steps)?;

    let outcomes = try_parallel_map(cfg, &cfg.experiment, draws, |_, stream| {
        let path = sample_meander_bessel(grid, stream)?;
        let mut cell = [[false; 3]; 3];
        for (ia, &a) in a_list.iter().enumerate() {
            for (ie, &eta) in eta_list.iter().enumerate() {
                cell[ia][ie] = nz_event(&path, eta, a)?;
            }
        }
        Ok(cell)
    })?;

    let mut all = true;
    for (ia, &a) in a_list.iter().enumerate() {
        for (ie, &eta) in eta_list.iter().enumerate() {
            let hits = outcomes.iter().filter(|c| c[ia][ie]).count() as u64;
            let p = if draws > 0 { hits as f64 / draws as f64 } else { 0.0 };
            let stderr = if draws > 0 { (p * (1.0 - p) / draws as f64).sqrt() } else { 0.0 };
            let bound = 2.0 * a + 3.0 * stderr;
            let (lo, hi) = if draws > 0 { wilson_ci(hits, draws, 0.95)? } else { (0.0, 1.0) };
            if p > bound {
                all = false;
            }
            rep.rows.push(format!(
                "{},{},{hits},{draws},{},{},{},{}",
                fmt(a), fmt(eta), fmt(p), fmt(lo), fmt(hi), fmt(bound)
            ));
        }
    }
    rep.criteria.push(CriterionResult::hard(
        "nz-tail-bound",
        all,
        format!("P(NZ) ≤ 2a + 3·stderr over {} cells, {draws} draws", a_list.len() * eta_list.len()),
    ));
    Ok(rep)
}
