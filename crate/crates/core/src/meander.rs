//! Brownian meander: transition and marginal densities, and the exact
//! sequential sampler.
//!
//! The meander on `[0,1]` is Brownian motion conditioned to stay positive;
//! its transition density from `(s,x)` to `(t,y)` (both states positive,
//! `0 < s < t ≤ 1`) is
//!
//! ```text
//! p(s,x;t,y) = (φ_{t−s}(y−x) − φ_{t−s}(y+x)) · Φ̃_{1−t}(y) / Φ̃_{1−s}(x),
//! ```
//!
//! and its marginal at time `t` started from zero is
//! `2√(2π) (y/t) φ_t(y) Φ̃_{1−t}(y)`.  At `t = 1` the factor `Φ̃_{1−t}(y)`
//! is replaced by its limit 1/2, which makes the endpoint law Rayleigh.

use crate::error::{Error, Result};
use crate::gauss::{phi, phi_tilde};
use crate::grid::{Grid, GridFunction};
use crate::quad::InverseCdfTable;
use crate::stream::Stream;
use rand::Rng;

/// Time threshold below which `Φ̃_{1−t}` is replaced by its `t → 1` limit.
const T_ONE_EPS: f64 = 1e-12;

/// Number of tabulation points for the per-step inverse CDF.
const CDF_TABLE_POINTS: usize = 256;

/// A meander state `(time, value)` with `0 < time ≤ 1` and `value ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanderState {
    pub time: f64,
    pub value: f64,
}

impl MeanderState {
    pub fn new(time: f64, value: f64) -> Result<Self> {
        if !(time > 0.0 && time <= 1.0) {
            return Err(Error::domain(format!("meander time {time} outside (0,1]")));
        }
        if !(value >= 0.0) {
            return Err(Error::domain(format!("meander value {value} is negative")));
        }
        Ok(MeanderState { time, value })
    }
}

/// `Φ̃_{1−t}(y)` with the `t → 1` limit 1/2 substituted when `1−t < 1e−12`.
fn phi_tilde_tail(t: f64, y: f64) -> Result<f64> {
    if 1.0 - t < T_ONE_EPS {
        Ok(0.5)
    } else {
        phi_tilde(1.0 - t, y)
    }
}

/// Transition density of the Brownian meander.
pub fn meander_transition_density(from: MeanderState, to: MeanderState) -> Result<f64> {
    let (s, x) = (from.time, from.value);
    let (t, y) = (to.time, to.value);
    if t <= s {
        return Err(Error::domain(format!("need s < t, got s={s}, t={t}")));
    }
    if x == 0.0 {
        return Err(Error::domain(
            "transition from value 0 at positive time; use the marginal",
        ));
    }
    if y == 0.0 {
        return Ok(0.0);
    }
    let dt = t - s;
    let kernel = phi(dt, y - x)? - phi(dt, y + x)?;
    let num = phi_tilde_tail(t, y)?;
    let den = phi_tilde_tail(s, x)?;
    Ok((kernel * num / den).max(0.0))
}

/// Marginal density of the Brownian meander at time `t`, started from zero.
pub fn meander_marginal_density(t: f64, y: f64) -> Result<f64> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::domain(format!("meander time {t} outside (0,1]")));
    }
    if !(y >= 0.0) {
        return Err(Error::domain(format!("meander value {y} is negative")));
    }
    if y == 0.0 {
        return Ok(0.0);
    }
    let c = 2.0 * (2.0 * std::f64::consts::PI).sqrt();
    Ok(c * (y / t) * phi(t, y)? * phi_tilde_tail(t, y)?)
}

/// Upper limit of the tabulation range for the step from value `x` over a
/// time increment `dt` (Gaussian tail: eight standard deviations).
fn step_upper(x: f64, dt: f64) -> f64 {
    x + 8.0 * dt.sqrt()
}

/// Sample a Brownian meander on a grid over `[0,1]` by sequential exact
/// sampling from the transition density, via a tabulated inverse CDF per
/// step.  `output[0] = 0` exactly; all later values are positive.
pub fn sample_meander(grid: Grid, stream: &mut Stream) -> Result<GridFunction> {
    if grid.left() != 0.0 || grid.right() != 1.0 {
        return Err(Error::domain("sample_meander expects a grid on [0,1]"));
    }
    let mut values = Vec::with_capacity(grid.points());
    values.push(0.0);
    // First step: marginal at t₁.
    let t1 = grid.x(1);
    let table = InverseCdfTable::build(
        &|y| meander_marginal_density(t1, y).unwrap_or(0.0),
        0.0,
        step_upper(0.0, t1).max(8.0 * t1.sqrt()),
        CDF_TABLE_POINTS,
    )?;
    let mut v = table.sample(stream.gen::<f64>()).max(f64::MIN_POSITIVE);
    values.push(v);
    // Subsequent steps: transition density.
    for i in 1..grid.steps() {
        let s = grid.x(i);
        let t = grid.x(i + 1);
        let from = MeanderState::new(s, v)?;
        let table = InverseCdfTable::build(
            &|y| {
                if y <= 0.0 {
                    0.0
                } else {
                    meander_transition_density(from, MeanderState { time: t, value: y })
                        .unwrap_or(0.0)
                }
            },
            0.0,
            step_upper(v, t - s),
            CDF_TABLE_POINTS,
        )?;
        v = table.sample(stream.gen::<f64>()).max(f64::MIN_POSITIVE);
        values.push(v);
    }
    GridFunction::new(grid, values)
}

/// Sample a Brownian meander on a grid over `[0,1]` through its
/// three-dimensional Bessel representation: conditionally on the Rayleigh
/// endpoint `B_me(1) = r`, the meander is the norm of a 3-D Brownian
/// bridge from the origin to `(r, 0, 0)`,
///
/// ```text
/// B_me(t) = √((rt + b₁(t))² + b₂(t)² + b₃(t)²),
/// ```
///
/// with independent standard bridges `b_i`.  This is an exact sampler with
/// `O(points)` cost per draw, suitable for large Monte Carlo runs where the
/// per-step inverse-CDF tabulation of [`sample_meander`] is too expensive;
/// the two samplers are cross-checked against each other and against the
/// marginal quadrature CDF.
pub fn sample_meander_bessel(grid: Grid, stream: &mut Stream) -> Result<GridFunction> {
    if grid.left() != 0.0 || grid.right() != 1.0 {
        return Err(Error::domain("sample_meander_bessel expects a grid on [0,1]"));
    }
    use rand_distr::StandardNormal;
    let n = grid.steps();
    let sqrt_h = grid.h().sqrt();
    // Rayleigh endpoint via inverse transform of the sf e^{−r²/2}.
    let u: f64 = stream.gen::<f64>();
    let r = (-2.0 * (1.0 - u).max(f64::MIN_POSITIVE).ln()).sqrt();
    // Three Brownian walks, turned into bridges by subtracting t·W(1).
    let mut walks = vec![[0.0f64; 3]];
    let mut w = [0.0f64; 3];
    for _ in 0..n {
        for wi in w.iter_mut() {
            let z: f64 = stream.sample(StandardNormal);
            *wi += sqrt_h * z;
        }
        walks.push(w);
    }
    let end = *walks.last().unwrap();
    let mut values = Vec::with_capacity(grid.points());
    values.push(0.0);
    for (i, wk) in walks.iter().enumerate().skip(1) {
        let t = grid.x(i);
        let b1 = wk[0] - t * end[0] + r * t;
        let b2 = wk[1] - t * end[1];
        let b3 = wk[2] - t * end[2];
        values.push((b1 * b1 + b2 * b2 + b3 * b3).sqrt().max(f64::MIN_POSITIVE));
    }
    GridFunction::new(grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::adaptive_simpson;
    use crate::stream::derive_stream;

    #[test]
    fn marginal_matches_rayleigh_at_one() {
        // t = 1 limit is the Rayleigh density y·exp(−y²/2).
        for &y in &[0.2, 1.0, 2.5] {
            let d = meander_marginal_density(1.0, y).unwrap();
            let rayleigh = y * (-y * y / 2.0).exp();
            assert!((d - rayleigh).abs() < 1e-12, "y={y}: {d} vs {rayleigh}");
        }
        assert!((meander_marginal_density(1.0, 1.0).unwrap() - (-0.5f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn marginal_vanishes_at_zero_and_normalizes() {
        assert_eq!(meander_marginal_density(0.5, 0.0).unwrap(), 0.0);
        for &t in &[0.25, 0.5, 0.75, 1.0] {
            let mass = adaptive_simpson(
                &|y| meander_marginal_density(t, y.max(0.0)).unwrap(),
                0.0,
                12.0,
                1e-10,
            );
            assert!((mass - 1.0).abs() < 1e-6, "t={t}: mass {mass}");
        }
        assert!(meander_marginal_density(0.0, 1.0).is_err());
        assert!(meander_marginal_density(1.5, 1.0).is_err());
    }

    #[test]
    fn transition_density_basics() {
        let from = MeanderState::new(0.5, 1.0).unwrap();
        let to = MeanderState::new(1.0, 1.0).unwrap();
        let d = meander_transition_density(from, to).unwrap();
        let expected = (phi(0.5, 0.0).unwrap() - phi(0.5, 2.0).unwrap()) * 0.5
            / phi_tilde(0.5, 1.0).unwrap();
        assert!((d - expected).abs() < 1e-14);
        // y ↓ 0 vanishes; s ≥ t and x = 0 are rejected.
        let small = meander_transition_density(
            from,
            MeanderState::new(1.0, 1e-9).unwrap(),
        )
        .unwrap();
        assert!(small < 1e-6);
        assert!(meander_transition_density(to, from).is_err());
        let zero = MeanderState::new(0.5, 0.0).unwrap();
        assert!(meander_transition_density(zero, to).is_err());
    }

    #[test]
    fn transition_normalizes() {
        let from = MeanderState::new(0.3, 0.5).unwrap();
        let mass = adaptive_simpson(
            &|y| {
                meander_transition_density(from, MeanderState { time: 0.7, value: y.max(0.0) })
                    .unwrap()
            },
            0.0,
            12.0,
            1e-10,
        );
        assert!((mass - 1.0).abs() < 1e-6, "mass {mass}");
    }

    #[test]
    fn bessel_sampler_matches_sequential_sampler() {
        use crate::stats::ks_two_sample;
        let grid = Grid::new(0.0, 1.0, 32).unwrap();
        let mut s = derive_stream(6, "meander-bessel", 0);
        let idx = grid.index_of(0.5).unwrap();
        let a: Vec<f64> = (0..1500)
            .map(|_| sample_meander(grid, &mut s).unwrap().value(idx))
            .collect();
        let b: Vec<f64> = (0..1500)
            .map(|_| sample_meander_bessel(grid, &mut s).unwrap().value(idx))
            .collect();
        let (_, p) = ks_two_sample(&a, &b).unwrap();
        assert!(p > 1e-3, "samplers disagree at t = 1/2: p = {p}");
        // Endpoint law is Rayleigh: compare against the closed-form CDF.
        let ends: Vec<f64> = (0..3000)
            .map(|_| sample_meander_bessel(grid, &mut s).unwrap().value(32))
            .collect();
        let (_, p) = crate::stats::ks_one_sample(&ends, &|r: f64| {
            if r <= 0.0 {
                0.0
            } else {
                1.0 - (-r * r / 2.0).exp()
            }
        })
        .unwrap();
        assert!(p > 1e-3, "endpoint law not Rayleigh: p = {p}");
    }

    #[test]
    fn sampler_starts_at_zero_and_stays_positive() {
        let grid = Grid::new(0.0, 1.0, 16).unwrap();
        let mut s = derive_stream(5, "meander-smoke", 0);
        for _ in 0..20 {
            let m = sample_meander(grid, &mut s).unwrap();
            assert_eq!(m.value(0), 0.0);
            for i in 1..=16 {
                assert!(m.value(i) > 0.0);
            }
        }
    }
}
