//! Brownian motion and Brownian bridge samplers, the bridge decomposition,
//! and the decomposition of a path around its maximum.
//!
//! All samplers are exact in law on the grid: the joint distribution of the
//! output at grid points is the exact Gaussian finite-dimensional law of the
//! continuum object (diffusion parameter one); the only approximation is the
//! grid restriction itself.  The in-cell crossing probability
//! [`prob_sup_exceeds`] removes even that bias for sup-type functionals.

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::stream::Stream;
use rand::Rng;
use rand_distr::StandardNormal;

/// Sample a Brownian motion of diffusion parameter one on `grid`, started
/// at `start_value` at the left endpoint.
pub fn sample_motion(grid: Grid, start_value: f64, stream: &mut Stream) -> GridFunction {
    let h = grid.h();
    let sqrt_h = h.sqrt();
    let mut values = Vec::with_capacity(grid.points());
    let mut v = start_value;
    values.push(v);
    for _ in 0..grid.steps() {
        let z: f64 = stream.sample(StandardNormal);
        v += sqrt_h * z;
        values.push(v);
    }
    GridFunction::new(grid, values).expect("motion values are finite")
}

/// Sample a Brownian bridge of diffusion parameter one on `grid` pinned to
/// `left_value` and `right_value` at the endpoints, by sequential
/// conditional sampling (exact on the grid).
pub fn sample_bridge(
    grid: Grid,
    left_value: f64,
    right_value: f64,
    stream: &mut Stream,
) -> GridFunction {
    let h = grid.h();
    let mut values = Vec::with_capacity(grid.points());
    let mut v = left_value;
    values.push(v);
    for i in 0..grid.steps() {
        if i + 1 == grid.steps() {
            values.push(right_value);
            break;
        }
        // Time remaining to the pinned right endpoint.
        let rem = grid.right() - grid.x(i);
        let mean = v + (right_value - v) * h / rem;
        let var = h * (rem - h) / rem;
        let z: f64 = stream.sample(StandardNormal);
        v = mean + var.sqrt() * z;
        values.push(v);
    }
    GridFunction::new(grid, values).expect("bridge values are finite")
}

/// Conditional probability, given the sampled grid skeleton of a rate-one
/// Brownian path, that the continuum path exceeds level `r` somewhere.
///
/// Within one cell the path is a Brownian bridge between the two skeleton
/// values; the probability that this excursion reaches `r` is
/// `exp(−2(r−a)(r−b)/h)` when both endpoints are below `r`, and 1 otherwise.
/// Averaging this quantity over draws gives an unbiased estimator of the
/// continuum `P(sup ≥ r)`, with no grid bias.
pub fn prob_sup_exceeds(path: &GridFunction, r: f64) -> f64 {
    let h = path.grid().h();
    let mut miss = 1.0;
    let vals = path.values();
    for w in vals.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a >= r || b >= r {
            return 1.0;
        }
        miss *= 1.0 - (-2.0 * (r - a) * (r - b) / h).exp();
        if miss == 0.0 {
            return 1.0;
        }
    }
    1.0 - miss
}

/// Mirror image of [`prob_sup_exceeds`] for the infimum.
pub fn prob_inf_below(path: &GridFunction, r: f64) -> f64 {
    let h = path.grid().h();
    let mut miss = 1.0;
    for w in path.values().windows(2) {
        let (a, b) = (w[0], w[1]);
        if a <= r || b <= r {
            return 1.0;
        }
        miss *= 1.0 - (-2.0 * (a - r) * (b - r) / h).exp();
        if miss == 0.0 {
            return 1.0;
        }
    }
    1.0 - miss
}

/// Decompose `path` at interior knots into its affinely shifted bridge
/// pieces `f^{[x_i, x_{i+1}]}`, each vanishing at both ends.
///
/// Knots must be strictly increasing, interior and grid-aligned.
pub fn bridge_decompose(path: &GridFunction, knots: &[f64]) -> Result<Vec<GridFunction>> {
    let grid = path.grid();
    let mut idx = vec![0usize];
    let mut prev = f64::NEG_INFINITY;
    for &k in knots {
        if k <= prev {
            return Err(Error::domain("knots must be strictly increasing"));
        }
        let i = grid.index_of(k)?;
        if i == 0 || i == grid.steps() {
            return Err(Error::domain(format!("knot {k} must be interior")));
        }
        idx.push(i);
        prev = k;
    }
    idx.push(grid.steps());
    let mut pieces = Vec::with_capacity(idx.len() - 1);
    for w in idx.windows(2) {
        let (i0, i1) = (w[0], w[1]);
        let sub = grid.subgrid(i0, i1)?;
        let (a, b) = (sub.left(), sub.right());
        let (fa, fb) = (path.value(i0), path.value(i1));
        let mut vals = Vec::with_capacity(i1 - i0 + 1);
        for i in i0..=i1 {
            let x = grid.x(i);
            let affine = fa + (fb - fa) * (x - a) / (b - a);
            vals.push(path.value(i) - affine);
        }
        // Pin the endpoints to exact zeros (affine algebra may leave ±1e-16).
        vals[0] = 0.0;
        let last = vals.len() - 1;
        vals[last] = 0.0;
        pieces.push(GridFunction::new(sub, vals)?);
    }
    Ok(pieces)
}

/// Result of [`decompose_at_max`]: the maximizer, the maximum, and the two
/// meanders read off the descent on either side of the maximum.  A side is
/// `None` when the maximizer sits on that boundary (degenerate side).
#[derive(Debug, Clone)]
pub struct MaxDecomposition {
    pub argmax: f64,
    pub max: f64,
    /// `u ↦ (1−x_max)^{−1/2} (M − path(x_max + u(1−x_max)))` on `[0,1]`.
    pub right_meander: Option<GridFunction>,
    /// `u ↦ x_max^{−1/2} (M − path(x_max(1−u)))` on `[0,1]`.
    pub left_meander: Option<GridFunction>,
}

/// Decompose a path on `[0,1]`, started at 0, around its maximum.
///
/// The maximizer must be unique on the grid (exact ties are a degenerate
/// input).  Each meander is resampled onto a canonical `[0,1]` grid with the
/// same number of steps as the input grid, by linear interpolation.
pub fn decompose_at_max(path: &GridFunction) -> Result<MaxDecomposition> {
    let grid = path.grid();
    if grid.left() != 0.0 || grid.right() != 1.0 {
        return Err(Error::domain("decompose_at_max expects a path on [0,1]"));
    }
    if path.value(0) != 0.0 {
        return Err(Error::domain("decompose_at_max expects path(0) = 0"));
    }
    let am = path.argmax();
    let m = path.value(am);
    if path.values().iter().enumerate().any(|(i, &v)| i != am && v == m) {
        return Err(Error::degenerate("tied maxima"));
    }
    let x_max = grid.x(am);
    let canon = Grid::new(0.0, 1.0, grid.steps())?;

    let right_meander = if am == grid.steps() {
        None
    } else {
        let scale = (1.0 - x_max).sqrt().recip();
        Some(GridFunction::from_fn(canon, |u| {
            let x = (x_max + u * (1.0 - x_max)).min(1.0);
            scale * (m - path.interp(x).expect("in range"))
        })?)
    };
    let left_meander = if am == 0 {
        None
    } else {
        let scale = x_max.sqrt().recip();
        Some(GridFunction::from_fn(canon, |u| {
            let x = (x_max * (1.0 - u)).max(0.0);
            scale * (m - path.interp(x).expect("in range"))
        })?)
    };
    Ok(MaxDecomposition {
        argmax: x_max,
        max: m,
        right_meander,
        left_meander,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::derive_stream;

    #[test]
    fn bridge_endpoints_exact() {
        let grid = Grid::new(0.0, 1.0, 16).unwrap();
        let mut s = derive_stream(1, "bridge-endpoints", 0);
        let b = sample_bridge(grid, 0.25, -1.5, &mut s);
        assert_eq!(b.value(0), 0.25);
        assert_eq!(b.value(16), -1.5);
    }

    #[test]
    fn motion_start_exact() {
        let grid = Grid::new(0.0, 2.0, 8).unwrap();
        let mut s = derive_stream(1, "motion-start", 0);
        let m = sample_motion(grid, 3.0, &mut s);
        assert_eq!(m.value(0), 3.0);
    }

    #[test]
    fn decompose_linear_path_vanishes() {
        let grid = Grid::new(0.0, 1.0, 8).unwrap();
        let f = GridFunction::from_fn(grid, |x| 2.0 * x - 0.5).unwrap();
        let pieces = bridge_decompose(&f, &[0.25, 0.5]).unwrap();
        assert_eq!(pieces.len(), 3);
        for p in &pieces {
            for &v in p.values() {
                assert!(v.abs() < 1e-14);
            }
        }
    }

    #[test]
    fn decompose_no_knots_single_piece() {
        let grid = Grid::new(0.0, 1.0, 4).unwrap();
        let f = GridFunction::new(grid, vec![1.0, 3.0, 0.0, 2.0, -1.0]).unwrap();
        let pieces = bridge_decompose(&f, &[]).unwrap();
        assert_eq!(pieces.len(), 1);
        let p = &pieces[0];
        assert_eq!(p.value(0), 0.0);
        assert_eq!(p.value(4), 0.0);
        // Interior: f minus the chord from (0,1) to (1,-1).
        assert!((p.value(2) - (0.0 - 0.0)).abs() < 1e-14);
        assert!((p.value(1) - (3.0 - 0.5)).abs() < 1e-14);
    }

    #[test]
    fn decompose_rejects_misaligned_knot() {
        let grid = Grid::new(0.0, 1.0, 4).unwrap();
        let f = GridFunction::from_fn(grid, |x| x).unwrap();
        assert!(bridge_decompose(&f, &[0.3]).is_err());
    }

    #[test]
    fn tent_decomposition_formula() {
        // Symmetric tent peaking at 1/2 with M = 1: both meanders are the
        // rescaled descent √2·(1 − tent ∘ time map).
        let grid = Grid::new(0.0, 1.0, 64).unwrap();
        let tent = GridFunction::from_fn(grid, |x| 1.0 - 2.0 * (x - 0.5).abs()).unwrap();
        let d = decompose_at_max(&tent).unwrap();
        assert_eq!(d.argmax, 0.5);
        assert_eq!(d.max, 1.0);
        let r = d.right_meander.unwrap();
        let l = d.left_meander.unwrap();
        let s2 = 2.0f64.sqrt();
        for i in 0..=64 {
            let u = i as f64 / 64.0;
            // Descent from the peak: tent(1/2 + u/2) = 1 − u on both sides.
            assert!((r.value(i) - s2 * u).abs() < 1e-12);
            assert!((l.value(i) - s2 * u).abs() < 1e-12);
        }
    }

    #[test]
    fn monotone_decreasing_path_boundary_maximizer() {
        let grid = Grid::new(0.0, 1.0, 32).unwrap();
        let f = GridFunction::from_fn(grid, |x| -x).unwrap();
        let d = decompose_at_max(&f).unwrap();
        assert_eq!(d.argmax, 0.0);
        assert!(d.left_meander.is_none());
        let r = d.right_meander.unwrap();
        for i in 0..=32 {
            let u = i as f64 / 32.0;
            assert!((r.value(i) - u).abs() < 1e-12);
        }
    }

    #[test]
    fn tied_maxima_rejected() {
        let grid = Grid::new(0.0, 1.0, 4).unwrap();
        let f = GridFunction::new(grid, vec![0.0, 1.0, 0.5, 1.0, 0.0]).unwrap();
        assert!(matches!(decompose_at_max(&f), Err(Error::Degenerate(_))));
    }

    #[test]
    fn reassembly_reproduces_path() {
        // decompose_at_max followed by re-assembly reproduces the input at
        // shared grid points to 1e-12.
        let grid = Grid::new(0.0, 1.0, 128).unwrap();
        let mut s = derive_stream(9, "reassembly", 0);
        let path = {
            let m = sample_motion(grid, 0.0, &mut s);
            m
        };
        let d = match decompose_at_max(&path) {
            Ok(d) => d,
            Err(_) => return, // ties have probability zero; bail if hit
        };
        let am = grid.index_of(d.argmax).unwrap();
        if am == 0 || am == grid.steps() {
            return;
        }
        let (r, l) = (d.right_meander.unwrap(), d.left_meander.unwrap());
        // Shared grid points of the right meander grid and the path grid:
        // u = j/steps maps to x = x_max + u(1-x_max); x is a path grid point
        // when j*(steps-am) % steps == 0.
        let steps = grid.steps();
        for j in 0..=steps {
            let num = j * (steps - am);
            if num % steps == 0 {
                let i = am + num / steps;
                let rebuilt = d.max - (1.0 - d.argmax).sqrt() * r.value(j);
                assert!((rebuilt - path.value(i)).abs() < 1e-12);
            }
            let numl = j * am;
            if numl % steps == 0 {
                let i = am - numl / steps;
                let rebuilt = d.max - d.argmax.sqrt() * l.value(j);
                assert!((rebuilt - path.value(i)).abs() < 1e-12);
            }
        }
    }
}
