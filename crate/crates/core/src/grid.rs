//! Uniform grids and grid-sampled real functions.
//!
//! Every path-valued object in the crate — Brownian motions, bridges,
//! meanders, ensemble curves, tent maps evaluated on grids — is represented
//! as a [`GridFunction`]: a vector of values over a uniform [`Grid`].
//! All operations that take a coordinate require it to lie exactly on a grid
//! point; nothing interpolates silently.  The only interpolation entry point
//! is the explicit [`GridFunction::interp`].

use crate::error::{Error, Result};
use std::io::Write;

/// Relative tolerance used when matching a coordinate to a grid point.
const ALIGN_TOL: f64 = 1e-9;

/// A uniform grid of `steps + 1` points over `[left, right]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    left: f64,
    right: f64,
    steps: usize,
}

impl Grid {
    /// Create a grid; `left < right` and `steps >= 1` are required.
    pub fn new(left: f64, right: f64, steps: usize) -> Result<Self> {
        if !(left.is_finite() && right.is_finite()) || left >= right {
            return Err(Error::domain(format!(
                "grid interval [{left}, {right}] is invalid"
            )));
        }
        if steps == 0 {
            return Err(Error::domain("grid needs at least one step"));
        }
        Ok(Grid { left, right, steps })
    }

    pub fn left(&self) -> f64 {
        self.left
    }

    pub fn right(&self) -> f64 {
        self.right
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Number of grid points (`steps + 1`).
    pub fn points(&self) -> usize {
        self.steps + 1
    }

    /// Grid spacing.
    pub fn h(&self) -> f64 {
        (self.right - self.left) / self.steps as f64
    }

    /// Coordinate of grid point `i`.  Endpoints are reproduced exactly.
    pub fn x(&self, i: usize) -> f64 {
        debug_assert!(i <= self.steps);
        if i == 0 {
            self.left
        } else if i == self.steps {
            self.right
        } else {
            self.left + (self.right - self.left) * (i as f64 / self.steps as f64)
        }
    }

    /// Index of the grid point at coordinate `x`, or an alignment error if
    /// `x` is not a grid point (relative tolerance `1e-9`).
    pub fn index_of(&self, x: f64) -> Result<usize> {
        let t = (x - self.left) / (self.right - self.left) * self.steps as f64;
        let i = t.round();
        if i < 0.0 || i > self.steps as f64 {
            return Err(Error::alignment(format!(
                "coordinate {x} outside grid [{}, {}]",
                self.left, self.right
            )));
        }
        let i = i as usize;
        let scale = self.left.abs().max(self.right.abs()).max(1.0);
        if (x - self.x(i)).abs() > ALIGN_TOL * scale {
            return Err(Error::alignment(format!(
                "coordinate {x} is not a grid point (nearest: {})",
                self.x(i)
            )));
        }
        Ok(i)
    }

    /// Index of the grid point nearest to `x`, ties resolved toward −∞.
    /// `x` must lie inside the interval.
    pub fn snap(&self, x: f64) -> Result<usize> {
        if x < self.left - ALIGN_TOL || x > self.right + ALIGN_TOL {
            return Err(Error::alignment(format!(
                "coordinate {x} outside grid [{}, {}]",
                self.left, self.right
            )));
        }
        let t = ((x - self.left) / (self.right - self.left) * self.steps as f64)
            .clamp(0.0, self.steps as f64);
        let lo = t.floor();
        // Ties (x exactly halfway) round down, i.e. toward −∞.
        let i = if t - lo > 0.5 { lo + 1.0 } else { lo };
        Ok(i as usize)
    }

    /// The sub-grid spanning grid indices `i0..=i1`.
    pub fn subgrid(&self, i0: usize, i1: usize) -> Result<Grid> {
        if i0 >= i1 || i1 > self.steps {
            return Err(Error::domain(format!(
                "invalid subgrid indices {i0}..{i1}"
            )));
        }
        Grid::new(self.x(i0), self.x(i1), i1 - i0)
    }

    /// Iterator over all grid coordinates.
    pub fn coords(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.points()).map(move |i| self.x(i))
    }
}

/// A real-valued function sampled on a [`Grid`].
///
/// Values must be finite; the reward functions of the LPP module, which
/// carry −∞, use their own dedicated type.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    /// Wrap a value vector; the length must match the grid and all entries
    /// must be finite.
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.points() {
            return Err(Error::domain(format!(
                "value vector length {} does not match grid points {}",
                values.len(),
                grid.points()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::domain(format!("non-finite value {v} in grid function")));
        }
        Ok(GridFunction { grid, values })
    }

    /// Evaluate a closure at every grid point.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.coords().map(f).collect();
        GridFunction::new(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    /// Value at coordinate `x`, which must be a grid point.
    pub fn eval(&self, x: f64) -> Result<f64> {
        Ok(self.values[self.grid.index_of(x)?])
    }

    /// Piecewise-linear interpolation at an arbitrary coordinate inside the
    /// interval.  This is the only interpolating accessor.
    pub fn interp(&self, x: f64) -> Result<f64> {
        let g = &self.grid;
        if x < g.left() - ALIGN_TOL * g.h().abs() || x > g.right() + ALIGN_TOL * g.h().abs() {
            return Err(Error::domain(format!(
                "interpolation point {x} outside [{}, {}]",
                g.left(),
                g.right()
            )));
        }
        let t = ((x - g.left()) / (g.right() - g.left()) * g.steps() as f64)
            .clamp(0.0, g.steps() as f64);
        let i = (t.floor() as usize).min(g.steps() - 1);
        let frac = t - i as f64;
        Ok(self.values[i] + frac * (self.values[i + 1] - self.values[i]))
    }

    /// Leftmost maximizing grid index.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for i in 1..self.values.len() {
            if self.values[i] > self.values[best] {
                best = i;
            }
        }
        best
    }

    /// Minimum over grid points.
    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Maximum over grid points.
    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Restriction to grid indices `i0..=i1`.
    pub fn restrict(&self, i0: usize, i1: usize) -> Result<GridFunction> {
        let grid = self.grid.subgrid(i0, i1)?;
        GridFunction::new(grid, self.values[i0..=i1].to_vec())
    }

    /// Serialize as CSV with columns `x,value` and 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x,value")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(w, "{:.16e},{:.16e}", self.grid.x(i), v)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_basics() {
        let g = Grid::new(-1.0, 1.0, 4).unwrap();
        assert_eq!(g.points(), 5);
        assert_eq!(g.h(), 0.5);
        assert_eq!(g.x(0), -1.0);
        assert_eq!(g.x(4), 1.0);
        assert_eq!(g.x(2), 0.0);
        assert_eq!(g.index_of(0.5).unwrap(), 3);
        assert!(g.index_of(0.3).is_err());
        assert!(Grid::new(1.0, 1.0, 4).is_err());
        assert!(Grid::new(0.0, 1.0, 0).is_err());
    }

    #[test]
    fn snap_ties_toward_minus_infinity() {
        let g = Grid::new(0.0, 1.0, 4).unwrap();
        // 0.125 is exactly halfway between points 0 and 1.
        assert_eq!(g.snap(0.125).unwrap(), 0);
        assert_eq!(g.snap(0.13).unwrap(), 1);
        assert_eq!(g.snap(1.0).unwrap(), 4);
        assert!(g.snap(1.5).is_err());
    }

    #[test]
    fn grid_function_interp_and_argmax() {
        let g = Grid::new(0.0, 1.0, 2).unwrap();
        let f = GridFunction::new(g, vec![0.0, 2.0, 1.0]).unwrap();
        assert_eq!(f.interp(0.25).unwrap(), 1.0);
        assert_eq!(f.interp(0.75).unwrap(), 1.5);
        assert_eq!(f.argmax(), 1);
        assert!(GridFunction::new(g, vec![0.0, f64::NAN, 1.0]).is_err());
        assert!(GridFunction::new(g, vec![0.0, 1.0]).is_err());
    }
}
