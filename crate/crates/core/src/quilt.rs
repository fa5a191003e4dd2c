//! The patchwork quilt: fabric pieces vertically shifted to agree at the
//! stitch points, plus the increment-moment regularity experiment for
//! f-rewarded weight profiles.

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::lpp::{f_rewarded_weight, Environment, RewardFunction};
use crate::stats::linear_fit;
use crate::stream::Stream;
use std::io::Write;

/// A quilt: fabrics `F_1, ..., F_{m+1}` on a common grid, stitches
/// `s_1 < ... < s_m` in the interior, and shifts `v_i` (with `v_1 = 0`)
/// chosen so that `Quilt(x) = F_i(x) + v_i` on `[s_{i−1}, s_i]` is
/// continuous at every stitch.
#[derive(Debug, Clone)]
pub struct Quilt {
    fabrics: Vec<GridFunction>,
    stitches: Vec<f64>,
    shifts: Vec<f64>,
    function: GridFunction,
    /// 0-based fabric index per grid point.
    piece_index: Vec<usize>,
}

impl Quilt {
    pub fn fabrics(&self) -> &[GridFunction] {
        &self.fabrics
    }

    pub fn stitches(&self) -> &[f64] {
        &self.stitches
    }

    /// The continuity-determined vertical shifts; `shifts[0] = 0`.
    pub fn shifts(&self) -> &[f64] {
        &self.shifts
    }

    /// The evaluated quilt as a grid function.
    pub fn function(&self) -> &GridFunction {
        &self.function
    }

    /// 0-based index of the fabric used at grid point `i`.
    pub fn piece_at(&self, i: usize) -> usize {
        self.piece_index[i]
    }

    /// Largest mismatch `|F_i(s) + v_i − F_{i+1}(s) − v_{i+1}|` over the
    /// stitch points; zero up to floating error by construction.
    pub fn continuity_residual(&self) -> f64 {
        let grid = self.function.grid();
        self.stitches
            .iter()
            .enumerate()
            .map(|(i, &s)| {
                let g = grid.index_of(s).expect("stitches are grid-aligned");
                let left = self.fabrics[i].value(g) + self.shifts[i];
                let right = self.fabrics[i + 1].value(g) + self.shifts[i + 1];
                (left - right).abs()
            })
            .fold(0.0, f64::max)
    }

    /// CSV rows `x,piece,value` (piece is 1-based).
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x,piece,value")?;
        let grid = self.function.grid();
        for i in 0..grid.points() {
            writeln!(
                w,
                "{:.16e},{},{:.16e}",
                grid.x(i),
                self.piece_index[i] + 1,
                self.function.value(i)
            )?;
        }
        Ok(())
    }
}

/// Build a quilt from `m + 1` fabrics and `m` strictly increasing,
/// grid-aligned interior stitches.  Shifts are computed left to right;
/// with no stitches the output is the first fabric, bitwise.
pub fn build_quilt(fabrics: &[GridFunction], stitches: &[f64]) -> Result<Quilt> {
    if fabrics.is_empty() {
        return Err(Error::domain("at least one fabric required"));
    }
    if fabrics.len() != stitches.len() + 1 {
        return Err(Error::domain(format!(
            "{} fabrics need {} stitches, got {}",
            fabrics.len(),
            fabrics.len() - 1,
            stitches.len()
        )));
    }
    let grid = *fabrics[0].grid();
    if fabrics.iter().any(|f| f.grid() != &grid) {
        return Err(Error::domain("all fabrics must share one grid"));
    }
    if stitches.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain(
            "stitches must be strictly increasing (deduplicate before building)",
        ));
    }
    let stitch_idx: Vec<usize> = stitches
        .iter()
        .map(|&s| {
            let g = grid.index_of(s)?;
            if g == 0 || g == grid.steps() {
                return Err(Error::domain(format!("stitch {s} must be interior")));
            }
            Ok(g)
        })
        .collect::<Result<Vec<_>>>()?;

    // Shifts by continuity at each stitch, left to right.
    let mut shifts = vec![0.0f64];
    for (i, &g) in stitch_idx.iter().enumerate() {
        let v = shifts[i] + fabrics[i].value(g) - fabrics[i + 1].value(g);
        shifts.push(v);
    }

    // Evaluate: piece i covers [s_{i−1}, s_i]; stitch points belong to the
    // left piece (the right piece agrees there by construction).
    let mut values = Vec::with_capacity(grid.points());
    let mut piece_index = Vec::with_capacity(grid.points());
    let mut piece = 0usize;
    for g in 0..grid.points() {
        while piece < stitch_idx.len() && g > stitch_idx[piece] {
            piece += 1;
        }
        piece_index.push(piece);
        // Shift 0 on the first piece keeps the no-stitch case bitwise.
        let v = if piece == 0 {
            fabrics[0].value(g)
        } else {
            fabrics[piece].value(g) + shifts[piece]
        };
        values.push(v);
    }
    let function = GridFunction::new(grid, values)?;
    Ok(Quilt {
        fabrics: fabrics.to_vec(),
        stitches: stitches.to_vec(),
        shifts,
        function,
        piece_index,
    })
}

/// One row of the increment-moment table.
#[derive(Debug, Clone, Copy)]
pub struct IncrementMomentRow {
    pub y: f64,
    pub moment: f64,
    pub stderr: f64,
}

/// Report of the increment-moment experiment: the per-`y` moment table and
/// the log-log fit of `E|W^f(y) − W^f(0)|^{2−η}` against `|y|`.
#[derive(Debug, Clone)]
pub struct IncrementMomentReport {
    pub eta: f64,
    pub rows: Vec<IncrementMomentRow>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Brownian-regularity target exponent `1 − η/2`.
    pub target_slope: f64,
}

/// Estimate `E|W^f(y) − W^f(0)|^{2−η}` over fresh environments for each
/// `y` in `ys`, and fit the log-log slope.  The slope target is `1 − η/2`;
/// it is reported, never asserted.
pub fn increment_moment_experiment(
    n: usize,
    grid: Grid,
    f: &RewardFunction,
    eta: f64,
    ys: &[f64],
    draws: usize,
    stream: &mut Stream,
) -> Result<IncrementMomentReport> {
    if !(eta > 0.0 && eta < 0.5) {
        return Err(Error::domain(format!("η = {eta} outside (0, 1/2)")));
    }
    if ys.is_empty() || ys.iter().any(|&y| y <= 0.0) {
        return Err(Error::domain("y-grid must be positive"));
    }
    if draws == 0 {
        return Err(Error::domain("draws must be positive"));
    }
    let power = 2.0 - eta;
    let mut sums = vec![0.0f64; ys.len()];
    let mut sq_sums = vec![0.0f64; ys.len()];
    for _ in 0..draws {
        let env = Environment::sample(n + 1, grid, stream)?;
        let w0 = f_rewarded_weight(&env, n, f, 0.0)?;
        for (j, &y) in ys.iter().enumerate() {
            let wy = f_rewarded_weight(&env, n, f, y)?;
            let v = (wy - w0).abs().powf(power);
            sums[j] += v;
            sq_sums[j] += v * v;
        }
    }
    let rows: Vec<IncrementMomentRow> = ys
        .iter()
        .enumerate()
        .map(|(j, &y)| {
            let mean = sums[j] / draws as f64;
            let var = (sq_sums[j] / draws as f64 - mean * mean).max(0.0);
            IncrementMomentRow { y, moment: mean, stderr: (var / draws as f64).sqrt() }
        })
        .collect();
    let lx: Vec<f64> = rows.iter().map(|r| r.y.ln()).collect();
    let ly: Vec<f64> = rows
        .iter()
        .map(|r| {
            if r.moment > 0.0 {
                Ok(r.moment.ln())
            } else {
                Err(Error::degenerate("zero moment estimate; increase draws"))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let (slope, intercept, r_squared) = linear_fit(&lx, &ly)?;
    Ok(IncrementMomentReport {
        eta,
        rows,
        slope,
        intercept,
        r_squared,
        target_slope: 1.0 - eta / 2.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::derive_stream;
    use rand::Rng;

    fn random_fabrics(count: usize, grid: Grid, seed: u64) -> Vec<GridFunction> {
        let mut s = derive_stream(seed, "quilt-fabrics", 0);
        (0..count)
            .map(|_| {
                let vals: Vec<f64> = (0..grid.points()).map(|_| s.gen::<f64>() * 4.0 - 2.0).collect();
                GridFunction::new(grid, vals).unwrap()
            })
            .collect()
    }

    #[test]
    fn trivial_stitch_set_is_identity_bitwise() {
        let grid = Grid::new(0.0, 1.0, 32).unwrap();
        let fabric = random_fabrics(1, grid, 7).remove(0);
        let q = build_quilt(&[fabric.clone()], &[]).unwrap();
        for i in 0..grid.points() {
            assert_eq!(q.function().value(i).to_bits(), fabric.value(i).to_bits());
        }
        assert_eq!(q.shifts(), &[0.0]);
    }

    #[test]
    fn identical_fabrics_get_zero_shift() {
        let grid = Grid::new(0.0, 1.0, 32).unwrap();
        let fabric = random_fabrics(1, grid, 8).remove(0);
        let q = build_quilt(&[fabric.clone(), fabric.clone()], &[0.5]).unwrap();
        assert_eq!(q.shifts(), &[0.0, 0.0]);
        for i in 0..grid.points() {
            assert_eq!(q.function().value(i), fabric.value(i));
        }
    }

    #[test]
    fn random_quilt_continuity_and_piecewise_identity() {
        let grid = Grid::new(0.0, 1.0, 64).unwrap();
        let fabrics = random_fabrics(4, grid, 9);
        let stitches = [0.25, 0.5, 0.75];
        let q = build_quilt(&fabrics, &stitches).unwrap();
        assert!(q.continuity_residual() < 1e-9);
        // Recompute shifts directly and verify the piecewise identity.
        let mut v = vec![0.0f64; 4];
        for (i, &s) in stitches.iter().enumerate() {
            let g = grid.index_of(s).unwrap();
            v[i + 1] = v[i] + fabrics[i].value(g) - fabrics[i + 1].value(g);
        }
        for g in 0..grid.points() {
            let piece = q.piece_at(g);
            let expect = fabrics[piece].value(g) + v[piece];
            assert!((q.function().value(g) - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn vertical_shift_invariance() {
        let grid = Grid::new(0.0, 1.0, 64).unwrap();
        let fabrics = random_fabrics(3, grid, 10);
        let stitches = [0.25, 0.625];
        let q = build_quilt(&fabrics, &stitches).unwrap();
        let c = 1.7;
        let mut lifted = fabrics.clone();
        lifted[0] = GridFunction::new(
            grid,
            fabrics[0].values().iter().map(|&v| v + c).collect(),
        )
        .unwrap();
        let q2 = build_quilt(&lifted, &stitches).unwrap();
        for g in 0..grid.points() {
            assert!((q2.function().value(g) - q.function().value(g) - c).abs() < 1e-12);
        }
    }

    #[test]
    fn constructor_rejections() {
        let grid = Grid::new(0.0, 1.0, 16).unwrap();
        let fabrics = random_fabrics(2, grid, 11);
        // Count mismatch.
        assert!(build_quilt(&fabrics, &[]).is_err());
        // Duplicate stitch.
        let three = random_fabrics(3, grid, 12);
        assert!(build_quilt(&three, &[0.5, 0.5]).is_err());
        // Misaligned stitch.
        assert!(build_quilt(&fabrics, &[0.51234]).is_err());
        // Boundary stitch.
        assert!(build_quilt(&fabrics, &[0.0]).is_err());
    }

    #[test]
    fn increment_moment_zero_at_zero_and_report_shape() {
        let mut s = derive_stream(13, "quilt-moment", 0);
        // n = 8 makes 2n^{2/3} = 8, so y ∈ {1/16, 1/8} lands exactly on a
        // grid of spacing 1/16 (endpoint alignment is strict by contract).
        let n = 8usize;
        let grid = Grid::new(0.0, 10.0, 160).unwrap();
        let fg = Grid::new(0.0, 1.0, 8).unwrap();
        let f = RewardFunction::narrow_wedge(fg, (1.0, 1.0, 1.0)).unwrap();
        let report =
            increment_moment_experiment(n, grid, &f, 0.4, &[0.0625, 0.125], 30, &mut s).unwrap();
        assert_eq!(report.rows.len(), 2);
        assert!((report.target_slope - 0.8).abs() < 1e-15);
        for row in &report.rows {
            assert!(row.moment > 0.0);
            assert!(row.stderr >= 0.0);
        }
        // Moments grow with y on average (soft ordering at this scale).
        assert!(report.slope.is_finite());
        // η out of range rejected.
        assert!(increment_moment_experiment(n, grid, &f, 0.6, &[0.1], 5, &mut s).is_err());
    }
}
