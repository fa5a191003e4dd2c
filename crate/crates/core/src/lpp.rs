//! Brownian last passage percolation: the environment of independent
//! Brownian lines, the exact grid dynamic program for the maximal energy,
//! scaled weights, reward functions, polymer maximizers and the parabolic
//! shift.
//!
//! # Line indexing
//!
//! Environments carry `lines` rows labelled `1..=lines`, each a rate-one
//! Brownian motion on `[0, t_max]` started at 0.  A route from `(x, i)` to
//! `(y, j)` with `i ≤ j`, `x ≤ y` chooses non-decreasing jump times
//! `x = z_i ≤ z_{i+1} ≤ … ≤ z_{j+1} = y` and collects the energy
//! `Σ_{k=i}^{j} (B(k, z_{k+1}) − B(k, z_k))`.  The scaled weight ψ_n routes
//! over `n + 1` lines; the convention "reference lines 0..n ↔ internal rows
//! 1..n+1" is applied in exactly one place, [`scaled_weight`], via
//! [`SCALED_ROW_OFFSET`].

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::stream::Stream;
use rand::Rng;
use rand_distr::StandardNormal;
use std::io::{Read, Write};

/// The reference convention labels the routed lines of ψ_n by `0..n`; internal environment
/// rows are `1..n+1`.  This offset is the only place the relabeling occurs.
pub const SCALED_ROW_OFFSET: usize = 1;

/// The LPP medium: `lines` independent rate-one Brownian rows on a shared
/// grid over `[0, t_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    grid: Grid,
    rows: Vec<Vec<f64>>,
}

impl Environment {
    /// Sample a fresh environment.  Rows are drawn sequentially from the
    /// stream (disjoint stretches of one stream are independent).
    pub fn sample(lines: usize, grid: Grid, stream: &mut Stream) -> Result<Self> {
        if lines == 0 {
            return Err(Error::domain("environment needs at least one line"));
        }
        if grid.left() != 0.0 {
            return Err(Error::domain("environment grid must start at 0"));
        }
        let sqrt_h = grid.h().sqrt();
        let rows = (0..lines)
            .map(|_| {
                let mut row = Vec::with_capacity(grid.points());
                let mut v = 0.0;
                row.push(0.0);
                for _ in 0..grid.steps() {
                    let z: f64 = stream.sample(StandardNormal);
                    v += sqrt_h * z;
                    row.push(v);
                }
                row
            })
            .collect();
        Ok(Environment { grid, rows })
    }

    /// Build from explicit rows (tests, deserialization).  Each row must
    /// start at 0 and match the grid length.
    pub fn from_rows(grid: Grid, rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::domain("environment needs at least one line"));
        }
        for row in &rows {
            if row.len() != grid.points() {
                return Err(Error::domain("row length does not match grid"));
            }
            if row[0] != 0.0 {
                return Err(Error::domain("environment rows must start at 0"));
            }
        }
        Ok(Environment { grid, rows })
    }

    pub fn lines(&self) -> usize {
        self.rows.len()
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Row `k` (1-based line label).
    pub fn row(&self, k: usize) -> &[f64] {
        &self.rows[k - 1]
    }

    /// Serialize to the binary container: magic, lines, t_max, steps,
    /// seed key, then row-major little-endian f64 payload.
    pub fn write_binary<W: Write>(&self, mut w: W, seed_key: u64) -> Result<()> {
        w.write_all(b"BLPPENV1")?;
        w.write_all(&(self.lines() as u64).to_le_bytes())?;
        w.write_all(&self.grid.right().to_le_bytes())?;
        w.write_all(&(self.grid.steps() as u64).to_le_bytes())?;
        w.write_all(&seed_key.to_le_bytes())?;
        for row in &self.rows {
            for v in row {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }

    /// Deserialize from the binary container; returns the environment and
    /// the recorded seed key.
    pub fn read_binary<R: Read>(mut r: R) -> Result<(Self, u64)> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != b"BLPPENV1" {
            return Err(Error::numerical("bad environment magic"));
        }
        let mut buf8 = [0u8; 8];
        r.read_exact(&mut buf8)?;
        let lines = u64::from_le_bytes(buf8) as usize;
        r.read_exact(&mut buf8)?;
        let t_max = f64::from_le_bytes(buf8);
        r.read_exact(&mut buf8)?;
        let steps = u64::from_le_bytes(buf8) as usize;
        r.read_exact(&mut buf8)?;
        let seed_key = u64::from_le_bytes(buf8);
        let grid = Grid::new(0.0, t_max, steps)?;
        let mut rows = Vec::with_capacity(lines);
        for _ in 0..lines {
            let mut row = Vec::with_capacity(steps + 1);
            for _ in 0..=steps {
                r.read_exact(&mut buf8)?;
                row.push(f64::from_le_bytes(buf8));
            }
            rows.push(row);
        }
        Ok((Environment { grid, rows }, seed_key))
    }

    /// CSV dump (small instances): columns `line,x,value`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "line,x,value")?;
        for (k, row) in self.rows.iter().enumerate() {
            for (i, v) in row.iter().enumerate() {
                writeln!(w, "{},{:.16e},{:.16e}", k + 1, self.grid.x(i), v)?;
            }
        }
        Ok(())
    }
}

/// Maximal energy `M[(x,i) → (y,j)]` over jump times restricted to grid
/// points, by dynamic programming in `O((j−i+1)·points)`.
///
/// The result is exact for the grid-restricted problem and a lower bound on
/// the continuum maximum, converging as the spacing shrinks.
pub fn last_passage(
    env: &Environment,
    start: (f64, usize),
    end: (f64, usize),
) -> Result<f64> {
    let (x, i) = start;
    let (y, j) = end;
    if i == 0 || j == 0 || j > env.lines() {
        return Err(Error::domain(format!(
            "line labels ({i}, {j}) outside 1..={}",
            env.lines()
        )));
    }
    if i > j || x > y {
        return Err(Error::domain(format!(
            "route from ({x}, {i}) to ({y}, {j}) is not admissible"
        )));
    }
    let gx = env.grid.index_of(x)?;
    let gy = env.grid.index_of(y)?;
    // dp[g] = max energy of a route from (x, i) to (grid point g, line k).
    let row_i = env.row(i);
    let mut dp: Vec<f64> = (gx..=gy).map(|g| row_i[g] - row_i[gx]).collect();
    for k in (i + 1)..=j {
        let row = env.row(k);
        // dp_k(g) = row[g] + max_{g' ≤ g} (dp_{k−1}(g') − row[g']).
        let mut best = f64::NEG_INFINITY;
        for (off, g) in (gx..=gy).enumerate() {
            let cand = dp[off] - row[g];
            if cand > best {
                best = cand;
            }
            dp[off] = row[g] + best;
        }
    }
    Ok(dp[gy - gx])
}

/// The KPZ-scaled weight
/// `ψ_n(x → y) = 2^{−1/2} n^{−1/3} (M − 2n − 2n^{2/3}(y − x))`,
/// where `M` routes from `(2n^{2/3}x, line 0)` to `(n + 2n^{2/3}y, line n)`
/// in the reference labels — rows `1..n+1` internally.
pub fn scaled_weight(env: &Environment, n: usize, x: f64, y: f64) -> Result<f64> {
    if env.lines() < n + 1 {
        return Err(Error::domain(format!(
            "ψ_n needs {} rows, environment has {}",
            n + 1,
            env.lines()
        )));
    }
    let nf = n as f64;
    let n23 = nf.powf(2.0 / 3.0);
    let u = 2.0 * n23 * x;
    let t = nf + 2.0 * n23 * y;
    if u < 0.0 {
        return Err(Error::domain(format!("start time {u} negative")));
    }
    let m = last_passage(env, (u, SCALED_ROW_OFFSET), (t, n + SCALED_ROW_OFFSET))?;
    Ok(std::f64::consts::FRAC_1_SQRT_2 * nf.powf(-1.0 / 3.0) * (m - 2.0 * nf - 2.0 * n23 * (y - x)))
}

/// A starting reward `f` from the class `I_Ψ̄`: grid-sampled values which
/// may be −∞, with growth and non-triviality constraints
/// `f(x) ≤ Ψ₁(1+|x|)`, `sup_{[−Ψ₂,Ψ₂]} f > −Ψ₃`.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardFunction {
    grid: Grid,
    values: Vec<f64>,
    psi: (f64, f64, f64),
}

impl RewardFunction {
    pub fn new(grid: Grid, values: Vec<f64>, psi: (f64, f64, f64)) -> Result<Self> {
        let (p1, p2, p3) = psi;
        if !(p1 > 0.0 && p2 > 0.0 && p3 > 0.0) {
            return Err(Error::domain("Ψ̄ components must be positive"));
        }
        if values.len() != grid.points() {
            return Err(Error::domain("reward length does not match grid"));
        }
        let mut any_finite = false;
        let mut window_sup = f64::NEG_INFINITY;
        for (i, &v) in values.iter().enumerate() {
            if v.is_nan() || v == f64::INFINITY {
                return Err(Error::domain("reward values must be finite or −∞"));
            }
            let x = grid.x(i);
            if v > p1 * (1.0 + x.abs()) {
                return Err(Error::domain(format!(
                    "reward at x={x} exceeds the growth envelope Ψ₁(1+|x|)"
                )));
            }
            if v > f64::NEG_INFINITY {
                any_finite = true;
            }
            if x.abs() <= p2 && v > window_sup {
                window_sup = v;
            }
        }
        if !any_finite {
            return Err(Error::domain("reward is identically −∞"));
        }
        if !(window_sup > -p3) {
            return Err(Error::domain(format!(
                "sup of the reward over [−Ψ₂,Ψ₂] is {window_sup}, not above −Ψ₃"
            )));
        }
        Ok(RewardFunction { grid, values, psi })
    }

    /// The narrow wedge: reward 0 at `x = 0`, −∞ elsewhere, on the given
    /// grid (which must contain 0).
    pub fn narrow_wedge(grid: Grid, psi: (f64, f64, f64)) -> Result<Self> {
        let zero = grid.index_of(0.0)?;
        let mut values = vec![f64::NEG_INFINITY; grid.points()];
        values[zero] = 0.0;
        RewardFunction::new(grid, values, psi)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Supported points `(x, f(x))` with finite value.
    pub fn support(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_finite())
            .map(|(i, &v)| (self.grid.x(i), v))
    }
}

/// Candidate starting points for the f-rewarded weight: the supported grid
/// points of `f` with `x ≤ 2^{−1} n^{1/3} + y` whose unscaled coordinate
/// `2 n^{2/3} x` lies on the environment grid.
fn rewarded_candidates(
    env: &Environment,
    n: usize,
    f: &RewardFunction,
    y: f64,
) -> Result<Vec<(f64, f64)>> {
    let cap = 0.5 * (n as f64).powf(1.0 / 3.0) + y;
    let n23 = (n as f64).powf(2.0 / 3.0);
    let mut out = Vec::new();
    for (x, fx) in f.support() {
        if x > cap {
            continue;
        }
        let u = 2.0 * n23 * x;
        if u < 0.0 {
            continue;
        }
        // Grid alignment is mandatory: silent snapping would change the law.
        env.grid.index_of(u)?;
        out.push((x, fx));
    }
    if out.is_empty() {
        return Err(Error::domain(
            "reward has no admissible support on the environment grid",
        ));
    }
    Ok(out)
}

/// The f-rewarded line-to-point polymer weight
/// `W^f_n(y) = sup { ψ_n(x → y) + f(x) : x ≤ 2^{−1} n^{1/3} + y }`,
/// the sup running over supported grid points of `f`.
pub fn f_rewarded_weight(env: &Environment, n: usize, f: &RewardFunction, y: f64) -> Result<f64> {
    let mut best = f64::NEG_INFINITY;
    for (x, fx) in rewarded_candidates(env, n, f, y)? {
        let v = scaled_weight(env, n, x, y)? + fx;
        if v > best {
            best = v;
        }
    }
    Ok(best)
}

/// Leftmost maximizer `x*_y` of `x ↦ ψ_n(x → y) + f(x)` over the admissible
/// supported grid points.
pub fn polymer_argmax(env: &Environment, n: usize, f: &RewardFunction, y: f64) -> Result<f64> {
    let mut best = f64::NEG_INFINITY;
    let mut best_x = f64::NAN;
    for (x, fx) in rewarded_candidates(env, n, f, y)? {
        let v = scaled_weight(env, n, x, y)? + fx;
        // Strict improvement keeps the leftmost maximizer on ties.
        if v > best {
            best = v;
            best_x = x;
        }
    }
    Ok(best_x)
}

/// The parabola `Q(x) = 2^{−1/2} x²`.
pub fn parabola_q(x: f64) -> f64 {
    std::f64::consts::FRAC_1_SQRT_2 * x * x
}

/// The tangent line `l(x, y) = −2^{−1/2} y² − 2^{1/2} y (x − y)` of `−Q`
/// at `y`.
pub fn parabola_l(x: f64, y: f64) -> f64 {
    -std::f64::consts::FRAC_1_SQRT_2 * y * y - std::f64::consts::SQRT_2 * y * (x - y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::derive_stream;

    fn toy_env(rows: Vec<Vec<f64>>, t_max: f64) -> Environment {
        let steps = rows[0].len() - 1;
        Environment::from_rows(Grid::new(0.0, t_max, steps).unwrap(), rows).unwrap()
    }

    #[test]
    fn single_line_is_increment() {
        let env = toy_env(vec![vec![0.0, 1.0, -0.5, 2.0]], 3.0);
        let m = last_passage(&env, (0.0, 1), (3.0, 1)).unwrap();
        assert_eq!(m, 2.0);
        let m = last_passage(&env, (1.0, 1), (2.0, 1)).unwrap();
        assert_eq!(m, -1.5);
    }

    #[test]
    fn zero_environment_zero_energy() {
        let env = toy_env(vec![vec![0.0; 5], vec![0.0; 5], vec![0.0; 5]], 4.0);
        assert_eq!(last_passage(&env, (0.0, 1), (4.0, 3)).unwrap(), 0.0);
        assert_eq!(last_passage(&env, (1.0, 2), (3.0, 3)).unwrap(), 0.0);
    }

    #[test]
    fn two_lines_match_split_enumeration() {
        let rows = vec![vec![0.0, 0.7, -0.2, 1.1], vec![0.0, -0.3, 0.9, 0.4]];
        let env = toy_env(rows.clone(), 3.0);
        let dp = last_passage(&env, (0.0, 1), (3.0, 2)).unwrap();
        // Brute force over the 4 admissible split points.
        let brute = (0..=3)
            .map(|s| (rows[0][s] - rows[0][0]) + (rows[1][3] - rows[1][s]))
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(dp, brute);
    }

    #[test]
    fn dp_matches_exhaustive_three_lines() {
        // Exhaustive enumeration over all monotone jump pairs on a random
        // instance.
        let mut s = derive_stream(11, "lpp-exhaustive", 0);
        let grid = Grid::new(0.0, 1.0, 6).unwrap();
        let env = Environment::sample(3, grid, &mut s).unwrap();
        let dp = last_passage(&env, (0.0, 1), (1.0, 3)).unwrap();
        let mut brute = f64::NEG_INFINITY;
        for z1 in 0..=6 {
            for z2 in z1..=6 {
                let e = (env.row(1)[z1] - env.row(1)[0])
                    + (env.row(2)[z2] - env.row(2)[z1])
                    + (env.row(3)[6] - env.row(3)[z2]);
                brute = brute.max(e);
            }
        }
        assert!((dp - brute).abs() < 1e-12);
    }

    #[test]
    fn invalid_routes_rejected() {
        let env = toy_env(vec![vec![0.0; 3], vec![0.0; 3]], 2.0);
        assert!(last_passage(&env, (0.0, 2), (2.0, 1)).is_err());
        assert!(last_passage(&env, (2.0, 1), (0.0, 2)).is_err());
        assert!(last_passage(&env, (0.0, 1), (2.0, 3)).is_err());
        assert!(last_passage(&env, (0.5, 1), (2.0, 2)).is_err()); // misaligned
    }

    #[test]
    fn monotone_in_increments() {
        // Raising one increment never lowers M.
        let mut s = derive_stream(12, "lpp-monotone", 0);
        let grid = Grid::new(0.0, 1.0, 8).unwrap();
        let env = Environment::sample(3, grid, &mut s).unwrap();
        let base = last_passage(&env, (0.0, 1), (1.0, 3)).unwrap();
        for k in 1..=3usize {
            for g in 1..8usize {
                let mut rows: Vec<Vec<f64>> = (1..=3).map(|r| env.row(r).to_vec()).collect();
                // Raise the increment into grid point g of row k.
                for v in rows[k - 1][g..].iter_mut() {
                    *v += 0.5;
                }
                let env2 = Environment::from_rows(grid, rows).unwrap();
                let m2 = last_passage(&env2, (0.0, 1), (1.0, 3)).unwrap();
                assert!(m2 >= base - 1e-12);
            }
        }
    }

    #[test]
    fn superadditivity_on_grid() {
        let mut s = derive_stream(13, "lpp-superadd", 0);
        let grid = Grid::new(0.0, 1.0, 8).unwrap();
        let env = Environment::sample(4, grid, &mut s).unwrap();
        let whole = last_passage(&env, (0.0, 1), (1.0, 4)).unwrap();
        for mid_line in 1..=4usize {
            for g in 0..=8usize {
                let z = grid.x(g);
                let a = last_passage(&env, (0.0, 1), (z, mid_line)).unwrap();
                let b = last_passage(&env, (z, mid_line), (1.0, 4)).unwrap();
                assert!(whole >= a + b - 1e-12);
            }
        }
    }

    #[test]
    fn refinement_never_decreases() {
        // Doubling the grid enlarges the feasible set.
        for rep in 0..20 {
            let coarse_grid = Grid::new(0.0, 1.0, 8).unwrap();
            let fine_grid = Grid::new(0.0, 1.0, 16).unwrap();
            let mut stream = derive_stream(14, "lpp-refine-env", rep);
            let fine = Environment::sample(2, fine_grid, &mut stream).unwrap();
            // Coarse environment = restriction of the fine one.
            let rows: Vec<Vec<f64>> = (1..=2)
                .map(|k| (0..=8).map(|i| fine.row(k)[2 * i]).collect())
                .collect();
            let coarse = Environment::from_rows(coarse_grid, rows).unwrap();
            let mc = last_passage(&coarse, (0.0, 1), (1.0, 2)).unwrap();
            let mf = last_passage(&fine, (0.0, 1), (1.0, 2)).unwrap();
            assert!(mf >= mc - 1e-12);
        }
    }

    #[test]
    fn scaled_weight_formula() {
        // n = 1, x = y = 0: ψ = 2^{−1/2}(M − 2) with M over rows 1..2.
        let mut s = derive_stream(15, "scaled-weight", 0);
        let grid = Grid::new(0.0, 1.0, 32).unwrap();
        let env = Environment::sample(2, grid, &mut s).unwrap();
        let m = last_passage(&env, (0.0, 1), (1.0, 2)).unwrap();
        let psi = scaled_weight(&env, 1, 0.0, 0.0).unwrap();
        assert_eq!(psi, std::f64::consts::FRAC_1_SQRT_2 * (m - 2.0));
    }

    #[test]
    fn narrow_wedge_is_scaled_weight_bitwise() {
        let mut s = derive_stream(16, "narrow-wedge", 0);
        // n = 8 keeps the scaled coordinates on the grid: 2n^{2/3} = 8, so
        // t = 8 + 8y lands on multiples of the 1/16 spacing.
        let n = 8;
        let grid = Grid::new(0.0, 10.0, 160).unwrap();
        let env = Environment::sample(n + 1, grid, &mut s).unwrap();
        let fgrid = Grid::new(-1.0, 1.0, 4).unwrap();
        let f = RewardFunction::narrow_wedge(fgrid, (1.0, 1.0, 1.0)).unwrap();
        for &y in &[0.0, 0.25] {
            let w = f_rewarded_weight(&env, n, &f, y).unwrap();
            let psi = scaled_weight(&env, n, 0.0, y).unwrap();
            assert_eq!(w.to_bits(), psi.to_bits());
            assert_eq!(polymer_argmax(&env, n, &f, y).unwrap(), 0.0);
        }
    }

    #[test]
    fn shifted_singleton_reward() {
        let mut s = derive_stream(17, "singleton-reward", 0);
        let n = 2;
        let grid = Grid::new(0.0, 4.0, 128).unwrap();
        let env = Environment::sample(n + 1, grid, &mut s).unwrap();
        // Support {x₀} with reward c; x₀ chosen so 2 n^{2/3} x₀ is on the grid.
        let n23 = (n as f64).powf(2.0 / 3.0);
        let x0 = 0.03125 * 8.0 / (2.0 * n23); // u = 0.25, 8 grid steps
        let fgrid = Grid::new(-x0, x0, 2).unwrap();
        let c = 0.7;
        let vals = vec![f64::NEG_INFINITY, f64::NEG_INFINITY, c];
        let f = RewardFunction::new(fgrid, vals, (10.0, 1.0, 10.0)).unwrap();
        let w = f_rewarded_weight(&env, n, &f, 0.0).unwrap();
        let expect = scaled_weight(&env, n, x0, 0.0).unwrap() + c;
        assert_eq!(w.to_bits(), expect.to_bits());
    }

    #[test]
    fn three_point_reward_matches_enumeration() {
        let mut s = derive_stream(18, "three-point", 0);
        let n = 2;
        let grid = Grid::new(0.0, 4.0, 128).unwrap();
        let env = Environment::sample(n + 1, grid, &mut s).unwrap();
        let n23 = (n as f64).powf(2.0 / 3.0);
        let h_env = 4.0 / 128.0;
        // Three supported x values at unscaled grid multiples.
        let step = 4.0 * h_env / (2.0 * n23);
        let fgrid = Grid::new(0.0, 2.0 * step, 2).unwrap();
        let f = RewardFunction::new(fgrid, vec![0.1, -0.2, 0.05], (10.0, 1.0, 10.0)).unwrap();
        let w = f_rewarded_weight(&env, n, &f, 0.0).unwrap();
        let brute = [
            scaled_weight(&env, n, 0.0, 0.0).unwrap() + 0.1,
            scaled_weight(&env, n, step, 0.0).unwrap() - 0.2,
            scaled_weight(&env, n, 2.0 * step, 0.0).unwrap() + 0.05,
        ]
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(w, brute);
    }

    #[test]
    fn reward_class_validation() {
        let grid = Grid::new(-1.0, 1.0, 4).unwrap();
        // Growth violation: f(x) = Ψ₁(1+|x|) + 1 somewhere.
        let psi = (1.0, 1.0, 1.0);
        let bad: Vec<f64> = grid.coords().map(|x| 1.0 * (1.0 + x.abs()) + 1.0).collect();
        assert!(RewardFunction::new(grid, bad, psi).is_err());
        // Identically −∞ rejected.
        assert!(RewardFunction::new(grid, vec![f64::NEG_INFINITY; 5], psi).is_err());
        // Window sup below −Ψ₃ rejected.
        assert!(RewardFunction::new(grid, vec![-5.0; 5], psi).is_err());
        // A valid one.
        assert!(RewardFunction::new(grid, vec![0.0; 5], psi).is_ok());
    }

    #[test]
    fn parabola_identities() {
        assert!((parabola_q(1.0) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        // Q(x) = −l(x,y) + Q(x−y) for random (x, y).
        let mut s = derive_stream(19, "parabola", 0);
        for _ in 0..100 {
            let x = 10.0 * (s.gen::<f64>() - 0.5);
            let y = 10.0 * (s.gen::<f64>() - 0.5);
            let lhs = parabola_q(x);
            let rhs = -parabola_l(x, y) + parabola_q(x - y);
            assert!((lhs - rhs).abs() < 1e-12 * (1.0 + lhs.abs()));
        }
    }

    #[test]
    fn binary_roundtrip() {
        let mut s = derive_stream(20, "env-roundtrip", 0);
        let grid = Grid::new(0.0, 2.0, 16).unwrap();
        let env = Environment::sample(3, grid, &mut s).unwrap();
        let mut buf = Vec::new();
        env.write_binary(&mut buf, 0xDEAD).unwrap();
        let (back, key) = Environment::read_binary(&buf[..]).unwrap();
        assert_eq!(key, 0xDEAD);
        assert_eq!(env, back);
    }
}
