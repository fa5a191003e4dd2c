//! Ordered line ensembles, Dyson Brownian motion, GUE sampling, the scaled
//! ensemble, regularity diagnostics, the parabolic shift, and the
//! Brownian-Gibbs resampling operator.

use crate::bridge::sample_bridge;
use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::lpp::parabola_q;
use crate::stats::wilson_ci;
use crate::stream::Stream;
use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use std::io::Write;

/// An ordered family of curves on a shared grid, labelled `1..=k` top-down,
/// with the strict ordering invariant `L(i, x) > L(i+1, x)` at every grid
/// point.
#[derive(Debug, Clone, PartialEq)]
pub struct LineEnsemble {
    grid: Grid,
    curves: Vec<Vec<f64>>,
}

impl LineEnsemble {
    /// Construct and validate the strict ordering at every grid point.
    pub fn new(grid: Grid, curves: Vec<Vec<f64>>) -> Result<Self> {
        if curves.is_empty() {
            return Err(Error::domain("ensemble needs at least one curve"));
        }
        for c in &curves {
            if c.len() != grid.points() {
                return Err(Error::domain("curve length does not match grid"));
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(Error::domain("non-finite curve value"));
            }
        }
        for pair in curves.windows(2) {
            for (i, (a, b)) in pair[0].iter().zip(&pair[1]).enumerate() {
                if !(a > b) {
                    return Err(Error::degenerate(format!(
                        "ordering violated at grid index {i}: {a} ≤ {b}"
                    )));
                }
            }
        }
        Ok(LineEnsemble { grid, curves })
    }

    /// Construct without the ordering check.  Reserved for reconstructed
    /// candidates whose ordering is exactly what a later test decides.
    pub fn new_unchecked(grid: Grid, curves: Vec<Vec<f64>>) -> Result<Self> {
        if curves.is_empty() {
            return Err(Error::domain("ensemble needs at least one curve"));
        }
        for c in &curves {
            if c.len() != grid.points() {
                return Err(Error::domain("curve length does not match grid"));
            }
        }
        Ok(LineEnsemble { grid, curves })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn count(&self) -> usize {
        self.curves.len()
    }

    /// Curve `i` (1-based, top-down).
    pub fn curve(&self, i: usize) -> &[f64] {
        &self.curves[i - 1]
    }

    /// Curve `i` as a [`GridFunction`].
    pub fn curve_fn(&self, i: usize) -> GridFunction {
        GridFunction::new(self.grid, self.curves[i - 1].clone()).expect("validated curve")
    }

    /// True iff the strict ordering holds at every grid point.
    pub fn is_strictly_ordered(&self) -> bool {
        self.curves
            .windows(2)
            .all(|p| p[0].iter().zip(&p[1]).all(|(a, b)| a > b))
    }

    /// CSV dump: columns `curve,x,value`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "curve,x,value")?;
        for (k, c) in self.curves.iter().enumerate() {
            for (i, v) in c.iter().enumerate() {
                writeln!(w, "{},{:.16e},{:.16e}", k + 1, self.grid.x(i), v)?;
            }
        }
        Ok(())
    }
}

/// Eigenvalues (descending) of an `n×n` Hermitian matrix `H = X + iY`
/// given its real part `X` (symmetric) and imaginary part `Y`
/// (antisymmetric), via the real-symmetric `2n×2n` embedding
/// `[[X, −Y], [Y, X]]` whose spectrum is that of `H` doubled.
fn hermitian_eigenvalues(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = x.nrows();
    let mut m = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = x[(i, j)];
            m[(n + i, n + j)] = x[(i, j)];
            m[(i, n + j)] = -y[(i, j)];
            m[(n + i, j)] = y[(i, j)];
        }
    }
    let eig = SymmetricEigen::new(m);
    let mut vals: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::numerical("eigensolver produced non-finite values"));
    }
    vals.sort_by(|a, b| b.partial_cmp(a).expect("finite eigenvalues"));
    // Each eigenvalue of H appears twice; keep every second entry.
    Ok(vals.into_iter().step_by(2).collect())
}

/// Sample the eigenvalue paths of an `n×n` Hermitian Brownian motion on
/// `grid` (diagonal entries: real BMs of variance `t`; off-diagonal: complex
/// with real and imaginary parts of variance `t/2`), eigendecomposed at
/// every grid time and sorted descending.
///
/// The grid must start at a positive time (at `t = 0` all eigenvalues
/// coincide and the ordering invariant cannot hold).  An exact eigenvalue
/// collision at some grid time — a null event — is reported as a degenerate
/// input so the caller can resample.
pub fn dyson_bm(n: usize, grid: Grid, stream: &mut Stream) -> Result<LineEnsemble> {
    if n == 0 {
        return Err(Error::domain("dyson_bm needs n ≥ 1"));
    }
    if grid.left() <= 0.0 {
        return Err(Error::domain(
            "dyson_bm grid must start at a positive time (coincident spectrum at t = 0)",
        ));
    }
    let mut x = DMatrix::<f64>::zeros(n, n);
    let mut y = DMatrix::<f64>::zeros(n, n);
    let mut curves: Vec<Vec<f64>> = vec![Vec::with_capacity(grid.points()); n];
    let mut prev_t = 0.0;
    for gi in 0..grid.points() {
        let t = grid.x(gi);
        let dt = t - prev_t;
        prev_t = t;
        accumulate_hermitian_increment(&mut x, &mut y, dt, stream);
        if n == 1 {
            curves[0].push(x[(0, 0)]);
            continue;
        }
        let vals = hermitian_eigenvalues(&x, &y)?;
        for (c, v) in curves.iter_mut().zip(&vals) {
            c.push(*v);
        }
    }
    LineEnsemble::new(grid, curves).map_err(|e| match e {
        Error::Degenerate(msg) => {
            Error::degenerate(format!("eigenvalue collision, resample: {msg}"))
        }
        other => other,
    })
}

/// Add a Hermitian Brownian increment of time span `dt` to `(X, Y)`.
fn accumulate_hermitian_increment(
    x: &mut DMatrix<f64>,
    y: &mut DMatrix<f64>,
    dt: f64,
    stream: &mut Stream,
) {
    let n = x.nrows();
    let sd = dt.sqrt();
    let sh = (dt / 2.0).sqrt();
    for i in 0..n {
        let z: f64 = stream.sample(StandardNormal);
        x[(i, i)] += sd * z;
        for j in (i + 1)..n {
            let a: f64 = stream.sample(StandardNormal);
            let b: f64 = stream.sample(StandardNormal);
            x[(i, j)] += sh * a;
            x[(j, i)] = x[(i, j)];
            y[(i, j)] += sh * b;
            y[(j, i)] = -y[(i, j)];
        }
    }
}

/// Directly sample the largest eigenvalue of an `n×n` GUE matrix at time
/// `t` (entry variances as in [`dyson_bm`] at that time).
pub fn sample_gue_top(n: usize, t: f64, stream: &mut Stream) -> Result<f64> {
    if n == 0 || !(t > 0.0) {
        return Err(Error::domain("sample_gue_top needs n ≥ 1 and t > 0"));
    }
    let mut x = DMatrix::<f64>::zeros(n, n);
    let mut y = DMatrix::<f64>::zeros(n, n);
    accumulate_hermitian_increment(&mut x, &mut y, t, stream);
    if n == 1 {
        return Ok(x[(0, 0)]);
    }
    Ok(hermitian_eigenvalues(&x, &y)?[0])
}

/// Apply the KPZ scaling map curve-wise:
/// `L(i, y) = 2^{−1/2} n^{−1/3} (λ_i(n + 2n^{2/3} y) − 2n − 2n^{2/3} y)`.
///
/// The input ensemble must live on the time grid
/// `[n + 2n^{2/3} y_left, n + 2n^{2/3} y_right]`; the output lives on the
/// corresponding `y` grid.
pub fn scaled_ensemble(dyson: &LineEnsemble, n: usize) -> Result<LineEnsemble> {
    if n == 0 {
        return Err(Error::domain("scaled_ensemble needs n ≥ 1"));
    }
    let nf = n as f64;
    let n23 = nf.powf(2.0 / 3.0);
    let tg = dyson.grid();
    let y_left = (tg.left() - nf) / (2.0 * n23);
    let y_right = (tg.right() - nf) / (2.0 * n23);
    let grid = Grid::new(y_left, y_right, tg.steps())?;
    let scale = std::f64::consts::FRAC_1_SQRT_2 * nf.powf(-1.0 / 3.0);
    let curves = (1..=dyson.count())
        .map(|i| {
            (0..grid.points())
                .map(|g| {
                    let y = grid.x(g);
                    scale * (dyson.curve(i)[g] - 2.0 * nf - 2.0 * n23 * y)
                })
                .collect()
        })
        .collect();
    LineEnsemble::new(grid, curves)
}

/// Parabolic shift of an ensemble by `y_n`:
/// `L^shift(i, x) = L(i, x + y_n) + Q(x + y_n) − Q(x)` on the translated
/// grid, with `Q(x) = 2^{−1/2} x²`.
pub fn parabolic_shift(ensemble: &LineEnsemble, y_n: f64) -> Result<LineEnsemble> {
    let g = ensemble.grid();
    let grid = Grid::new(g.left() - y_n, g.right() - y_n, g.steps())?;
    let curves = (1..=ensemble.count())
        .map(|i| {
            (0..grid.points())
                .map(|gi| {
                    let x = grid.x(gi);
                    // Group the parabola difference so a zero shift is the
                    // bitwise identity.
                    ensemble.curve(i)[gi] + (parabola_q(x + y_n) - parabola_q(x))
                })
                .collect()
        })
        .collect();
    LineEnsemble::new(grid, curves)
}

/// Which tail of the one-point distribution a [`TailEntry`] refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailSide {
    Lower,
    Upper,
}

/// One cell of a [`RegularityReport`].
#[derive(Debug, Clone)]
pub struct TailEntry {
    pub z: f64,
    pub s: f64,
    pub side: TailSide,
    pub rate: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Empirical check of the regular-ensemble one-point tail envelopes.
#[derive(Debug, Clone)]
pub struct RegularityReport {
    pub entries: Vec<TailEntry>,
    pub all_pass: bool,
}

/// Compare empirical tails of `L(1, z) + 2^{−1/2} z²` against the envelope
/// `C exp(−c s^{3/2})` for `s ∈ {1, 2, 3}`, per the regular-ensemble
/// definition (valid for `s ∈ [1, ∞)` and `|z| ≤ c n^{1/9}`).
///
/// `draws[d][zi]` is the top-curve value at `zs[zi]` in draw `d`.
pub fn regular_tail_check(
    draws: &[Vec<f64>],
    zs: &[f64],
    n: usize,
    c: f64,
    big_c: f64,
    ss: &[f64],
) -> Result<RegularityReport> {
    if draws.is_empty() || zs.is_empty() {
        return Err(Error::domain("regular_tail_check needs draws and z points"));
    }
    if !(c > 0.0 && big_c > 0.0) {
        return Err(Error::domain("(c, C) must be positive"));
    }
    let zcap = c * (n as f64).powf(1.0 / 9.0);
    for &z in zs {
        if z.abs() > zcap {
            return Err(Error::domain(format!(
                "|z| = {} exceeds c n^{{1/9}} = {zcap}",
                z.abs()
            )));
        }
    }
    for &s in ss {
        if s < 1.0 {
            return Err(Error::domain(format!(
                "tail parameter s = {s} below 1; the definition applies on [1, ∞)"
            )));
        }
    }
    let trials = draws.len() as u64;
    let mut entries = Vec::new();
    for (zi, &z) in zs.iter().enumerate() {
        for &s in ss {
            let bound = (big_c * (-c * s.powf(1.5)).exp()).min(1.0);
            for side in [TailSide::Lower, TailSide::Upper] {
                let hits = draws
                    .iter()
                    .filter(|d| {
                        let v = d[zi] + parabola_q(z);
                        match side {
                            TailSide::Lower => v <= -s,
                            TailSide::Upper => v >= s,
                        }
                    })
                    .count() as u64;
                let (lo, hi) = wilson_ci(hits, trials, 0.95)?;
                let rate = hits as f64 / trials as f64;
                entries.push(TailEntry {
                    z,
                    s,
                    side,
                    rate,
                    wilson_low: lo,
                    wilson_high: hi,
                    bound,
                    // One-sided: the envelope must not be exceeded beyond
                    // the sampling uncertainty of the estimate.
                    pass: lo <= bound,
                });
            }
        }
    }
    let all_pass = entries.iter().all(|e| e.pass);
    Ok(RegularityReport { entries, all_pass })
}

/// Resampling telemetry for [`gibbs_resample`].
#[derive(Debug, Clone, Copy)]
pub struct ResampleStats {
    pub attempts: u64,
}

/// Brownian-Gibbs resampling of the top `k` curves on the window `(a, b)`:
/// replace them by independent bridges between the retained endpoint
/// values, rejection-sampled until they are mutually ordered and stay
/// strictly above `L(k+1, ·)` at every window grid point.
///
/// When `k` equals the curve count there is no lower curve and only mutual
/// avoidance is enforced (for `k = 1` this accepts immediately).
pub fn gibbs_resample(
    ensemble: &LineEnsemble,
    k: usize,
    window: (f64, f64),
    stream: &mut Stream,
    max_attempts: u64,
) -> Result<(LineEnsemble, ResampleStats)> {
    if k == 0 || k > ensemble.count() {
        return Err(Error::domain(format!(
            "k = {k} outside 1..={}",
            ensemble.count()
        )));
    }
    let grid = ensemble.grid();
    let ia = grid.index_of(window.0)?;
    let ib = grid.index_of(window.1)?;
    if ia >= ib || ia == 0 || ib == grid.steps() {
        return Err(Error::domain("window must be a nonempty interior interval"));
    }
    let sub = grid.subgrid(ia, ib)?;
    let lower: Option<&[f64]> = if k < ensemble.count() {
        Some(&ensemble.curve(k + 1)[ia..=ib])
    } else {
        None
    };
    let mut attempts = 0u64;
    while attempts < max_attempts {
        attempts += 1;
        let proposals: Vec<GridFunction> = (1..=k)
            .map(|i| sample_bridge(sub, ensemble.curve(i)[ia], ensemble.curve(i)[ib], stream))
            .collect();
        let mut ok = true;
        'check: for j in 0..=(ib - ia) {
            for i in 0..k {
                let v = proposals[i].value(j);
                if i + 1 < k && !(v > proposals[i + 1].value(j)) {
                    ok = false;
                    break 'check;
                }
                if i + 1 == k {
                    if let Some(low) = lower {
                        if !(v > low[j]) {
                            ok = false;
                            break 'check;
                        }
                    }
                }
            }
        }
        if ok {
            let mut curves = ensemble.curves.clone();
            for (i, p) in proposals.iter().enumerate() {
                curves[i][ia..=ib].copy_from_slice(p.values());
            }
            let out = LineEnsemble::new(*grid, curves)?;
            return Ok((out, ResampleStats { attempts }));
        }
    }
    Err(Error::RejectionBudget { attempts })
}
