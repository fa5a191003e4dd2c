//! The jump ensemble: least concave majorant, the slope points (𝔩, 𝔯),
//! the pole set, the Tent map, Corner vectors, the favourable event, the
//! candidate sampler, the Pass test, reconstruction, and the observables
//! and costs of the density framework.
//!
//! # Geometry
//!
//! The construction lives on `[−2T, 2T]` for `T = D_k (log ε^{−1})^{1/3}`.
//! The lower curve `L(k+1, ·)` is coarsened on `[−T, T]` by its least
//! concave majorant `𝔠₊`; `𝔩` and `𝔯` are the abscissas where the majorant
//! slope first drops below `4T` resp. last exceeds `−4T`; the pole set `P`
//! is a maximal `d_ip`-separated subset of the majorant's extreme points in
//! `[𝔩, 𝔯]` containing both ends and covering every extreme point within
//! `d_ip`; the Tent map linearly interpolates the lower curve over `P`.
//! A candidate is a `k`-tuple of Brownian bridges over `[−2T, 2T]` between
//! the retained boundary values, conditioned on the Corner side-interval
//! test at `𝔩` and `𝔯` and on clearing the lower curve at every pole; the
//! jump ensemble `J` is its restriction to `[𝔩, 𝔯]`.

use crate::bridge::sample_bridge;
use crate::ensemble::LineEnsemble;
use crate::error::{Error, Result};
use crate::gauss::{gauss_sf, GaussParams};
use crate::grid::{Grid, GridFunction};
use crate::lpp::parabola_q;
use crate::stream::Stream;
use rand::Rng;
use rand_distr::StandardNormal;

/// A continuous piecewise-linear function given by its breakpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl PiecewiseLinear {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return Err(Error::domain("piecewise-linear needs ≥ 2 breakpoints"));
        }
        if xs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::domain("breakpoints must be strictly increasing"));
        }
        Ok(PiecewiseLinear { xs, ys })
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    /// Segment slopes, one per breakpoint pair.
    pub fn slopes(&self) -> Vec<f64> {
        self.xs
            .windows(2)
            .zip(self.ys.windows(2))
            .map(|(x, y)| (y[1] - y[0]) / (x[1] - x[0]))
            .collect()
    }

    /// Evaluate at `x ∈ [xs.first(), xs.last()]`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if x < self.xs[0] - 1e-9 || x > *self.xs.last().unwrap() + 1e-9 {
            return Err(Error::domain(format!(
                "evaluation point {x} outside [{}, {}]",
                self.xs[0],
                self.xs.last().unwrap()
            )));
        }
        let x = x.clamp(self.xs[0], *self.xs.last().unwrap());
        // Binary search for the segment.
        let mut lo = 0usize;
        let mut hi = self.xs.len() - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.xs[mid] <= x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t = (x - self.xs[lo]) / (self.xs[hi] - self.xs[lo]);
        Ok(self.ys[lo] + t * (self.ys[hi] - self.ys[lo]))
    }

    /// True iff segment slopes are non-increasing left to right.
    pub fn is_concave(&self) -> bool {
        self.slopes().windows(2).all(|w| w[1] <= w[0] + 1e-9)
    }
}

/// Parameters of the jump-ensemble construction.  `T`, `d_ip`, `R`, `D_k`,
/// `c_k` and `Ē_k` are computed from `(ε, k, d)` and the regularity
/// constants `(c, C)`; they are never free.
#[derive(Debug, Clone, Copy)]
pub struct JumpParams {
    pub epsilon: f64,
    pub k: usize,
    pub d: f64,
    /// `T = D_k (log ε^{−1})^{1/3}`.
    pub t: f64,
    /// Inter-pole distance `d_ip = 5d`.
    pub d_ip: f64,
    /// Good-region scale `R = 6√d`.
    pub r: f64,
    /// The constant `D_k` (with `D_1 = D_2`).
    pub big_d_k: f64,
    /// The constant `c_k`.
    pub c_k: f64,
    /// The constant `Ē_k` (the natural candidate for the `C_k` of the
    /// ε upper bound; both are exposed).
    pub e_k: f64,
    /// The undetermined scalar `const` of the ε bounds (config, default 1).
    pub const_scalar: f64,
}

/// `c_k = ((3 − 2^{3/2})^{3/2} 2^{−1} 5^{−3/2})^{k−1} c_1` with
/// `c_1 = 2^{−5/2} c ∧ 1/8`.
pub fn little_c_k(k: usize, c: f64) -> f64 {
    let c1 = (c * 2f64.powf(-2.5)).min(0.125);
    let base = (3.0 - 2f64.powf(1.5)).powf(1.5) * 0.5 * 5f64.powf(-1.5);
    base.powi(k as i32 - 1) * c1
}

/// `D_k = max{k^{1/3} c_k^{−1/3} (2^{−9/2} − 2^{−5})^{−1/3}, 36(k²−1), 2}`
/// for `k ≥ 2`, and `D_1 = D_2`.
pub fn big_d_k(k: usize, c: f64) -> f64 {
    let k_eff = k.max(2);
    let ck = little_c_k(k_eff, c);
    let t1 = (k_eff as f64).powf(1.0 / 3.0)
        * ck.powf(-1.0 / 3.0)
        * (2f64.powf(-4.5) - 2f64.powf(-5.0)).powf(-1.0 / 3.0);
    let t2 = 36.0 * ((k_eff * k_eff - 1) as f64);
    t1.max(t2).max(2.0)
}

/// `Ē_k = max{10·20^{k−1} 5^{k/2} (10/(3−2^{3/2}))^{k(k−1)/2} C, e^{c/2}}`.
pub fn former_e_k(k: usize, c: f64, big_c: f64) -> f64 {
    let a = 10.0
        * 20f64.powi(k as i32 - 1)
        * 5f64.powf(k as f64 / 2.0)
        * (10.0 / (3.0 - 2f64.powf(1.5))).powf((k * (k - 1)) as f64 / 2.0)
        * big_c;
    a.max((c / 2.0).exp())
}

impl JumpParams {
    /// Build parameters from `(ε, k, d)` and regularity constants `(c, C)`.
    ///
    /// Structural requirements (`ε ∈ (0,1)`, `k ≥ 1`, `d ≥ 1`) are hard
    /// errors.  The ε window of the main theorem is far below any scale a
    /// sampler can exercise; violations are reported by
    /// [`JumpParams::epsilon_window_violation`] rather than refused here.
    pub fn new(
        epsilon: f64,
        k: usize,
        d: f64,
        c: f64,
        big_c: f64,
        const_scalar: f64,
    ) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::domain(format!("ε = {epsilon} outside (0,1)")));
        }
        if k == 0 {
            return Err(Error::domain("k must be ≥ 1"));
        }
        if !(d >= 1.0) {
            return Err(Error::domain(format!("d = {d} must be ≥ 1")));
        }
        if !(c > 0.0 && big_c > 0.0 && const_scalar > 0.0) {
            return Err(Error::domain("(c, C, const) must be positive"));
        }
        let dk = big_d_k(k, c);
        let t = dk * (1.0 / epsilon).ln().powf(1.0 / 3.0);
        Ok(JumpParams {
            epsilon,
            k,
            d,
            t,
            d_ip: 5.0 * d,
            r: 6.0 * d.sqrt(),
            big_d_k: dk,
            c_k: little_c_k(k, c),
            e_k: former_e_k(k, c, big_c),
            const_scalar,
        })
    }

    /// The ε upper bound of the main theorem,
    /// `ε < e^{−1} ∧ 17^{−1/k} C_k^{−1/k} const^{−1} ∧ exp(−24⁶ d⁶ / D_k³)`,
    /// with `C_k` identified with `Ē_k`.  Returns the first violated clause,
    /// or `None` when the window is satisfied.
    pub fn epsilon_window_violation(&self) -> Option<String> {
        let e = self.epsilon;
        if e >= (-1.0f64).exp() {
            return Some(format!("ε = {e} is not below e^−1"));
        }
        let kf = self.k as f64;
        let cap = 17f64.powf(-1.0 / kf) * self.e_k.powf(-1.0 / kf) / self.const_scalar;
        if e >= cap {
            return Some(format!(
                "ε = {e} is not below 17^(−1/k) C_k^(−1/k) const^−1 = {cap}"
            ));
        }
        let cap = (-(24f64.powi(6)) * self.d.powi(6) / self.big_d_k.powi(3)).exp();
        if e >= cap {
            return Some(format!(
                "ε = {e} is not below exp(−24⁶ d⁶ / D_k³) = {cap:e}"
            ));
        }
        None
    }
}

/// Least concave majorant of `curve` over the grid window `[a, b]`
/// (grid-aligned): the upper convex hull of the sampled points.
/// Returns the majorant and its extreme-point abscissas (the hull
/// vertices, which coincide with the breakpoints).
pub fn concave_majorant(
    curve: &GridFunction,
    window: (f64, f64),
) -> Result<(PiecewiseLinear, Vec<f64>)> {
    let grid = curve.grid();
    let ia = grid.index_of(window.0)?;
    let ib = grid.index_of(window.1)?;
    if ia >= ib {
        return Err(Error::domain("empty majorant window"));
    }
    // Andrew's monotone chain, upper hull only.
    let mut hull: Vec<usize> = Vec::new();
    for i in ia..=ib {
        while hull.len() >= 2 {
            let p = hull[hull.len() - 2];
            let q = hull[hull.len() - 1];
            // Remove q if it lies on or below the chord p→i.
            let cross = (grid.x(q) - grid.x(p)) * (curve.value(i) - curve.value(p))
                - (curve.value(q) - curve.value(p)) * (grid.x(i) - grid.x(p));
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    let xs: Vec<f64> = hull.iter().map(|&i| grid.x(i)).collect();
    let ys: Vec<f64> = hull.iter().map(|&i| curve.value(i)).collect();
    let pl = PiecewiseLinear::new(xs.clone(), ys)?;
    Ok((pl, xs))
}

/// The slope points of the majorant on `[−T, T]`:
/// `𝔩 = inf{x : 𝔠₊′(x) ≤ 4T}` and `𝔯 = sup{x : 𝔠₊′(x) ≥ −4T}`, resolved
/// exactly at the hull vertices.
pub fn compute_lr(majorant: &PiecewiseLinear, t: f64) -> (f64, f64) {
    let xs = majorant.xs();
    let slopes = majorant.slopes();
    let thr = 4.0 * t;
    // First vertex whose right-hand slope is ≤ 4T.
    let mut l = *xs.last().unwrap();
    for (i, &x) in xs.iter().enumerate() {
        if i == slopes.len() || slopes[i] <= thr {
            l = x;
            break;
        }
    }
    // Last vertex whose left-hand slope is ≥ −4T.
    let mut r = xs[0];
    for (i, &x) in xs.iter().enumerate().rev() {
        if i == 0 || slopes[i - 1] >= -thr {
            r = x;
            break;
        }
    }
    (l, r)
}

/// Does `(x_j − x_i ≥ d_ip)` hold and is every point strictly between
/// indices `i` and `j` within `d_ip` of one of them?
fn pole_step_ok(xs: &[f64], i: usize, j: usize, d_ip: f64) -> bool {
    if xs[j] - xs[i] < d_ip {
        return false;
    }
    xs[i + 1..j]
        .iter()
        .all(|&x| (x - xs[i]).min(xs[j] - x) <= d_ip)
}

/// The pole set: a subset of the extreme points `xext ⊆ [𝔩, 𝔯]` containing
/// `𝔩` and `𝔯`, with pairwise separation ≥ `d_ip`, covering every extreme
/// point within `d_ip`, of maximal cardinality and then lexicographically
/// maximal.
pub fn pole_set(xext: &[f64], l: f64, r: f64, d_ip: f64) -> Result<Vec<f64>> {
    if !(d_ip >= 1.0) || d_ip > r - l {
        return Err(Error::domain(format!(
            "d_ip = {d_ip} outside [1, 𝔯 − 𝔩 = {}]",
            r - l
        )));
    }
    let mut xs: Vec<f64> = xext.iter().cloned().filter(|&x| x >= l && x <= r).collect();
    xs.sort_by(|a, b| a.partial_cmp(b).expect("finite abscissas"));
    xs.dedup();
    if xs.first() != Some(&l) || xs.last() != Some(&r) {
        return Err(Error::domain("xext must contain 𝔩 and 𝔯"));
    }
    let m = xs.len();
    if m == 1 {
        return Ok(xs);
    }
    // Suffix DP: best[i] = maximal pole count of a feasible chain starting
    // with a pole at index i and ending at index m−1; 0 when infeasible.
    let mut best = vec![0usize; m];
    best[m - 1] = 1;
    for i in (0..m - 1).rev() {
        for j in (i + 1)..m {
            if best[j] > 0 && pole_step_ok(&xs, i, j, d_ip) && best[j] + 1 > best[i] {
                best[i] = best[j] + 1;
            }
        }
    }
    if best[0] == 0 {
        return Err(Error::degenerate("no admissible pole set"));
    }
    // Greedy reconstruction: at each step take the largest next abscissa
    // compatible with the maximal total count.  This yields the
    // lexicographically maximal chain among those of maximal cardinality.
    let mut poles = vec![xs[0]];
    let mut i = 0usize;
    while i != m - 1 {
        let need = best[i] - 1;
        let mut next = None;
        for j in ((i + 1)..m).rev() {
            if best[j] == need && pole_step_ok(&xs, i, j, d_ip) {
                next = Some(j);
                break;
            }
        }
        i = next.expect("suffix DP guarantees a successor");
        poles.push(xs[i]);
    }
    Ok(poles)
}

/// The Tent map: linear interpolation of `(p, lower(p))` over the poles.
pub fn tent_map(poles: &[f64], lower_curve: &GridFunction) -> Result<PiecewiseLinear> {
    if poles.len() < 2 {
        return Err(Error::domain("tent map needs at least two poles"));
    }
    let ys = poles
        .iter()
        .map(|&p| lower_curve.eval(p))
        .collect::<Result<Vec<f64>>>()?;
    PiecewiseLinear::new(poles.to_vec(), ys)
}

/// Which side interval a corner vector refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `[−2T, 𝔩]`, translations pivot at `−2T`.
    Left,
    /// `[𝔯, 2T]`, translations pivot at `2T`.
    Right,
}

/// Corner vector of one side interval by the iterative bottom-up
/// translation procedure: curve `k` is affinely translated (pivoting at the
/// outer endpoint) until it just touches the lower curve; its translated
/// inner-endpoint value is `Corner_k`; the procedure repeats upward against
/// the already-translated curve below.
///
/// `curves[i]` is curve `i+1` on the side sub-grid `xs` (outer endpoint
/// first for the left side, i.e. values are listed in grid order); `lower`
/// is `L(k+1, ·)` there.  The output is non-increasing in the curve index.
pub fn corner_vector(
    curves: &[&[f64]],
    lower: &[f64],
    xs: &[f64],
    side: Side,
) -> Result<Vec<f64>> {
    let n = xs.len();
    if n < 2 || lower.len() != n || curves.iter().any(|c| c.len() != n) {
        return Err(Error::domain("corner_vector needs matching side data"));
    }
    // Pivot weight: 0 at the outer endpoint, 1 at the inner endpoint.
    let (outer, inner) = match side {
        Side::Left => (0usize, n - 1),
        Side::Right => (n - 1, 0usize),
    };
    let span = xs[inner] - xs[outer];
    let w: Vec<f64> = xs.iter().map(|&x| (x - xs[outer]) / span).collect();
    let k = curves.len();
    let mut below: Vec<f64> = lower.to_vec();
    let mut corners = vec![0.0; k];
    for i in (0..k).rev() {
        let cur = curves[i];
        // Largest downward translation before touching `below`:
        // δ* = −min_{w>0} (cur − below)/w.
        let mut min_ratio = f64::INFINITY;
        for j in 0..n {
            if w[j] <= 0.0 {
                if cur[j] < below[j] {
                    return Err(Error::degenerate(
                        "side curves are not ordered at the pivot endpoint",
                    ));
                }
                continue;
            }
            let ratio = (cur[j] - below[j]) / w[j];
            if ratio < min_ratio {
                min_ratio = ratio;
            }
        }
        if !min_ratio.is_finite() {
            return Err(Error::degenerate("corner translation unbounded"));
        }
        let delta = -min_ratio;
        corners[i] = cur[inner] + delta;
        // The translated curve becomes the floor for the next curve up.
        below = (0..n).map(|j| cur[j] + delta * w[j]).collect();
    }
    for p in corners.windows(2) {
        debug_assert!(p[0] >= p[1] - 1e-9, "corner vector must be non-increasing");
    }
    Ok(corners)
}

/// Is `v ∈ (0, ∞)^k_>`, i.e. strictly decreasing with positive entries?
pub fn in_ordered_positive_cone(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[0] > w[1]) && v.last().map(|&x| x > 0.0).unwrap_or(false)
}

/// The favourable-event flags `F₁, F₂, F₃` and their conjunction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FavFlags {
    pub f1: bool,
    pub f2: bool,
    pub f3: bool,
    pub fav: bool,
}

/// Derived jump-ensemble state for one `(ensemble, params)` instance.
#[derive(Debug, Clone)]
pub struct JumpData {
    pub params: JumpParams,
    pub majorant: PiecewiseLinear,
    pub xext: Vec<f64>,
    pub l_point: f64,
    pub r_point: f64,
    pub poles: Vec<f64>,
    pub tent: PiecewiseLinear,
    pub corner_l: Vec<f64>,
    pub corner_r: Vec<f64>,
    pub fav: FavFlags,
    // Grid bookkeeping.
    i_l: usize,
    i_r: usize,
}

impl JumpData {
    /// Build the derived state.  The ensemble must have `k + 1` curves on
    /// a grid spanning exactly `[−2T, 2T]` with `±T` grid-aligned.
    pub fn build(ensemble: &LineEnsemble, params: JumpParams) -> Result<JumpData> {
        let k = params.k;
        if ensemble.count() != k + 1 {
            return Err(Error::domain(format!(
                "jump construction needs k+1 = {} curves, got {}",
                k + 1,
                ensemble.count()
            )));
        }
        let grid = ensemble.grid();
        let t = params.t;
        let scale = grid.left().abs().max(grid.right().abs()).max(1.0);
        if (grid.left() + 2.0 * t).abs() > 1e-9 * scale
            || (grid.right() - 2.0 * t).abs() > 1e-9 * scale
        {
            return Err(Error::domain(format!(
                "ensemble grid [{}, {}] must span [−2T, 2T] = [{}, {}]",
                grid.left(),
                grid.right(),
                -2.0 * t,
                2.0 * t
            )));
        }
        let lower = ensemble.curve_fn(k + 1);
        let (majorant, xext_all) = concave_majorant(&lower, (-t, t))?;
        let (l_point, r_point) = compute_lr(&majorant, t);
        let xext: Vec<f64> = xext_all
            .iter()
            .cloned()
            .filter(|&x| x >= l_point && x <= r_point)
            .collect();
        let poles = pole_set(&xext, l_point, r_point, params.d_ip)?;
        let tent = tent_map(&poles, &lower)?;
        let i_l = grid.index_of(l_point)?;
        let i_r = grid.index_of(r_point)?;

        // Corner vectors on both side intervals.
        let side = |i0: usize, i1: usize, side: Side| -> Result<Vec<f64>> {
            let xs: Vec<f64> = (i0..=i1).map(|g| grid.x(g)).collect();
            let rows: Vec<&[f64]> = (1..=k).map(|i| &ensemble.curve(i)[i0..=i1]).collect();
            corner_vector(&rows, &lower.values()[i0..=i1], &xs, side)
        };
        let corner_l = side(0, i_l, Side::Left)?;
        let corner_r = side(i_r, grid.steps(), Side::Right)?;

        // Favourable-event flags.
        let t2 = t * t;
        let (f1_lo, f1_hi) = (
            t2 * (-2.0 * std::f64::consts::SQRT_2 - 1.0),
            t2 * (-2.0 * std::f64::consts::SQRT_2 + 1.0),
        );
        let f1 = (1..=k).all(|i| {
            let a = ensemble.curve(i)[0];
            let b = ensemble.curve(i)[grid.steps()];
            (f1_lo..=f1_hi).contains(&a) && (f1_lo..=f1_hi).contains(&b)
        });
        let i_mt = grid.index_of(-t)?;
        let i_pt = grid.index_of(t)?;
        let f2 = lower.values()[i_mt..=i_pt].iter().all(|v| v.abs() <= t2);
        let f3 = corner_l
            .iter()
            .chain(&corner_r)
            .all(|&v| (-t2..=t2).contains(&v));
        let fav = FavFlags { f1, f2, f3, fav: f1 && f2 && f3 };

        Ok(JumpData {
            params,
            majorant,
            xext,
            l_point,
            r_point,
            poles,
            tent,
            corner_l,
            corner_r,
            fav,
            i_l,
            i_r,
        })
    }

    /// Grid index of `𝔩` in the ensemble grid.
    pub fn l_index(&self) -> usize {
        self.i_l
    }

    /// Grid index of `𝔯` in the ensemble grid.
    pub fn r_index(&self) -> usize {
        self.i_r
    }
}

/// Favourable-event flags for `(ensemble, params)`.
pub fn fav_check(ensemble: &LineEnsemble, params: JumpParams) -> Result<FavFlags> {
    Ok(JumpData::build(ensemble, params)?.fav)
}

/// Does the candidate (curve values on the full `[−2T, 2T]` grid) satisfy
/// the two conditioning events?
///
/// (i) the Corner side-interval test `B̄(x) − Corner ∈ (0,∞)^k_>` at
/// `x ∈ {𝔩, 𝔯}`, and (ii) `B(i, p) ≥ L(k+1, p)` for every pole `p` and
/// every curve `i`.
pub fn candidate_conditions_hold(
    proposals: &[GridFunction],
    data: &JumpData,
    ensemble: &LineEnsemble,
) -> Result<bool> {
    let k = data.params.k;
    let grid = ensemble.grid();
    let lower = ensemble.curve(k + 1);
    for (idx, corner) in [(data.i_l, &data.corner_l), (data.i_r, &data.corner_r)] {
        let diffs: Vec<f64> = (0..k).map(|i| proposals[i].value(idx) - corner[i]).collect();
        if !in_ordered_positive_cone(&diffs) {
            return Ok(false);
        }
    }
    for &p in &data.poles {
        let gp = grid.index_of(p)?;
        for prop in proposals.iter().take(k) {
            if prop.value(gp) < lower[gp] {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Sample the jump-ensemble candidate by rejection: `k` independent
/// bridges between the retained boundary values, resampled until the
/// conditioning events hold; returns the restriction `J` to `[𝔩, 𝔯]` and
/// the attempt count.
///
/// The acceptance probability decays super-exponentially in the parameter
/// scale; budget exhaustion is an expected outcome at realistic parameters
/// and is reported as [`Error::RejectionBudget`] for the caller to record.
pub fn sample_jump_candidate(
    ensemble: &LineEnsemble,
    data: &JumpData,
    stream: &mut Stream,
    max_attempts: u64,
) -> Result<(Vec<GridFunction>, u64)> {
    let k = data.params.k;
    let grid = ensemble.grid();
    let mut attempts = 0u64;
    while attempts < max_attempts {
        attempts += 1;
        let proposals: Vec<GridFunction> = (1..=k)
            .map(|i| {
                sample_bridge(
                    *grid,
                    ensemble.curve(i)[0],
                    ensemble.curve(i)[grid.steps()],
                    stream,
                )
            })
            .collect();
        if candidate_conditions_hold(&proposals, data, ensemble)? {
            let j = proposals
                .iter()
                .map(|p| p.restrict(data.i_l, data.i_r))
                .collect::<Result<Vec<_>>>()?;
            return Ok((j, attempts));
        }
    }
    Err(Error::RejectionBudget { attempts })
}

/// Trapezoid log-sum-exp of `exp(vals)` over a uniform spacing `h`.
fn log_trapezoid_exp(vals: &[f64], h: f64) -> f64 {
    let m = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return f64::NEG_INFINITY;
    }
    let mut s = 0.0;
    for (i, &v) in vals.iter().enumerate() {
        let w = if i == 0 || i == vals.len() - 1 { 0.5 } else { 1.0 };
        s += w * (v - m).exp();
    }
    m + (h * s).ln()
}

/// Exact conditional sampler of the `k = 1` jump candidate at the pole
/// abscissas, by forward filtering / backward message passing on a
/// truncated Gaussian chain.
///
/// The conditioning events constrain the candidate only at the finite set
/// `{𝔩} ∪ P ∪ {𝔯}`; the candidate restricted to these points is a Gaussian
/// Markov chain truncated below by the pole thresholds (and the Corner
/// values at `𝔩`, `𝔯`).  Backward messages are tabulated numerically on
/// adaptive value grids; between poles the path is filled in with ordinary
/// Brownian bridges.  This sidesteps the rejection sampler's
/// super-exponentially small acceptance probability and produces draws of
/// `J` at parameter scales where rejection is hopeless.
pub fn sample_jump_candidate_exact1(
    ensemble: &LineEnsemble,
    data: &JumpData,
    stream: &mut Stream,
) -> Result<GridFunction> {
    if data.params.k != 1 {
        return Err(Error::domain("exact chain sampler requires k = 1"));
    }
    let grid = ensemble.grid();
    let lower = ensemble.curve(2);
    let e_l = ensemble.curve(1)[0];
    let e_r = ensemble.curve(1)[grid.steps()];
    let b = grid.right();

    // Constraint points and thresholds.
    let pts: Vec<f64> = data.poles.clone();
    let mut thr: Vec<f64> = Vec::with_capacity(pts.len());
    for (i, &p) in pts.iter().enumerate() {
        let gp = grid.index_of(p)?;
        let mut t = lower[gp];
        if i == 0 {
            t = t.max(data.corner_l[0]);
        }
        if i == pts.len() - 1 {
            t = t.max(data.corner_r[0]);
        }
        thr.push(t);
    }

    const G: usize = 160;
    let mut widen = 1.0f64;
    'outer: for _attempt in 0..4 {
        // Value grids per constraint point.
        let mut grids: Vec<Vec<f64>> = Vec::with_capacity(pts.len());
        let mut prev_x = grid.left();
        let mut prev_lo = e_l;
        for (i, &p) in pts.iter().enumerate() {
            let dx = p - prev_x;
            let var = dx * (b - p) / (b - prev_x);
            let sd = var.sqrt().max(1e-12);
            // Transition mean from the lowest plausible previous value.
            let mean = prev_lo + (e_r - prev_lo) * dx / (b - prev_x);
            let gap = thr[i] - mean;
            let hi = if gap <= 2.0 * sd {
                mean.max(thr[i]) + (8.0 + 4.0 * widen) * sd
            } else {
                thr[i] + (40.0 * widen * var / gap).min(8.0 * sd).max(1e-8)
            };
            let lo = thr[i];
            let h = (hi - lo) / (G - 1) as f64;
            grids.push((0..G).map(|j| lo + h * j as f64).collect());
            prev_x = p;
            prev_lo = thr[i];
        }

        // Log transition density from (x0, v0) to (x1, v1), conditioned on
        // the pinned right endpoint (b, e_r).
        let log_f = |x0: f64, v0: f64, x1: f64, v1: f64| -> f64 {
            let dx = x1 - x0;
            let var = dx * (b - x1) / (b - x0);
            let mean = v0 + (e_r - v0) * dx / (b - x0);
            -0.5 * (2.0 * std::f64::consts::PI * var).ln() - (v1 - mean) * (v1 - mean) / (2.0 * var)
        };

        // Backward messages: log β_i(v) = log P(later constraints | v_i = v).
        let m = pts.len();
        let mut beta: Vec<Vec<f64>> = vec![vec![0.0; G]; m];
        for i in (0..m - 1).rev() {
            let h = grids[i + 1][1] - grids[i + 1][0];
            for j in 0..G {
                let v = grids[i][j];
                let vals: Vec<f64> = (0..G)
                    .map(|j2| log_f(pts[i], v, pts[i + 1], grids[i + 1][j2]) + beta[i + 1][j2])
                    .collect();
                beta[i][j] = log_trapezoid_exp(&vals, h);
            }
        }

        // Forward sampling through the chain.
        let mut values = Vec::with_capacity(m);
        let mut x0 = grid.left();
        let mut v0 = e_l;
        for i in 0..m {
            let h = grids[i][1] - grids[i][0];
            let logd: Vec<f64> = (0..G)
                .map(|j| log_f(x0, v0, pts[i], grids[i][j]) + beta[i][j])
                .collect();
            let mx = logd.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if !mx.is_finite() {
                widen *= 4.0;
                continue 'outer;
            }
            let dens: Vec<f64> = logd.iter().map(|&v| (v - mx).exp()).collect();
            // Guard: the grid must capture the upper tail.
            let total: f64 = dens.iter().sum();
            let tail: f64 = dens[G - 3..].iter().sum();
            if tail > 1e-3 * total {
                widen *= 4.0;
                continue 'outer;
            }
            // Inverse CDF on the tabulated density.
            let mut cdf = Vec::with_capacity(G);
            let mut acc = 0.0;
            cdf.push(0.0);
            for w in dens.windows(2) {
                acc += 0.5 * h * (w[0] + w[1]);
                cdf.push(acc);
            }
            let u = stream.gen::<f64>() * acc;
            let mut lo = 0usize;
            let mut hi = G - 1;
            while hi - lo > 1 {
                let mid = (lo + hi) / 2;
                if cdf[mid] <= u {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let frac = if cdf[hi] > cdf[lo] {
                (u - cdf[lo]) / (cdf[hi] - cdf[lo])
            } else {
                0.0
            };
            let v = grids[i][lo] + frac * (grids[i][hi] - grids[i][lo]);
            values.push(v.max(thr[i]));
            x0 = pts[i];
            v0 = values[i];
        }

        // Fill between constraint points with Brownian bridges.
        let mut out = vec![0.0; data.i_r - data.i_l + 1];
        for w in 0..m {
            let gi = grid.index_of(pts[w])?;
            out[gi - data.i_l] = values[w];
        }
        for w in 0..m - 1 {
            let g0 = grid.index_of(pts[w])?;
            let g1 = grid.index_of(pts[w + 1])?;
            if g1 - g0 >= 2 {
                let sub = grid.subgrid(g0, g1)?;
                let piece = sample_bridge(sub, values[w], values[w + 1], stream);
                for (off, j) in (g0..=g1).enumerate() {
                    out[j - data.i_l] = piece.value(off);
                }
            }
        }
        let sub = grid.subgrid(data.i_l, data.i_r)?;
        return GridFunction::new(sub, out);
    }
    Err(Error::numerical(
        "chain sampler failed to bracket the conditional mass",
    ))
}

/// Reconstruction `L^{re,X}` of the top `k` curves on `[−2T, 2T]` from a
/// candidate `X` on `[𝔩, 𝔯]` and the retained data: the side pieces are
/// the original curves affinely re-pinned from their value at `𝔩` (resp.
/// `𝔯`) to the candidate's, the middle is the candidate itself.
///
/// The returned ensemble is deliberately unvalidated: whether the curves
/// are ordered is exactly what [`pass_test`] decides.
pub fn reconstruct(
    j: &[GridFunction],
    data: &JumpData,
    ensemble: &LineEnsemble,
) -> Result<LineEnsemble> {
    let k = data.params.k;
    if j.len() != k {
        return Err(Error::domain(format!("expected {k} candidate curves")));
    }
    let grid = ensemble.grid();
    let (il, ir) = (data.i_l, data.i_r);
    let (xl, xr) = (grid.x(il), grid.x(ir));
    let (a, bb) = (grid.left(), grid.right());
    let mut curves = Vec::with_capacity(k);
    for (i, cand) in j.iter().enumerate() {
        if cand.grid().points() != ir - il + 1 {
            return Err(Error::alignment("candidate grid does not match [𝔩, 𝔯]"));
        }
        let orig = ensemble.curve(i + 1);
        let dl = cand.value(0) - orig[il];
        let dr = cand.value(ir - il) - orig[ir];
        let mut vals = Vec::with_capacity(grid.points());
        for g in 0..grid.points() {
            let x = grid.x(g);
            let v = if g < il {
                orig[g] + (x - a) / (xl - a) * dl
            } else if g <= ir {
                cand.value(g - il)
            } else {
                orig[g] + (bb - x) / (bb - xr) * dr
            };
            vals.push(v);
        }
        curves.push(vals);
    }
    LineEnsemble::new_unchecked(*grid, curves)
}

/// The Pass test: after reconstruction, strict internal ordering of the
/// `k` curves and strict domination of the lower curve `L(k+1, ·)` at
/// every grid point of `[−2T, 2T]`.
pub fn pass_test(j: &[GridFunction], data: &JumpData, ensemble: &LineEnsemble) -> Result<bool> {
    let k = data.params.k;
    let rec = reconstruct(j, data, ensemble)?;
    let lower = ensemble.curve(k + 1);
    let points = ensemble.grid().points();
    for g in 0..points {
        for i in 1..k {
            if !(rec.curve(i)[g] > rec.curve(i + 1)[g]) {
                return Ok(false);
            }
        }
        if !(rec.curve(k)[g] > lower[g]) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The observables of the density framework.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observables {
    pub y: f64,
    pub z: f64,
    /// `U = J(p) − Tent(p)`; pole case only.
    pub u: Option<f64>,
    /// `W_η = J(p + 4d + η) − Tent(p + 4d + η)`; pole case only.
    pub w_eta: Option<f64>,
    /// The unique pole in `[−2d, 2d]`, if any.
    pub pole: Option<f64>,
    pub pole_case: bool,
}

/// Compute the observables of the `k`-th candidate curve `J`:
/// in the pole case (a unique pole `p ∈ [−2d, 2d]`)
/// `Y = J(p−4d) − Tent(p−4d)`, `Z = J(p+4d) − Tent(p+4d)`,
/// `U = J(p) − Tent(p)`, `W_η = J(p+4d+η) − Tent(p+4d+η)`; with no pole,
/// `Y = J(−d) − Tent(−d)` and `Z = J(d) − Tent(d)`.
///
/// Evaluation abscissas are snapped to the nearest grid point (ties toward
/// −∞); `J` and `Tent` are evaluated at the same snapped point.
pub fn observables(
    j: &[GridFunction],
    data: &JumpData,
    eta: f64,
) -> Result<Observables> {
    let k = data.params.k;
    let d = data.params.d;
    if !(eta > 0.0 && eta < d) {
        return Err(Error::domain(format!("η = {eta} must lie in (0, d)")));
    }
    let jk = &j[k - 1];
    let in_window: Vec<f64> = data
        .poles
        .iter()
        .cloned()
        .filter(|&p| p.abs() <= 2.0 * d)
        .collect();
    if in_window.len() > 1 {
        return Err(Error::degenerate(
            "more than one pole in [−2d, 2d]; separation must exceed 4d",
        ));
    }
    let probe = |x: f64| -> Result<f64> {
        let gi = jk.grid().snap(x)?;
        let xs = jk.grid().x(gi);
        Ok(jk.value(gi) - data.tent.eval(xs)?)
    };
    if let Some(&p) = in_window.first() {
        Ok(Observables {
            y: probe(p - 4.0 * d)?,
            z: probe(p + 4.0 * d)?,
            u: Some(probe(p)?),
            w_eta: Some(probe(p + 4.0 * d + eta)?),
            pole: Some(p),
            pole_case: true,
        })
    } else {
        Ok(Observables {
            y: probe(-d)?,
            z: probe(d)?,
            u: None,
            w_eta: None,
            pole: None,
            pole_case: false,
        })
    }
}

/// Membership of `(y, z)` in the good region: with a pole,
/// `y, z ∈ (−RT^{3/2}, RT²)` and `|y−z| < 2RT^{3/2}`; without,
/// `y, z ∈ (−RT², RT²)` and `|y−z| < 2RT^{3/2}`.
pub fn in_good_region(y: f64, z: f64, params: &JumpParams, pole_case: bool) -> bool {
    let (r, t) = (params.r, params.t);
    let t32 = t.powf(1.5);
    let t2 = t * t;
    let sep = (y - z).abs() < 2.0 * r * t32;
    if pole_case {
        sep && y > -r * t32 && y < r * t2 && z > -r * t32 && z < r * t2
    } else {
        sep && y.abs() < r * t2 && z.abs() < r * t2
    }
}

/// The vault and slope costs of the density framework:
/// `V = P(N((y+z)/2, 2d) ≥ Tent(p) − (Tent(p−4d)+Tent(p+4d))/2)^{−1}` and
/// `S = d^{1/2} exp((ỹ−z̃)²/16d)` with `ỹ = y + Tent(p−4d)`,
/// `z̃ = z + Tent(p+4d)`.
pub fn vault_slope_costs(
    y: f64,
    z: f64,
    d: f64,
    tent_m4: f64,
    tent_0: f64,
    tent_p4: f64,
) -> Result<(f64, f64)> {
    if !(d >= 1.0) {
        return Err(Error::domain(format!("d = {d} must be ≥ 1")));
    }
    let gp = GaussParams::new((y + z) / 2.0, 2.0 * d)?;
    let threshold = tent_0 - (tent_m4 + tent_p4) / 2.0;
    let p = gauss_sf(gp, threshold);
    if !(p > 0.0) {
        return Err(Error::numerical(
            "vault probability underflowed to zero; V is not representable",
        ));
    }
    let v = 1.0 / p;
    let ty = y + tent_m4;
    let tz = z + tent_p4;
    let s = d.sqrt() * ((ty - tz) * (ty - tz) / (16.0 * d)).exp();
    Ok((v, s))
}

/// `P(U ∈ [0,1] | Y = y, Z = z) = P(X + m ∈ [0,1] | X + m ≥ 0)` for
/// `X ~ N(0, 2d)` and `m = (y+z)/2 + Δ` (with `Δ = (Tent(p−4d) +
/// Tent(p+4d))/2 − Tent(p) ≤ 0` in the application).
pub fn conditional_jump_probability(y: f64, z: f64, delta: f64, d: f64) -> Result<f64> {
    if !(d > 0.0) {
        return Err(Error::domain("d must be positive"));
    }
    let m = (y + z) / 2.0 + delta;
    let sigma = (2.0 * d).sqrt();
    let above = crate::gauss::normal_sf(-m / sigma);
    if above <= 0.0 {
        return Ok(0.0);
    }
    let inside = crate::gauss::normal_cdf((1.0 - m) / sigma) - crate::gauss::normal_cdf(-m / sigma);
    Ok((inside / above).clamp(0.0, 1.0))
}

/// `P(X ≥ s + r | X ≥ s)` for `X ~ N(0, σ²)` — strictly decreasing in `s`
/// for every `r > 0` (the conditional-Gaussian monotonicity lemma).
pub fn conditional_gaussian_tail(sigma2: f64, r: f64, s: f64) -> Result<f64> {
    if !(sigma2 > 0.0) {
        return Err(Error::domain("variance must be positive"));
    }
    let sd = sigma2.sqrt();
    let den = crate::gauss::normal_sf(s / sd);
    if den <= 0.0 {
        return Err(Error::numerical("conditioning event has underflowed mass"));
    }
    Ok(crate::gauss::normal_sf((s + r) / sd) / den)
}

/// The variance `σ²_{−4d} = 4d (g − 4d)/g` of the vault increment when the
/// enclosing pole gap is `g`; lies in `[4d/5, 4d]` whenever `g ≥ 5d`.
pub fn vault_variance(d: f64, pole_gap: f64) -> Result<f64> {
    if !(pole_gap > 4.0 * d) {
        return Err(Error::domain(format!(
            "pole gap {pole_gap} must exceed 4d = {}",
            4.0 * d
        )));
    }
    Ok(4.0 * d * (pole_gap - 4.0 * d) / pole_gap)
}

/// Sample a synthetic ensemble at the favourable scale: `k + 1` curves
/// `−2^{-1/2} x² − (i−1)·gap + W_i(x)` on `[−2T, 2T]`, with independent
/// two-sided rate-one Brownian fluctuations pinned at the origin, retried
/// until strictly ordered.  Its boundary values, lower-curve window and
/// corner vectors land in the favourable windows with overwhelming
/// probability.
pub fn synthetic_fav_ensemble(
    params: &JumpParams,
    steps: usize,
    stream: &mut Stream,
) -> Result<LineEnsemble> {
    synthetic_ensemble(params, steps, true, 8.0 * (4.0 * params.t).sqrt() + 2.0, stream)
}

/// Sample a synthetic ensemble at a mild scale: no parabola, flat curves
/// separated by `gap` with Brownian fluctuations.  Useful for exercising
/// the candidate samplers where acceptance probabilities are macroscopic;
/// the favourable boundary windows deliberately fail.
pub fn synthetic_mild_ensemble(
    params: &JumpParams,
    steps: usize,
    gap: f64,
    stream: &mut Stream,
) -> Result<LineEnsemble> {
    synthetic_ensemble(params, steps, false, gap, stream)
}

fn synthetic_ensemble(
    params: &JumpParams,
    steps: usize,
    parabola: bool,
    gap: f64,
    stream: &mut Stream,
) -> Result<LineEnsemble> {
    if steps % 4 != 0 {
        return Err(Error::domain("steps must be divisible by 4 so ±T are grid points"));
    }
    let t = params.t;
    let grid = Grid::new(-2.0 * t, 2.0 * t, steps)?;
    let half = steps / 2;
    let sqrt_h = grid.h().sqrt();
    for _ in 0..1000 {
        let mut curves = Vec::with_capacity(params.k + 1);
        for i in 0..=params.k {
            let mut vals = vec![0.0; grid.points()];
            // Two-sided Brownian fluctuation pinned at the centre.
            let mut v = 0.0;
            for g in (0..half).rev() {
                let z: f64 = stream.sample(StandardNormal);
                v += sqrt_h * z;
                vals[g] = v;
            }
            v = 0.0;
            for g in (half + 1)..=steps {
                let z: f64 = stream.sample(StandardNormal);
                v += sqrt_h * z;
                vals[g] = v;
            }
            for (g, val) in vals.iter_mut().enumerate() {
                let x = grid.x(g);
                if parabola {
                    *val -= parabola_q(x);
                }
                *val -= i as f64 * gap;
            }
            curves.push(vals);
        }
        match LineEnsemble::new(grid, curves) {
            Ok(e) => return Ok(e),
            Err(Error::Degenerate(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::numerical("synthetic ensemble retries exhausted"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::derive_stream;

    fn params_k1() -> JumpParams {
        JumpParams::new(1e-3, 1, 1.0, 1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn constants_match_definitions() {
        let c = 1.0;
        let c1 = (2f64.powf(-2.5)).min(0.125);
        assert_eq!(little_c_k(1, c), c1);
        let base = (3.0 - 2f64.powf(1.5)).powf(1.5) * 0.5 * 5f64.powf(-1.5);
        assert!((little_c_k(3, c) - base * base * c1).abs() < 1e-15);
        // D_1 = D_2 and the 36(k²−1) branch dominates at small k.
        assert_eq!(big_d_k(1, c), big_d_k(2, c));
        assert_eq!(big_d_k(2, c), 108.0);
        let p = params_k1();
        assert!((p.t - 108.0 * (1000f64).ln().powf(1.0 / 3.0)).abs() < 1e-9);
        assert_eq!(p.d_ip, 5.0);
        assert_eq!(p.r, 6.0);
        // The ε window is violated at ε = 10^{-3} (it demands e^{-151.7}).
        assert!(p.epsilon_window_violation().is_some());
        // A tiny ε satisfies the window.
        let tiny = JumpParams::new(1e-70, 1, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert!(tiny.epsilon_window_violation().is_none());
        assert!(JumpParams::new(0.5, 1, 0.5, 1.0, 1.0, 1.0).is_err());
        assert!(JumpParams::new(1.5, 1, 1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn majorant_of_concave_curve_is_curve() {
        let grid = Grid::new(-1.0, 1.0, 64).unwrap();
        let f = GridFunction::from_fn(grid, |x| -x * x).unwrap();
        let (m, _) = concave_majorant(&f, (-1.0, 1.0)).unwrap();
        for i in 0..=64 {
            let x = grid.x(i);
            assert!((m.eval(x).unwrap() - f.value(i)).abs() < 1e-12);
        }
        assert!(m.is_concave());
    }

    #[test]
    fn majorant_of_v_shape_is_chord() {
        let grid = Grid::new(-1.0, 1.0, 32).unwrap();
        let f = GridFunction::from_fn(grid, |x| x.abs()).unwrap();
        let (m, xext) = concave_majorant(&f, (-1.0, 1.0)).unwrap();
        assert_eq!(xext, vec![-1.0, 1.0]);
        for i in 0..=32 {
            assert!((m.eval(grid.x(i)).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn majorant_matches_pairwise_chord_oracle() {
        // Brute-force oracle: a point is on the upper hull iff no chord of
        // two other points passes strictly above it.
        let mut s = derive_stream(41, "hull-oracle", 0);
        for _ in 0..50 {
            let grid = Grid::new(0.0, 1.0, 63).unwrap();
            let vals: Vec<f64> = (0..64).map(|_| s.gen::<f64>()).collect();
            let f = GridFunction::new(grid, vals.clone()).unwrap();
            let (m, _) = concave_majorant(&f, (0.0, 1.0)).unwrap();
            for i in 0..64usize {
                let x = grid.x(i);
                let mut best = vals[i];
                for a in 0..64usize {
                    for b in (a + 1)..64usize {
                        if a <= i && i <= b && a != b {
                            let xa = grid.x(a);
                            let xb = grid.x(b);
                            let chord = vals[a] + (vals[b] - vals[a]) * (x - xa) / (xb - xa);
                            best = best.max(chord);
                        }
                    }
                }
                assert!((m.eval(x).unwrap() - best).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn lr_of_flat_and_steep_majorants() {
        let t = 1.0;
        // Constant majorant: zero slopes, 𝔩 = −T, 𝔯 = T.
        let m = PiecewiseLinear::new(vec![-1.0, 1.0], vec![0.0, 0.0]).unwrap();
        assert_eq!(compute_lr(&m, t), (-1.0, 1.0));
        // Steep tent switching at ±T/4 with apex slopes ±8T.
        let m = PiecewiseLinear::new(
            vec![-1.0, -0.25, 0.25, 1.0],
            vec![0.0, 6.0, 6.5, 0.2],
        )
        .unwrap();
        // Slopes: 8, 2/3, −8.4: first ≤ 4T at −0.25, last ≥ −4T at 0.25.
        let (l, r) = compute_lr(&m, t);
        assert_eq!(l, -0.25);
        assert_eq!(r, 0.25);
    }

    /// Brute-force pole-set search over all subsets.
    fn pole_set_brute(xs: &[f64], d_ip: f64) -> Option<Vec<f64>> {
        let m = xs.len();
        let mut best: Option<Vec<f64>> = None;
        for mask in 0u32..(1 << m) {
            if mask & 1 == 0 || mask & (1 << (m - 1)) == 0 {
                continue;
            }
            let sel: Vec<f64> = (0..m).filter(|i| mask & (1 << i) != 0).map(|i| xs[i]).collect();
            if sel.windows(2).any(|w| w[1] - w[0] < d_ip) {
                continue;
            }
            if !xs
                .iter()
                .all(|&x| sel.iter().any(|&p| (x - p).abs() <= d_ip))
            {
                continue;
            }
            let better = match &best {
                None => true,
                Some(b) => {
                    sel.len() > b.len()
                        || (sel.len() == b.len()
                            && sel.iter().zip(b).any(|(s, bb)| s > bb)
                            && {
                                // lexicographic: first differing entry larger
                                let mut verdict = false;
                                for (s, bb) in sel.iter().zip(b) {
                                    if s > bb {
                                        verdict = true;
                                        break;
                                    }
                                    if s < bb {
                                        verdict = false;
                                        break;
                                    }
                                }
                                verdict
                            })
                }
            };
            if better {
                best = Some(sel);
            }
        }
        best
    }

    #[test]
    fn pole_set_trivial_and_brute_force() {
        assert_eq!(pole_set(&[0.0, 7.0], 0.0, 7.0, 5.0).unwrap(), vec![0.0, 7.0]);
        assert!(pole_set(&[0.0, 7.0], 0.0, 7.0, 8.0).is_err());
        let mut s = derive_stream(42, "pole-oracle", 0);
        let mut checked = 0;
        while checked < 200 {
            let m = 4 + (s.gen::<u64>() % 7) as usize; // 4..=10 points
            let mut xs: Vec<f64> = vec![0.0];
            let mut x = 0.0;
            for _ in 0..m - 1 {
                x += 0.5 + 7.0 * s.gen::<f64>();
                xs.push(x);
            }
            let d_ip = 1.0 + 4.0 * s.gen::<f64>();
            if d_ip > x {
                continue;
            }
            let brute = pole_set_brute(&xs, d_ip);
            match pole_set(&xs, 0.0, x, d_ip) {
                Ok(p) => {
                    let b = brute.expect("DP found a set, brute must too");
                    assert_eq!(p, b, "xs={xs:?} d_ip={d_ip}");
                }
                Err(_) => assert!(brute.is_none(), "xs={xs:?} d_ip={d_ip}"),
            }
            checked += 1;
        }
    }

    #[test]
    fn tent_basics() {
        let grid = Grid::new(-2.0, 2.0, 8).unwrap();
        let lower = GridFunction::from_fn(grid, |x| 1.0 - 0.0 * x).unwrap();
        let tent = tent_map(&[-2.0, 2.0], &lower).unwrap();
        // Two poles at equal heights: constant tent.
        assert_eq!(tent.eval(0.3).unwrap(), 1.0);
        // Tent matches the lower curve exactly at poles.
        let lower2 = GridFunction::from_fn(grid, |x| -x * x).unwrap();
        let tent2 = tent_map(&[-2.0, 0.0, 2.0], &lower2).unwrap();
        assert_eq!(tent2.eval(-2.0).unwrap(), -4.0);
        assert_eq!(tent2.eval(0.0).unwrap(), 0.0);
        assert!(tent_map(&[0.0], &lower).is_err());
    }

    #[test]
    fn corner_vector_single_curve_margin() {
        // k = 1, side bridge strictly above the lower curve with margin m at
        // the tightest point where w = 1: corner = endpoint − margin.
        let xs: Vec<f64> = (0..=4).map(|i| i as f64).collect();
        let lower = vec![0.0; 5];
        let curve = vec![5.0, 4.0, 3.0, 2.5, 2.0];
        // Ratios (curve − lower)/w at w = x/4: min over x>0.
        let corners =
            corner_vector(&[&curve], &lower, &xs, Side::Left).unwrap();
        let min_ratio = (1..=4)
            .map(|i| curve[i] / (xs[i] / 4.0))
            .fold(f64::INFINITY, f64::min);
        assert!((corners[0] - (2.0 - min_ratio)).abs() < 1e-12);
        // Flat lower at height c, flat curve: corner = c (touching).
        let lower = vec![0.7; 5];
        let curve = vec![3.0; 5];
        let corners = corner_vector(&[&curve], &lower, &xs, Side::Left).unwrap();
        assert!((corners[0] - 0.7).abs() < 1e-12);
    }

    /// Direct side-interval reconstruction check: curves re-pinned to the
    /// endpoint values `vals` stay strictly ordered above each other and
    /// the lower curve.
    fn side_passes_brute(
        curves: &[Vec<f64>],
        lower: &[f64],
        xs: &[f64],
        side: Side,
        vals: &[f64],
    ) -> bool {
        let n = xs.len();
        let (outer, inner) = match side {
            Side::Left => (0usize, n - 1),
            Side::Right => (n - 1, 0usize),
        };
        let span = xs[inner] - xs[outer];
        let k = curves.len();
        let rec: Vec<Vec<f64>> = (0..k)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let w = (xs[j] - xs[outer]) / span;
                        curves[i][j] + w * (vals[i] - curves[i][inner])
                    })
                    .collect()
            })
            .collect();
        for j in 0..n {
            // Interior strictness is required except at the pivot where all
            // reconstructions agree with the original ordered data.
            for i in 0..k {
                let below = if i + 1 < k { rec[i + 1][j] } else { lower[j] };
                if j == outer {
                    if !(rec[i][j] >= below) {
                        return false;
                    }
                } else if !(rec[i][j] > below) {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn corner_criterion_equivalence_oracle() {
        // The side test passes iff vals − corner ∈ (0,∞)^k_>, on random
        // instances with k ≤ 3 and 16-point side grids.
        let mut s = derive_stream(43, "corner-oracle", 0);
        let mut agreements = 0;
        for rep in 0..100 {
            let k = 1 + (rep % 3);
            let n = 16usize;
            let xs: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
            let side = if rep % 2 == 0 { Side::Left } else { Side::Right };
            // Ordered random curves above a random lower curve: the lift
            // gaps of 2 dominate the unit noise, so curves[0] is the top
            // curve and the stack is strictly ordered pointwise.
            let lower: Vec<f64> = (0..n).map(|_| s.gen::<f64>() - 0.5).collect();
            let curves: Vec<Vec<f64>> = (0..k)
                .map(|i| {
                    let lift = 2.0 * (k - i) as f64;
                    (0..n).map(|j| lower[j] + lift + s.gen::<f64>()).collect()
                })
                .collect();
            let refs: Vec<&[f64]> = curves.iter().map(|c| c.as_slice()).collect();
            let corners = corner_vector(&refs, &lower, &xs, side).unwrap();
            // Probe random endpoint values around the corner values.
            let inner = match side {
                Side::Left => n - 1,
                Side::Right => 0,
            };
            for _ in 0..20 {
                let vals: Vec<f64> = (0..k)
                    .map(|i| corners[i] + 3.0 * (s.gen::<f64>() - 0.4))
                    .collect();
                let diffs: Vec<f64> = (0..k).map(|i| vals[i] - corners[i]).collect();
                let criterion = in_ordered_positive_cone(&diffs);
                let brute = side_passes_brute(&curves, &lower, &xs, side, &vals);
                // Ties (measure zero under random probes) are excluded.
                if diffs.iter().all(|&d| d.abs() > 1e-9)
                    && diffs.windows(2).all(|w| (w[0] - w[1]).abs() > 1e-9)
                {
                    assert_eq!(
                        criterion, brute,
                        "rep={rep} side={side:?} vals={vals:?} corners={corners:?}"
                    );
                    agreements += 1;
                }
            }
            let _ = inner;
        }
        assert!(agreements > 1000);
    }

    #[test]
    fn jump_data_structural_invariants_mild() {
        let params = params_k1();
        let mut s = derive_stream(44, "jump-mild", 0);
        let gap = 2.0 * params.t.sqrt();
        let e = synthetic_mild_ensemble(&params, 512, gap, &mut s).unwrap();
        let data = JumpData::build(&e, params).unwrap();
        assert!(data.l_point <= data.r_point);
        assert_eq!(data.poles.first(), Some(&data.l_point));
        assert_eq!(data.poles.last(), Some(&data.r_point));
        for w in data.poles.windows(2) {
            assert!(w[1] - w[0] >= params.d_ip);
        }
        assert!((data.poles.len() as f64) <= 2.0 * params.t / params.d_ip);
        assert!(data.tent.is_concave());
        for s in data.tent.slopes() {
            assert!(s.abs() <= 4.0 * params.t + 1e-9);
        }
        // Mild ensembles are far from the favourable boundary window.
        assert!(!data.fav.f1);
    }

    #[test]
    fn rejection_sampler_accepts_and_conditions_hold() {
        let params = params_k1();
        let mut s = derive_stream(45, "jump-accept", 0);
        // Large gap: the bridge clears the lower curve easily.
        let gap = 12.0 * (4.0 * params.t).sqrt();
        let e = synthetic_mild_ensemble(&params, 256, gap, &mut s).unwrap();
        let data = JumpData::build(&e, params).unwrap();
        let (j, attempts) = sample_jump_candidate(&e, &data, &mut s, 10_000).unwrap();
        assert!(attempts >= 1);
        // Accepted candidates satisfy the conditioning by construction;
        // verify through the public predicate on the reconstruction data.
        assert_eq!(j.len(), 1);
        assert_eq!(j[0].grid().left(), data.l_point);
        assert_eq!(j[0].grid().right(), data.r_point);
        for (gi, &p) in data.poles.iter().enumerate() {
            let _ = gi;
            let v = j[0].eval(p).unwrap();
            let low = e.curve_fn(2).eval(p).unwrap();
            assert!(v >= low);
        }
    }

    #[test]
    fn reconstruct_identity_and_continuity() {
        let params = params_k1();
        let mut s = derive_stream(46, "jump-reconstruct", 0);
        let gap = 6.0 * params.t.sqrt();
        let e = synthetic_mild_ensemble(&params, 256, gap, &mut s).unwrap();
        let data = JumpData::build(&e, params).unwrap();
        // Identity: X = original top curve on [𝔩, 𝔯] reproduces L bitwise.
        let x = e.curve_fn(1).restrict(data.i_l, data.i_r).unwrap();
        let rec = reconstruct(&[x], &data, &e).unwrap();
        for g in 0..e.grid().points() {
            assert_eq!(rec.curve(1)[g].to_bits(), e.curve(1)[g].to_bits());
        }
        // A constant candidate yields an exactly continuous reconstruction.
        let sub = e.grid().subgrid(data.i_l, data.i_r).unwrap();
        let c = GridFunction::from_fn(sub, |_| 5.0).unwrap();
        let rec = reconstruct(&[c], &data, &e).unwrap();
        assert!((rec.curve(1)[data.i_l] - 5.0).abs() < 1e-12);
        assert!((rec.curve(1)[data.i_r] - 5.0).abs() < 1e-12);
        // Pass-test basics: far above everything → pass.
        let c = GridFunction::from_fn(sub, |_| 1e6).unwrap();
        assert!(pass_test(&[c], &data, &e).unwrap());
        // Touching the lower curve at one grid point (equality) → fail.
        let gl = data.i_l;
        let mut vals: Vec<f64> = (0..sub.points()).map(|_| 1e6).collect();
        vals[0] = e.curve(2)[gl]; // equality at 𝔩
        let c = GridFunction::new(sub, vals).unwrap();
        assert!(!pass_test(&[c], &data, &e).unwrap());
    }

    #[test]
    fn observables_trivial_cases() {
        let params = params_k1();
        let mut s = derive_stream(47, "jump-observables", 0);
        let gap = 6.0 * params.t.sqrt();
        let e = synthetic_mild_ensemble(&params, 2048, gap, &mut s).unwrap();
        let data = JumpData::build(&e, params).unwrap();
        // J ≡ Tent on the grid: all observables 0 (up to the snap residual,
        // which vanishes since probes are evaluated at snapped points).
        let sub = e.grid().subgrid(data.i_l, data.i_r).unwrap();
        let jt = GridFunction::from_fn(sub, |x| data.tent.eval(x).unwrap()).unwrap();
        let obs = observables(&[jt.clone()], &data, 0.5).unwrap();
        assert!(obs.y.abs() < 1e-9);
        assert!(obs.z.abs() < 1e-9);
        if obs.pole_case {
            assert!(obs.u.unwrap().abs() < 1e-9);
            assert!(obs.w_eta.unwrap().abs() < 1e-9);
        }
        // J = Tent + 1: observables 1.
        let j1 = GridFunction::from_fn(sub, |x| data.tent.eval(x).unwrap() + 1.0).unwrap();
        let obs = observables(&[j1], &data, 0.5).unwrap();
        assert!((obs.y - 1.0).abs() < 1e-9);
        assert!((obs.z - 1.0).abs() < 1e-9);
    }

    #[test]
    fn good_region_membership() {
        let p = params_k1();
        let t32 = p.t.powf(1.5);
        assert!(in_good_region(0.0, 0.0, &p, true));
        assert!(!in_good_region(-p.r * t32 - 1.0, 0.0, &p, true));
        assert!(!in_good_region(0.0, 2.0 * p.r * t32 + 1.0, &p, true));
        // No-pole region admits more negative y than the pole region.
        let y = -p.r * t32 - 1.0;
        assert!(in_good_region(y, y, &p, false));
    }

    #[test]
    fn cost_examples() {
        // Flat tent, y = z = 0, d = 1: V = 2, S = 1 (ỹ = z̃).
        let (v, s) = vault_slope_costs(0.0, 0.0, 1.0, 0.0, 0.0, 0.0).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
        assert!((s - 1.0).abs() < 1e-12);
        // y = −2, z = 0: V = 1/P(N(−1,2) ≥ 0).
        let (v, _) = vault_slope_costs(-2.0, 0.0, 1.0, 0.0, 0.0, 0.0).unwrap();
        let expect = 1.0 / crate::gauss::normal_sf(1.0 / 2f64.sqrt());
        assert!((v - expect).abs() < 1e-9);
        assert!((v - 4.17).abs() < 0.01);
        // ỹ − z̃ = 4, d = 1: S = e.
        let (_, s) = vault_slope_costs(4.0, 0.0, 1.0, 0.0, 0.0, 0.0).unwrap();
        assert!((s - std::f64::consts::E).abs() < 1e-12);
    }

    #[test]
    fn conditional_jump_probability_values() {
        // m → +∞: probability → 0.
        assert!(conditional_jump_probability(100.0, 0.0, 0.0, 1.0).unwrap() < 1e-10);
        // m = 0, d = 1: ≈ 0.5205.
        let p = conditional_jump_probability(0.0, 0.0, 0.0, 1.0).unwrap();
        assert!((p - 0.5205).abs() < 5e-4, "p = {p}");
        // Strictly decreasing in y + z.
        let mut prev = f64::INFINITY;
        for i in 0..20 {
            let y = -2.0 + 0.4 * i as f64;
            let p = conditional_jump_probability(y, 0.0, -0.3, 1.0).unwrap();
            assert!(p < prev);
            prev = p;
        }
    }

    #[test]
    fn vault_variance_window() {
        // σ²_{−4d} ∈ [4d/5, 4d] whenever the gap is ≥ 5d.
        for &d in &[1.0, 2.0, 3.5] {
            for &g in &[5.0, 7.3, 50.0, 1e6] {
                let gap = g * d;
                if gap < 5.0 * d {
                    continue;
                }
                let v = vault_variance(d, gap).unwrap();
                assert!(v >= 4.0 * d / 5.0 - 1e-12);
                assert!(v <= 4.0 * d + 1e-12);
            }
        }
        assert!(vault_variance(1.0, 3.0).is_err());
    }

    #[test]
    fn exact_chain_sampler_satisfies_conditions() {
        let params = params_k1();
        let mut s = derive_stream(48, "jump-chain", 0);
        let gap = 2.0 * params.t.sqrt();
        let e = synthetic_mild_ensemble(&params, 512, gap, &mut s).unwrap();
        let data = JumpData::build(&e, params).unwrap();
        for _ in 0..10 {
            let j = sample_jump_candidate_exact1(&e, &data, &mut s).unwrap();
            for &p in &data.poles {
                let v = j.eval(p).unwrap();
                let low = e.curve_fn(2).eval(p).unwrap();
                assert!(v >= low, "pole condition violated at {p}: {v} < {low}");
            }
            assert!(j.eval(data.l_point).unwrap() >= data.corner_l[0]);
            assert!(j.eval(data.r_point).unwrap() >= data.corner_r[0]);
        }
    }

    #[test]
    fn exact_chain_sampler_works_at_fav_scale() {
        // The decisive case: a favourable-scale ensemble where rejection
        // sampling is hopeless but the chain sampler must still deliver
        // draws satisfying the conditioning.
        let params = params_k1();
        let mut s = derive_stream(49, "jump-chain-fav", 0);
        let e = synthetic_fav_ensemble(&params, 2048, &mut s).unwrap();
        let data = JumpData::build(&e, params).unwrap();
        assert!(data.fav.fav, "synthetic favourable ensemble should be Fav");
        let j = sample_jump_candidate_exact1(&e, &data, &mut s).unwrap();
        for &p in &data.poles {
            let v = j.eval(p).unwrap();
            let low = e.curve_fn(2).eval(p).unwrap();
            assert!(v >= low);
        }
    }
}
