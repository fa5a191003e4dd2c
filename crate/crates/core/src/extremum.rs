//! Maximiser statistics: the near-touch event and the arcsine law of the
//! argmax, near-zero events for the meander, the greedy near-touch and
//! near-zero counts, the Appendix meander bounds by quadrature, and the
//! supporting analytic lemma checks.

use crate::error::{Error, Result};
use crate::gauss::{normal_cdf, normal_sf, phi, phi_tilde};
use crate::grid::GridFunction;
use crate::quad::adaptive_simpson;

/// Parameters of the near-touch event `NT(X, η, a)` and the optional
/// maximiser-location event `MaxLoc(X, I)`.
#[derive(Debug, Clone, Copy)]
pub struct NearTouchSpec {
    pub eta: f64,
    pub a: f64,
    pub d: f64,
    /// Optional interval `I ⊆ [−d, d]` for `MaxLoc`.
    pub interval: Option<(f64, f64)>,
}

impl NearTouchSpec {
    pub fn new(eta: f64, a: f64, d: f64, interval: Option<(f64, f64)>) -> Result<Self> {
        if !(eta > 0.0 && eta < 1.0 && a > 0.0 && a < 1.0) {
            return Err(Error::domain(format!("need a, η ∈ (0,1): a={a}, η={eta}")));
        }
        if !(d >= 0.5) {
            return Err(Error::domain(format!("d = {d} below the d = 1/2 convention")));
        }
        if let Some((lo, hi)) = interval {
            if !(lo < hi && lo >= -d && hi <= d) {
                return Err(Error::domain(format!("I = [{lo}, {hi}] ⊄ [−{d}, {d}]")));
            }
        }
        Ok(NearTouchSpec { eta, a, d, interval })
    }
}

/// Outcome of evaluating `NT` and `MaxLoc` on one path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NearTouchOutcome {
    /// Did the path come within `aη^{1/2}` of its maximum at distance ≥ η?
    pub nt: bool,
    /// Is the maximiser in the spec's interval (`true` when no interval)?
    pub max_loc: bool,
    /// The (leftmost) grid maximiser.
    pub x_max: f64,
    /// The maximum value.
    pub max: f64,
    /// Exact ties at the maximum (the leftmost was used, flagged here).
    pub tied_max: bool,
}

/// Evaluate the near-touch event over the grid: is there a grid point at
/// distance ≥ η from the (leftmost) maximiser whose value is within
/// `aη^{1/2}` of the maximum?  Off-domain points contribute −∞ and are
/// simply absent from the scan.
pub fn nt_event(path: &GridFunction, spec: &NearTouchSpec) -> Result<NearTouchOutcome> {
    let grid = path.grid();
    let scale = grid.left().abs().max(grid.right().abs()).max(1.0);
    if (grid.left() + spec.d).abs() > 1e-9 * scale || (grid.right() - spec.d).abs() > 1e-9 * scale
    {
        return Err(Error::domain(format!(
            "path grid [{}, {}] must be [−d, d] = [−{}, {}]",
            grid.left(),
            grid.right(),
            spec.d,
            spec.d
        )));
    }
    let imax = path.argmax();
    let x_max = grid.x(imax);
    let m = path.value(imax);
    let tied_max = (0..grid.points()).any(|i| i != imax && path.value(i) == m);
    let threshold = m - spec.a * spec.eta.sqrt();
    let nt = (0..grid.points())
        .any(|i| (grid.x(i) - x_max).abs() >= spec.eta && path.value(i) >= threshold);
    let max_loc = spec
        .interval
        .map(|(lo, hi)| x_max >= lo && x_max <= hi)
        .unwrap_or(true);
    Ok(NearTouchOutcome { nt, max_loc, x_max, max: m, tied_max })
}

/// Measure of `I = (a, b) ⊆ [−d, d]` under the arcsine law with density
/// `π^{−1}(d² − x²)^{−1/2}`: `(arcsin(b/d) − arcsin(a/d))/π`.
pub fn arcsin_measure(i: (f64, f64), d: f64) -> Result<f64> {
    let (a, b) = i;
    if !(d > 0.0) || a > b || a < -d || b > d {
        return Err(Error::domain(format!("interval [{a}, {b}] ⊄ [−{d}, {d}]")));
    }
    Ok(((b / d).asin() - (a / d).asin()) / std::f64::consts::PI)
}

/// CDF of the arcsine law of the maximiser on `[−d, d]`.
pub fn arcsin_cdf(x: f64, d: f64) -> f64 {
    if x <= -d {
        0.0
    } else if x >= d {
        1.0
    } else {
        0.5 + (x / d).asin() / std::f64::consts::PI
    }
}

/// Greedy maximal η-separated subset count among sorted abscissas.  For
/// the interval structure at hand the left-to-right greedy choice is
/// optimal (exchange argument: replacing any selected point by the
/// earliest qualifying one never blocks later selections).
fn greedy_separated_count(sorted_xs: &[f64], eta: f64) -> usize {
    let mut count = 0usize;
    let mut last = f64::NEG_INFINITY;
    for &x in sorted_xs {
        if x - last >= eta || count == 0 {
            count += 1;
            last = x;
        }
    }
    count
}

/// `NumNT(X, η)`: the maximal number of η-separated grid points whose
/// value is within `η^{1/2}` of the grid maximum.
pub fn num_nt(path: &GridFunction, eta: f64) -> Result<usize> {
    if !(eta > 0.0) {
        return Err(Error::domain("η must be positive"));
    }
    let m = path.max();
    let threshold = m - eta.sqrt();
    let qualifying: Vec<f64> = (0..path.grid().points())
        .filter(|&i| path.value(i) >= threshold)
        .map(|i| path.grid().x(i))
        .collect();
    Ok(greedy_separated_count(&qualifying, eta))
}

/// `NZ(B_me, η, a)`: does the meander path dip below `aη^{1/2}` at a grid
/// point of `[η, 1]`?  Empty (false) when `η > 1`.
pub fn nz_event(meander: &GridFunction, eta: f64, a: f64) -> Result<bool> {
    if !(eta > 0.0 && a > 0.0 && a < 1.0) {
        return Err(Error::domain(format!("need η > 0, a ∈ (0,1): η={eta}, a={a}")));
    }
    if eta > 1.0 {
        return Ok(false);
    }
    let threshold = a * eta.sqrt();
    Ok((0..meander.grid().points())
        .any(|i| meander.grid().x(i) >= eta && meander.value(i) < threshold))
}

/// `NumNZ(X, η)`: the maximal number of η-separated grid points of `[0, 1]`
/// at which `|X| ≤ η^{1/2}`.
pub fn num_nz(path: &GridFunction, eta: f64) -> Result<usize> {
    if !(eta > 0.0) {
        return Err(Error::domain("η must be positive"));
    }
    let threshold = eta.sqrt();
    let qualifying: Vec<f64> = (0..path.grid().points())
        .filter(|&i| path.value(i).abs() <= threshold)
        .map(|i| path.grid().x(i))
        .collect();
    Ok(greedy_separated_count(&qualifying, eta))
}

/// The three Appendix meander probabilities evaluated by quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeanderBound {
    /// `P(B_me(η) < 1.1η^{1/2})`; requires `η ∈ (0, 1/2]`.  Bounded by 1/2.
    FromZero { eta: f64 },
    /// `P(B_me(t) < 1.1η^{1/2} | B_me(t−η) = x)`; requires `t ∈ (η, 1−4η]`
    /// and `0 < x ≤ 1.1η^{1/2}`.  Bounded by 3/4.
    Increment { eta: f64, t: f64, x: f64 },
    /// `P(inf_{[t−η,1]} B_me < η^{1/2} | B_me(t−η) = x)` via the
    /// folded-normal representation
    /// `P(|N| ∈ [x−η^{1/2}, x]) / P(|N| < x)` with variance `1−(t−η)`;
    /// requires `t ∈ (η, 1−10η]` and `x > 1.1η^{1/2}`.  Bounded by
    /// `(1/1.1)·e^{1.2/20} ≈ 0.96616`.
    ReturnFromAbove { eta: f64, t: f64, x: f64 },
}

/// Evaluate one of the Appendix meander probabilities.
pub fn meander_bound_quadrature(which: MeanderBound) -> Result<f64> {
    match which {
        MeanderBound::FromZero { eta } => {
            if !(eta > 0.0 && eta <= 0.5) {
                return Err(Error::domain(format!("from-zero needs η ∈ (0, 1/2], got {eta}")));
            }
            let upper = 1.1 * eta.sqrt();
            let c = 2.0 * (2.0 * std::f64::consts::PI).sqrt() / eta;
            let v = adaptive_simpson(
                &|y| {
                    if y <= 0.0 {
                        0.0
                    } else {
                        y * phi(eta, y).unwrap() * phi_tilde(1.0 - eta, y).unwrap()
                    }
                },
                0.0,
                upper,
                1e-12,
            );
            Ok(c * v)
        }
        MeanderBound::Increment { eta, t, x } => {
            if !(eta > 0.0 && t > eta && t <= 1.0 - 4.0 * eta) {
                return Err(Error::domain(format!(
                    "increment needs t ∈ (η, 1−4η], got η={eta}, t={t}"
                )));
            }
            if !(x > 0.0 && x <= 1.1 * eta.sqrt()) {
                return Err(Error::domain(format!(
                    "increment needs 0 < x ≤ 1.1η^{{1/2}}, got x={x}"
                )));
            }
            let s = t - eta;
            let upper = 1.1 * eta.sqrt();
            let den = phi_tilde(1.0 - s, x)?;
            let v = adaptive_simpson(
                &|y| {
                    if y <= 0.0 {
                        0.0
                    } else {
                        (phi(eta, y - x).unwrap() - phi(eta, y + x).unwrap())
                            * phi_tilde(1.0 - t, y).unwrap()
                    }
                },
                0.0,
                upper,
                1e-12,
            );
            Ok((v / den).max(0.0))
        }
        MeanderBound::ReturnFromAbove { eta, t, x } => {
            if !(eta > 0.0 && t > eta && t <= 1.0 - 10.0 * eta) {
                return Err(Error::domain(format!(
                    "return-from-above needs t ∈ (η, 1−10η], got η={eta}, t={t}"
                )));
            }
            if !(x > 1.1 * eta.sqrt()) {
                return Err(Error::domain(format!(
                    "return-from-above needs x > 1.1η^{{1/2}}, got x={x}"
                )));
            }
            let variance = 1.0 - (t - eta);
            let num = phi_tilde(variance, x)? - phi_tilde(variance, (x - eta.sqrt()).max(0.0))?;
            let den = phi_tilde(variance, x)?;
            Ok((num / den).clamp(0.0, 1.0))
        }
    }
}

/// Exact survival `P(G ≥ m)` for `G` a sum of `n` i.i.d. `Geo(p)` variables
/// on `{1, 2, ...}` (negative-binomial recursion, no sampling error).
pub fn geometric_sum_survival(n: usize, p: f64, m: u64) -> Result<f64> {
    if n == 0 || !(p > 0.0 && p < 1.0) {
        return Err(Error::domain("need n ≥ 1 and p ∈ (0,1)"));
    }
    if m <= n as u64 {
        return Ok(1.0);
    }
    // G − n counts failures: P(G − n = j) = C(j+n−1, j) p^n (1−p)^j.
    let mut cdf = 0.0f64;
    let mut term = p.powi(n as i32);
    for j in 0..(m - n as u64) {
        cdf += term;
        term *= (1.0 - p) * (j as f64 + n as f64) / (j as f64 + 1.0);
    }
    Ok((1.0 - cdf).max(0.0))
}

/// One checked lemma over its parameter lattice.
#[derive(Debug, Clone)]
pub struct LemmaCheck {
    pub name: &'static str,
    pub cases: usize,
    /// Smallest slack (bound − value) encountered; negative means failure.
    pub worst_margin: f64,
    pub pass: bool,
}

impl LemmaCheck {
    fn from_margins(name: &'static str, margins: &[f64]) -> Self {
        let worst = margins.iter().cloned().fold(f64::INFINITY, f64::min);
        LemmaCheck { name, cases: margins.len(), worst_margin: worst, pass: worst >= 0.0 }
    }
}

/// Check the supporting analytic lemmas over fixed parameter lattices:
/// the normal sandwich bound, the Gaussian integral bound, the
/// geometric-sum tail (exact recursion vs `e^{−pμ(λ−1−ln λ)}`), the
/// convolution density-bound tool, and the conditioned-infimum bound.
pub fn analytic_lemma_checks() -> Result<Vec<LemmaCheck>> {
    let mut out = Vec::new();

    // Normal sandwich: σ/(2√(2π)t)·e^{−t²/2σ²} ≤ P(N(0,σ²) > t) ≤
    // e^{−t²/2σ²}, the lower bound for t > σ.
    let mut margins = Vec::new();
    for &sigma in &[0.5, 1.0, 2.0] {
        for &ratio in &[1.1, 1.5, 2.0, 3.0, 5.0] {
            let t = ratio * sigma;
            let sf = normal_sf(t / sigma);
            let e = (-t * t / (2.0 * sigma * sigma)).exp();
            let lower = sigma / (2.0 * (2.0 * std::f64::consts::PI).sqrt() * t) * e;
            margins.push(sf - lower);
            margins.push(e - sf);
        }
    }
    out.push(LemmaCheck::from_margins("normal-sandwich", &margins));

    // Integral bound: ∫₀^∞ e^{−ax²+bx} dx ≤ √(π/a) for b ≤ 0, and
    // ≤ √(π/a)·e^{b²/4a} in general (quadrature over a truncated range
    // with a negligible analytic tail).
    let mut margins = Vec::new();
    for &a in &[0.5, 2.0, 5.0] {
        for &b in &[-3.0f64, -1.0, 0.0, 1.0, 3.0] {
            let upper = (b.max(0.0) / (2.0 * a)) + 12.0 / (2.0 * a).sqrt();
            let integral =
                adaptive_simpson(&|x| (-a * x * x + b * x).exp(), 0.0, upper, 1e-12);
            let cap = (std::f64::consts::PI / a).sqrt() * (b * b / (4.0 * a)).exp();
            margins.push(cap - integral);
            if b <= 0.0 {
                margins.push((std::f64::consts::PI / a).sqrt() - integral);
            }
        }
    }
    out.push(LemmaCheck::from_margins("integral-bound", &margins));

    // Geometric-sum tail, exact recursion against e^{−pμ(λ−1−ln λ)} with
    // μ = n/p (the cited tail bound for sums of geometric variables).
    let mut margins = Vec::new();
    for &(n, p) in &[(5usize, 0.25), (10, 0.25), (10, 0.5)] {
        let mu = n as f64 / p;
        for &lambda in &[1.0, 1.2, 1.5, 2.0, 3.0, 5.0] {
            let m = (lambda * mu).ceil() as u64;
            let exact = geometric_sum_survival(n, p, m)?;
            let bound = (-p * mu * (lambda - 1.0 - lambda.ln())).exp();
            margins.push(bound - exact);
        }
    }
    out.push(LemmaCheck::from_margins("geometric-sum-tail", &margins));

    // Density-bound tool: with X = x₀ − |N(0, σ₂²)| (so that
    // P(X < x) ≤ 2·exp(−(x−x₀)²/2σ₂²), i.e. A = 2) and an independent
    // N(0, σ₁²), the density f of X + N satisfies
    // f(x) ≤ (A+1)/(√(2π)σ₁)·exp(−(x−x₀)²/2(σ₁+σ₂)²) for x < x₀ and
    // f(x) ≤ 1/(√(2π)σ₁) everywhere.
    let mut margins = Vec::new();
    let x0 = 0.0;
    for &(s1, s2) in &[(0.5, 1.0), (1.0, 1.0), (1.0, 2.0)] {
        let f = |x: f64| -> f64 {
            // f(x) = 2 ∫_{−∞}^{x₀} φ_{σ₁²}(x − u) φ_{σ₂²}(u − x₀) du.
            let lo = x0 - 10.0 * s2;
            2.0 * adaptive_simpson(
                &|u| phi(s1 * s1, x - u).unwrap() * phi(s2 * s2, u - x0).unwrap(),
                lo,
                x0,
                1e-12,
            )
        };
        let root_2pi = (2.0 * std::f64::consts::PI).sqrt();
        for &x in &[-4.0, -2.0, -1.0, -0.25] {
            let cap = 3.0 / (root_2pi * s1)
                * (-(x - x0) * (x - x0) / (2.0 * (s1 + s2) * (s1 + s2))).exp();
            margins.push(cap - f(x));
        }
        for &x in &[-1.0, 0.0, 1.0, 3.0] {
            margins.push(1.0 / (root_2pi * s1) - f(x));
        }
    }
    out.push(LemmaCheck::from_margins("density-bound-tool", &margins));

    // Conditioned infimum: for X with non-increasing density on [0, ∞)
    // (here |N(0, σ²)|), P(X ≥ x | X ≤ y) ≤ (y − x)/y.
    let mut margins = Vec::new();
    for &sigma in &[0.5, 1.0, 3.0] {
        for &y in &[0.5, 1.0, 2.0] {
            for &frac in &[0.1, 0.5, 0.9] {
                let x = frac * y;
                let cdf = |v: f64| 2.0 * (normal_cdf(v / sigma) - 0.5);
                let p = (cdf(y) - cdf(x)) / cdf(y);
                margins.push((y - x) / y - p);
            }
        }
    }
    out.push(LemmaCheck::from_margins("conditioned-inf", &margins));

    Ok(out)
}
