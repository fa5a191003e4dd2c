//! Numerical quadrature and tabulated inverse-CDF sampling.
//!
//! The adaptive Simpson rule here is the oracle used by the density
//! normalization checks and the Appendix bound evaluations; the inverse-CDF
//! table drives the exact sequential meander sampler.

use crate::error::{Error, Result};

/// Adaptive Simpson integration of `f` over `[a, b]` with absolute
/// tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(a: f64, fa: f64, b: f64, fb: f64, fm: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(a, fa, m, fm, flm);
        let right = simpson(m, fm, b, fb, frm);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, fa, m, fm, flm, left, tol / 2.0, depth - 1)
                + recurse(f, m, fm, b, fb, frm, right, tol / 2.0, depth - 1)
        }
    }
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = simpson(a, fa, b, fb, fm);
    recurse(f, a, fa, b, fb, fm, whole, tol, 48)
}

/// Trapezoid-rule cumulative integral of tabulated values over a uniform
/// abscissa spacing `h`; `out[0] = 0`.
pub fn cumulative_trapezoid(values: &[f64], h: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in values.windows(2) {
        acc += 0.5 * h * (w[0] + w[1]);
        out.push(acc);
    }
    out
}

/// A tabulated inverse CDF over `[a, b]` built from a density closure.
///
/// The density is sampled at `n + 1` uniformly spaced points, integrated by
/// the trapezoid rule and normalized; sampling inverts the table by binary
/// search with linear interpolation.
pub struct InverseCdfTable {
    xs: Vec<f64>,
    cdf: Vec<f64>,
}

impl InverseCdfTable {
    pub fn build(density: &dyn Fn(f64) -> f64, a: f64, b: f64, n: usize) -> Result<Self> {
        if !(a < b) || n < 2 {
            return Err(Error::domain("invalid inverse-CDF table parameters"));
        }
        let h = (b - a) / n as f64;
        let xs: Vec<f64> = (0..=n).map(|i| a + h * i as f64).collect();
        let dens: Vec<f64> = xs.iter().map(|&x| density(x).max(0.0)).collect();
        let mut cdf = cumulative_trapezoid(&dens, h);
        let total = *cdf.last().unwrap();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::numerical(format!(
                "inverse-CDF table has non-positive total mass {total}"
            )));
        }
        for c in cdf.iter_mut() {
            *c /= total;
        }
        Ok(InverseCdfTable { xs, cdf })
    }

    /// Map a uniform variate `u ∈ [0,1)` through the inverse CDF.
    pub fn sample(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        // Binary search for the bracketing CDF cell.
        let mut lo = 0;
        let mut hi = self.cdf.len() - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.cdf[mid] <= u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let c0 = self.cdf[lo];
        let c1 = self.cdf[hi];
        if c1 <= c0 {
            return self.xs[lo];
        }
        let t = (u - c0) / (c1 - c0);
        self.xs[lo] + t * (self.xs[hi] - self.xs[lo])
    }
}
