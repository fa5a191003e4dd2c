//! Verification statistics: Kolmogorov–Smirnov tests, Wilson confidence
//! intervals, tail estimates, and a least-squares line fit.

use crate::error::{Error, Result};

/// Survival function of the Kolmogorov distribution,
/// `Q(λ) = 2 Σ_{k≥1} (−1)^{k−1} exp(−2k²λ²)` — the asymptotic p-value of a
/// scaled KS statistic.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let term = (-2.0 * (k as f64) * (k as f64) * lambda * lambda).exp();
        sum += sign * term;
        sign = -sign;
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

fn scaled_pvalue(n_eff: f64, d: f64) -> f64 {
    // Stephens' small-sample correction to the asymptotic distribution.
    let s = n_eff.sqrt();
    kolmogorov_sf((s + 0.12 + 0.11 / s) * d)
}

/// One-sample KS test of `sample` against the CDF closure `cdf`.
/// Returns `(statistic, p_value)`.
pub fn ks_one_sample(sample: &[f64], cdf: &dyn Fn(f64) -> f64) -> Result<(f64, f64)> {
    if sample.is_empty() {
        return Err(Error::domain("empty sample"));
    }
    let mut xs = sample.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).expect("NaN in sample"));
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let c = cdf(x);
        d = d.max((i as f64 / n - c).abs()).max(((i + 1) as f64 / n - c).abs());
    }
    Ok((d, scaled_pvalue(n, d)))
}

/// Two-sample KS test.  Returns `(statistic, p_value)`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::domain("empty sample"));
    }
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(|p, q| p.partial_cmp(q).expect("NaN in sample"));
    ys.sort_by(|p, q| p.partial_cmp(q).expect("NaN in sample"));
    let (na, nb) = (xs.len(), ys.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < na && j < nb {
        let x = xs[i];
        let y = ys[j];
        if x <= y {
            i += 1;
        }
        if y <= x {
            j += 1;
        }
        d = d.max((i as f64 / na as f64 - j as f64 / nb as f64).abs());
    }
    let n_eff = (na * nb) as f64 / (na + nb) as f64;
    Ok((d, scaled_pvalue(n_eff, d)))
}

/// Wilson 95%-style score interval for a binomial proportion at the given
/// confidence level.
pub fn wilson_ci(hits: u64, trials: u64, level: f64) -> Result<(f64, f64)> {
    if trials == 0 {
        return Err(Error::domain("wilson_ci needs at least one trial"));
    }
    if !(0.0 < level && level < 1.0) {
        return Err(Error::domain(format!("confidence level {level} out of range")));
    }
    // z-quantile of the standard normal via bisection on the CDF.
    let target = 0.5 + level / 2.0;
    let (mut lo, mut hi) = (0.0f64, 10.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if crate::gauss::normal_cdf(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let z = 0.5 * (lo + hi);
    let n = trials as f64;
    let p = hits as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    Ok(((center - half).max(0.0), (center + half).min(1.0)))
}

/// An empirical exceedance probability with its Wilson interval.
#[derive(Debug, Clone, PartialEq)]
pub struct TailEstimate {
    pub threshold: f64,
    pub hits: u64,
    pub trials: u64,
    pub estimate: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
}

impl TailEstimate {
    pub fn new(threshold: f64, hits: u64, trials: u64) -> Result<Self> {
        let (lo, hi) = wilson_ci(hits, trials, 0.95)?;
        Ok(TailEstimate {
            threshold,
            hits,
            trials,
            estimate: hits as f64 / trials as f64,
            wilson_low: lo,
            wilson_high: hi,
        })
    }

    /// Binomial standard error of the point estimate.
    pub fn stderr(&self) -> f64 {
        (self.estimate * (1.0 - self.estimate) / self.trials as f64).sqrt()
    }
}

/// Ordinary least squares fit `y ≈ slope·x + intercept`;
/// returns `(slope, intercept, r²)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::domain("linear_fit needs ≥ 2 paired points"));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
        syy += (yi - my) * (yi - my);
    }
    if sxx == 0.0 {
        return Err(Error::degenerate("linear_fit with constant abscissas"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok((slope, intercept, r2))
}

/// Sample mean and standard error of the mean.
pub fn mean_stderr(xs: &[f64]) -> Result<(f64, f64)> {
    if xs.is_empty() {
        return Err(Error::domain("empty sample"));
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() == 1 {
        return Ok((mean, 0.0));
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    Ok((mean, (var / n).sqrt()))
}
