//! Gaussian density, the modified distribution function Φ̃, and normal CDF
//! helpers used throughout the meander and jump-ensemble calculus.

use crate::error::{Error, Result};
use statrs::function::erf;

/// Parameters of a one-dimensional normal law `N(mean, variance)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussParams {
    pub mean: f64,
    pub variance: f64,
}

impl GaussParams {
    pub fn new(mean: f64, variance: f64) -> Result<Self> {
        if !(variance > 0.0) {
            return Err(Error::domain(format!("variance {variance} must be positive")));
        }
        Ok(GaussParams { mean, variance })
    }
}

/// Gaussian density `φ_{σ²}(x) = (2πσ²)^{-1/2} exp(−x²/2σ²)`.
pub fn phi(variance: f64, x: f64) -> Result<f64> {
    if !(variance > 0.0) {
        return Err(Error::domain(format!("variance {variance} must be positive")));
    }
    Ok((-x * x / (2.0 * variance)).exp() / (2.0 * std::f64::consts::PI * variance).sqrt())
}

/// Modified distribution function `Φ̃_{σ²}(x) = ∫₀^x φ_{σ²}(u) du`.
///
/// Odd in `x`, bounded by 1/2 in absolute value.
pub fn phi_tilde(variance: f64, x: f64) -> Result<f64> {
    if !(variance > 0.0) {
        return Err(Error::domain(format!("variance {variance} must be positive")));
    }
    // ∫₀^x φ_{σ²} = erf(x / (σ√2)) / 2.
    Ok(0.5 * erf::erf(x / (variance.sqrt() * std::f64::consts::SQRT_2)))
}

/// Standard normal CDF `Φ(x)`.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erf::erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal survival function `P(N(0,1) > x)`.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * erf::erfc(x / std::f64::consts::SQRT_2)
}

/// `P(N(mean, variance) > t)`.
pub fn gauss_sf(p: GaussParams, t: f64) -> f64 {
    normal_sf((t - p.mean) / p.variance.sqrt())
}
