//! Standard normal density, distribution function and quantile.

use std::f64::consts::SQRT_2;

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density.
#[inline]
pub fn pdf(x: f64) -> f64 {
    if x.is_infinite() {
        return 0.0;
    }
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal distribution function, evaluated through `erfc` so that
/// both tails keep full relative precision.
#[inline]
pub fn cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Quantile with roughly 1e-12 relative accuracy; enough to drive samplers.
#[inline]
pub fn quantile_fast(p: f64) -> f64 {
    -SQRT_2 * statrs::function::erf::erfc_inv(2.0 * p)
}

/// Standard normal quantile, `p` in (0, 1), refined by one Newton step on
/// the accurate distribution function.
pub fn quantile(p: f64) -> f64 {
    let x = quantile_fast(p);
    if !x.is_finite() {
        return x;
    }
    let dens = pdf(x);
    if dens == 0.0 {
        return x;
    }
    x - (cdf(x) - p) / dens
}
