//! Laws of the maximum and minimum of the continuous Euler scheme between
//! two consecutive dates, conditionally on its endpoint values.
//!
//! On `[t_k, t_{k+1}]` the continuous Euler scheme is a Brownian bridge with
//! constant diffusion `σ(x)` frozen at the left endpoint `x`.

use crate::error::{invalid, Result};

/// Step count, horizon and left-endpoint diffusion of one bridge interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BridgeParams {
    pub n_steps: usize,
    pub horizon: f64,
    pub sigma_x: f64,
}

impl BridgeParams {
    pub fn new(n_steps: usize, horizon: f64, sigma_x: f64) -> Result<Self> {
        if n_steps == 0 {
            return Err(invalid("bridge needs at least one step"));
        }
        if !(horizon > 0.0) {
            return Err(invalid("bridge horizon must be positive"));
        }
        if !(sigma_x >= 0.0) {
            return Err(invalid("bridge diffusion must be nonnegative"));
        }
        Ok(Self {
            n_steps,
            horizon,
            sigma_x,
        })
    }

    /// `2n / (T σ(x)²)`, the rate in the exponent of the bridge laws.
    #[inline]
    pub(crate) fn rate(&self) -> f64 {
        2.0 * self.n_steps as f64 / (self.horizon * self.sigma_x * self.sigma_x)
    }

    /// `T σ(x)² / (2n)`, the inverse of [`Self::rate`].
    #[inline]
    fn scale(&self) -> f64 {
        self.horizon * self.sigma_x * self.sigma_x / (2.0 * self.n_steps as f64)
    }
}

/// `P(max ≤ u | x, y)`: `1 - exp(-2n (x-u)(y-u) / (T σ(x)²))` for `u ≥ max(x, y)`, else 0.
#[inline]
pub fn bridge_max_cdf(x: f64, y: f64, u: f64, p: &BridgeParams) -> f64 {
    if u < x.max(y) {
        return 0.0;
    }
    if p.sigma_x == 0.0 {
        return 1.0;
    }
    -(-p.rate() * (x - u) * (y - u)).exp_m1()
}

/// `P(min ≤ u | x, y)`: `exp(-2n (x-u)(y-u) / (T σ(x)²))` for `u ≤ min(x, y)`, else 1.
#[inline]
pub fn bridge_min_cdf(x: f64, y: f64, u: f64, p: &BridgeParams) -> f64 {
    if u > x.min(y) {
        return 1.0;
    }
    if p.sigma_x == 0.0 {
        return if u == x.min(y) { 1.0 } else { 0.0 };
    }
    (-p.rate() * (x - u) * (y - u)).exp()
}

/// Survival factor of an up barrier: `P(max ≤ level | x, y)`.
#[inline]
pub fn up_survival(x: f64, y: f64, level: f64, p: &BridgeParams) -> f64 {
    bridge_max_cdf(x, y, level, p)
}

/// Survival factor of a down barrier: `1 - P(min ≤ level | x, y)`.
#[inline]
pub fn down_survival(x: f64, y: f64, level: f64, p: &BridgeParams) -> f64 {
    if level > x.min(y) {
        return 0.0;
    }
    if p.sigma_x == 0.0 {
        return if level == x.min(y) { 0.0 } else { 1.0 };
    }
    -(-p.rate() * (x - level) * (y - level)).exp_m1()
}

fn check_probability(w: f64) -> Result<()> {
    if !(w > 0.0 && w < 1.0) {
        return Err(invalid(format!("probability {w} must lie in (0, 1)")));
    }
    Ok(())
}

/// Maximum sample driven by `u ∈ (0,1)` with `P(max ≥ z) = u`:
/// `(x + y + sqrt((x-y)² - 2Tσ(x)² ln(u) / n)) / 2`.
#[inline]
pub fn sample_bridge_max(x: f64, y: f64, u: f64, p: &BridgeParams) -> f64 {
    x.max(y) + bridge_excursion(x, y, u, p)
}

// Distance from the nearer endpoint to the extremum, written without the
// cancellation of the textbook form `(sqrt(D) - |x - y|) / 2`.
#[inline]
fn bridge_excursion(x: f64, y: f64, u: f64, p: &BridgeParams) -> f64 {
    let gap = (x - y).abs();
    let push = -4.0 * p.scale() * u.ln();
    debug_assert!(push >= 0.0);
    let disc = gap * gap + push;
    0.5 * push / (disc.sqrt() + gap)
}

/// Minimum sample driven by `v ∈ (0,1)` with `P(min ≤ z) = v`.
#[inline]
pub fn sample_bridge_min(x: f64, y: f64, v: f64, p: &BridgeParams) -> f64 {
    x.min(y) - bridge_excursion(x, y, v, p)
}

/// Quantile of the maximum law: `z ≥ max(x, y)` with `bridge_max_cdf(z) = w`.
pub fn bridge_max_inverse(x: f64, y: f64, w: f64, p: &BridgeParams) -> Result<f64> {
    check_probability(w)?;
    if p.sigma_x == 0.0 {
        return Ok(x.max(y));
    }
    Ok(sample_bridge_max(x, y, 1.0 - w, p))
}

/// Quantile of the minimum law: `z ≤ min(x, y)` with `bridge_min_cdf(z) = w`.
pub fn bridge_min_inverse(x: f64, y: f64, w: f64, p: &BridgeParams) -> Result<f64> {
    check_probability(w)?;
    if p.sigma_x == 0.0 {
        return Ok(x.min(y));
    }
    Ok(sample_bridge_min(x, y, w, p))
}
