//! Diffusion models `dX = b(X) dt + σ(X) dW` with time-homogeneous coefficients.

use crate::error::{invalid, Result};
use crate::normal;
use serde::{Deserialize, Serialize};

/// Black-Scholes or pseudo-CEV dynamics with initial price `x0`.
///
/// Serialized as `{"model":"bs","r":..,"sigma":..,"x0":..}` or
/// `{"model":"pcev","r":..,"vartheta":..,"delta":..,"x0":..}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum Model {
    #[serde(rename = "bs")]
    BlackScholes { r: f64, sigma: f64, x0: f64 },
    /// Local volatility `ϑ x^δ / sqrt(1 + x²)`, close to CEV for large prices.
    #[serde(rename = "pcev")]
    PseudoCev {
        r: f64,
        vartheta: f64,
        delta: f64,
        x0: f64,
    },
}

impl Model {
    pub fn black_scholes(r: f64, sigma: f64, x0: f64) -> Result<Self> {
        let m = Model::BlackScholes { r, sigma, x0 };
        m.validate()?;
        Ok(m)
    }

    pub fn pseudo_cev(r: f64, vartheta: f64, delta: f64, x0: f64) -> Result<Self> {
        let m = Model::PseudoCev {
            r,
            vartheta,
            delta,
            x0,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let (r, x0) = (self.rate(), self.x0());
        if !r.is_finite() {
            return Err(invalid("rate must be finite"));
        }
        if !(x0 > 0.0 && x0.is_finite()) {
            return Err(invalid("initial price x0 must be positive"));
        }
        match *self {
            Model::BlackScholes { sigma, .. } => {
                if !(sigma >= 0.0 && sigma.is_finite()) {
                    return Err(invalid("volatility sigma must be nonnegative"));
                }
            }
            Model::PseudoCev { vartheta, delta, .. } => {
                if !(vartheta > 0.0 && vartheta.is_finite()) {
                    return Err(invalid("vartheta must be positive"));
                }
                if !(delta > 0.0 && delta < 1.0) {
                    return Err(invalid("delta must lie in (0, 1)"));
                }
            }
        }
        Ok(())
    }

    pub fn rate(&self) -> f64 {
        match *self {
            Model::BlackScholes { r, .. } | Model::PseudoCev { r, .. } => r,
        }
    }

    pub fn x0(&self) -> f64 {
        match *self {
            Model::BlackScholes { x0, .. } | Model::PseudoCev { x0, .. } => x0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Model::BlackScholes { .. } => "black-scholes",
            Model::PseudoCev { .. } => "pseudo-cev",
        }
    }

    /// `b(x) = r x`.
    #[inline]
    pub fn drift(&self, x: f64) -> f64 {
        self.rate() * x
    }

    /// Diffusion coefficient; zero for `x ≤ 0`.
    #[inline]
    pub fn diffusion(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match *self {
            Model::BlackScholes { sigma, .. } => sigma * x,
            Model::PseudoCev {
                vartheta, delta, ..
            } => vartheta * x.powf(delta + 1.0) / (1.0 + x * x).sqrt(),
        }
    }

    /// Derivative of the diffusion coefficient.
    #[inline]
    pub fn diffusion_prime(&self, x: f64) -> f64 {
        match *self {
            Model::BlackScholes { sigma, .. } => sigma,
            Model::PseudoCev {
                vartheta, delta, ..
            } => {
                if x <= 0.0 {
                    return 0.0;
                }
                let s = 1.0 + x * x;
                vartheta
                    * ((delta + 1.0) * x.powf(delta) / s.sqrt() - x.powf(delta + 2.0) / (s * s.sqrt()))
            }
        }
    }

    /// Drift of the companion ODE, `b - σσ'/2`.
    #[inline]
    pub fn corrected_drift(&self, x: f64) -> f64 {
        self.drift(x) - 0.5 * self.diffusion(x) * self.diffusion_prime(x)
    }

    /// Exact lognormal transition CDF `P(X_{s+Δt} ≤ z | X_s = x)` (Black-Scholes only).
    pub fn conditional_cdf_exact(&self, z: f64, x: f64, dt: f64) -> Result<f64> {
        match *self {
            Model::BlackScholes { r, sigma, .. } => Ok(lognormal_cdf(r, sigma, z, x, dt)),
            Model::PseudoCev { .. } => Err(crate::Error::Unsupported(
                "no closed-form transition law for pseudo-CEV".into(),
            )),
        }
    }

    /// Gaussian CDF of one Euler step from `x` over `Δt`.
    #[inline]
    pub fn conditional_cdf_euler(&self, z: f64, x: f64, dt: f64) -> f64 {
        let mean = x + self.drift(x) * dt;
        let sd = self.diffusion(x) * dt.sqrt();
        if sd == 0.0 {
            return if z >= mean { 1.0 } else { 0.0 };
        }
        normal::cdf((z - mean) / sd)
    }
}

#[inline]
pub(crate) fn lognormal_cdf(r: f64, sigma: f64, z: f64, x: f64, dt: f64) -> f64 {
    if z <= 0.0 {
        return 0.0;
    }
    if z == f64::INFINITY {
        return 1.0;
    }
    let m = (r - 0.5 * sigma * sigma) * dt;
    if sigma == 0.0 {
        return if z >= x * (r * dt).exp() { 1.0 } else { 0.0 };
    }
    normal::cdf(((z / x).ln() - m) / (sigma * dt.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bs() -> Model {
        Model::black_scholes(0.15, 0.07, 100.0).unwrap()
    }

    fn pcev() -> Model {
        Model::pseudo_cev(0.15, 0.7, 0.5, 100.0).unwrap()
    }

    #[test]
    fn coefficients() {
        assert!((bs().drift(100.0) - 15.0).abs() < 1e-12);
        assert!((pcev().drift(100.0) - 15.0).abs() < 1e-12);
        assert_eq!(Model::black_scholes(0.0, 0.2, 1.0).unwrap().drift(55.0), 0.0);
        assert!((bs().diffusion(100.0) - 7.0).abs() < 1e-12);
        let d = 0.7 * 100f64.powf(1.5) / 10001f64.sqrt();
        assert!((pcev().diffusion(100.0) - d).abs() < 1e-12);
        assert!((d - 6.999_65).abs() < 1e-5);
        assert_eq!(bs().diffusion(0.0), 0.0);
        assert_eq!(pcev().diffusion(0.0), 0.0);
        assert_eq!(bs().diffusion_prime(123.0), 0.07);
    }

    #[test]
    fn pcev_derivative() {
        let m = pcev();
        let x = 100.0;
        let expect = 0.7 * (1.5 * 10.0 / 10001f64.sqrt() - 100f64.powf(2.5) / 10001f64.powf(1.5));
        assert!((m.diffusion_prime(x) - expect).abs() < 1e-14);
        assert!((expect - 0.035).abs() < 1e-5);
        let h = 1e-4;
        let fd = (m.diffusion(x + h) - m.diffusion(x - h)) / (2.0 * h);
        assert!(((fd - m.diffusion_prime(x)) / fd).abs() < 1e-6);
        assert_eq!(m.diffusion_prime(0.0), 0.0);
    }

    #[test]
    fn pcev_close_to_bs_for_large_prices() {
        let (sigma, delta) = (0.07, 0.5);
        for x0 in [100.0, 400.0, 2500.0] {
            let vartheta = sigma * f64::powf(x0, 1.0 - delta);
            let m = Model::pseudo_cev(0.15, vartheta, delta, x0).unwrap();
            assert!(((m.diffusion(x0) - sigma * x0) / (sigma * x0)).abs() < 1e-4);
        }
    }

    #[test]
    fn exact_cdf() {
        let m = bs();
        let dt = 0.1;
        let median = 100.0 * ((0.15f64 - 0.5 * 0.07 * 0.07) * dt).exp();
        assert!((m.conditional_cdf_exact(median, 100.0, dt).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(m.conditional_cdf_exact(0.0, 100.0, dt).unwrap(), 0.0);
        assert_eq!(m.conditional_cdf_exact(f64::INFINITY, 100.0, dt).unwrap(), 1.0);
        // Φ(-0.014755 / 0.0221359)
        let p = m.conditional_cdf_exact(100.0, 100.0, dt).unwrap();
        assert!((p - 0.252_53).abs() < 5e-5, "{p}");
        assert!(pcev().conditional_cdf_exact(100.0, 100.0, dt).is_err());
        let flat = Model::black_scholes(0.15, 0.0, 100.0).unwrap();
        let fwd = 100.0 * (0.15f64 * dt).exp();
        assert_eq!(flat.conditional_cdf_exact(fwd * 1.0001, 100.0, dt).unwrap(), 1.0);
        assert_eq!(flat.conditional_cdf_exact(fwd * 0.9999, 100.0, dt).unwrap(), 0.0);
    }

    #[test]
    fn euler_cdf() {
        let m = bs();
        let dt = 0.1;
        assert!((m.conditional_cdf_euler(101.5, 100.0, dt) - 0.5).abs() < 1e-15);
        assert_eq!(m.conditional_cdf_euler(f64::INFINITY, 100.0, dt), 1.0);
        assert_eq!(m.conditional_cdf_euler(f64::NEG_INFINITY, 100.0, dt), 0.0);
        let p = m.conditional_cdf_euler(100.0, 100.0, dt);
        assert!((p - 0.249_01).abs() < 5e-5, "{p}");
    }

    #[test]
    fn euler_and_exact_cdfs_converge() {
        let m = bs();
        let gap = |dt: f64| {
            (0..=400)
                .map(|i| 80.0 + 0.1 * i as f64)
                .map(|z| (m.conditional_cdf_exact(z, 100.0, dt).unwrap() - m.conditional_cdf_euler(z, 100.0, dt)).abs())
                .fold(0.0, f64::max)
        };
        let (g1, g2, g3) = (gap(0.1), gap(0.05), gap(0.025));
        // The gap is driven by the lognormal skewness, which is O(sqrt(Δt)).
        assert!(g2 < 0.75 * g1 && g3 < 0.75 * g2, "{g1} {g2} {g3}");
        assert!(g3 < 0.01);
        for i in 0..200 {
            let z = 90.0 + 0.1 * i as f64;
            assert!(m.conditional_cdf_euler(z + 0.1, 100.0, 0.1) >= m.conditional_cdf_euler(z, 100.0, 0.1));
        }
    }

    #[test]
    fn validation_and_serde() {
        assert!(Model::black_scholes(0.1, -0.2, 100.0).is_err());
        assert!(Model::pseudo_cev(0.1, 0.7, 1.0, 100.0).is_err());
        assert!(Model::pseudo_cev(0.1, 0.0, 0.5, 100.0).is_err());
        assert!(Model::black_scholes(0.1, 0.2, 0.0).is_err());
        let m: Model = serde_json::from_str(r#"{"model":"bs","r":0.15,"sigma":0.07,"x0":100}"#).unwrap();
        assert_eq!(m, bs());
        let m: Model =
            serde_json::from_str(r#"{"model":"pcev","r":0.15,"vartheta":0.7,"delta":0.5,"x0":100}"#).unwrap();
        assert_eq!(m, pcev());
    }
}
