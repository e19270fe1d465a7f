//! Closed-form Black-Scholes prices of vanilla and continuously monitored
//! knock-out options (reflection formulas, no rebate).

use crate::contract::{BarrierContract, BarrierType, PayoffType};
use crate::error::{invalid, Result};
use crate::normal::cdf;

fn check(x0: f64, strike: f64, maturity: f64, r: f64, sigma: f64) -> Result<()> {
    if !(x0 > 0.0 && strike > 0.0 && maturity > 0.0) {
        return Err(invalid("x0, strike and maturity must be positive"));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(invalid("closed form needs a positive volatility"));
    }
    if !r.is_finite() {
        return Err(invalid("rate must be finite"));
    }
    Ok(())
}

/// `e^{-rT} E[(X_T - K)^+]` or the put analogue under lognormal dynamics.
pub fn bs_vanilla(x0: f64, strike: f64, maturity: f64, r: f64, sigma: f64, payoff: PayoffType) -> Result<f64> {
    check(x0, strike, maturity, r, sigma)?;
    let sd = sigma * maturity.sqrt();
    let d1 = ((x0 / strike).ln() + (r + 0.5 * sigma * sigma) * maturity) / sd;
    let d2 = d1 - sd;
    let df = (-r * maturity).exp();
    Ok(match payoff {
        PayoffType::Call => x0 * cdf(d1) - strike * df * cdf(d2),
        PayoffType::Put => strike * df * cdf(-d2) - x0 * cdf(-d1),
    })
}

/// Knock-out price of `contract` for `X_0 = x0` under Black-Scholes.
pub fn bs_barrier_closed_form(contract: &BarrierContract, x0: f64, r: f64, sigma: f64) -> Result<f64> {
    let BarrierContract {
        barrier_type,
        payoff_type,
        strike: k,
        barrier: h,
        maturity: t,
    } = *contract;
    check(x0, k, t, r, sigma)?;
    if !(h > 0.0) {
        return Err(invalid("barrier must be positive"));
    }
    if contract.is_knocked(x0) || h == x0 {
        return Ok(0.0);
    }
    if h == f64::INFINITY {
        return bs_vanilla(x0, k, t, r, sigma, payoff_type);
    }

    let sd = sigma * t.sqrt();
    let mu = (r - 0.5 * sigma * sigma) / (sigma * sigma);
    let shift = (1.0 + mu) * sd;
    let df = (-r * t).exp();
    let phi = match payoff_type {
        PayoffType::Call => 1.0,
        PayoffType::Put => -1.0,
    };
    let eta = match barrier_type {
        BarrierType::DownAndOut => 1.0,
        BarrierType::UpAndOut => -1.0,
    };
    let x1 = (x0 / k).ln() / sd + shift;
    let x2 = (x0 / h).ln() / sd + shift;
    let y1 = (h * h / (x0 * k)).ln() / sd + shift;
    let y2 = (h / x0).ln() / sd + shift;
    let log_ratio = (h / x0).ln();

    let a = phi * x0 * cdf(phi * x1) - phi * k * df * cdf(phi * (x1 - sd));
    let b = phi * x0 * cdf(phi * x2) - phi * k * df * cdf(phi * (x2 - sd));
    // image terms; the powers of H/x0 can be huge while the normal factor
    // underflows, so multiply in log space
    let image = |y: f64| {
        let p1 = cdf(eta * y);
        let p2 = cdf(eta * (y - sd));
        let t1 = if p1 > 0.0 { (2.0 * (mu + 1.0) * log_ratio + p1.ln()).exp() } else { 0.0 };
        let t2 = if p2 > 0.0 { (2.0 * mu * log_ratio + p2.ln()).exp() } else { 0.0 };
        phi * x0 * t1 - phi * k * df * t2
    };
    let c = image(y1);
    let d = image(y2);

    let price = match (barrier_type, payoff_type) {
        (BarrierType::UpAndOut, PayoffType::Call) => {
            if k >= h {
                0.0
            } else {
                a - b + c - d
            }
        }
        (BarrierType::UpAndOut, PayoffType::Put) => {
            if k >= h {
                b - d
            } else {
                a - c
            }
        }
        (BarrierType::DownAndOut, PayoffType::Call) => {
            if k > h {
                a - c
            } else {
                b - d
            }
        }
        (BarrierType::DownAndOut, PayoffType::Put) => {
            if k > h {
                a - b + c - d
            } else {
                0.0
            }
        }
    };
    Ok(price.max(0.0))
}
