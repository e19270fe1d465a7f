//! Knock-out barrier contracts.

use crate::bridge::{down_survival, up_survival, BridgeParams};
use crate::error::{invalid, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BarrierType {
    UpAndOut,
    DownAndOut,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PayoffType {
    Call,
    Put,
}

impl PayoffType {
    #[inline]
    pub fn payoff(self, strike: f64, x: f64) -> f64 {
        match self {
            PayoffType::Call => (x - strike).max(0.0),
            PayoffType::Put => (strike - x).max(0.0),
        }
    }
}

impl FromStr for BarrierType {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "up-and-out" | "up" | "uo" => Ok(BarrierType::UpAndOut),
            "down-and-out" | "down" | "do" => Ok(BarrierType::DownAndOut),
            _ => Err(invalid(format!("unknown barrier type '{s}' (expected up-and-out or down-and-out)"))),
        }
    }
}

impl FromStr for PayoffType {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "call" => Ok(PayoffType::Call),
            "put" => Ok(PayoffType::Put),
            _ => Err(invalid(format!("unknown payoff '{s}' (expected call or put)"))),
        }
    }
}

impl fmt::Display for BarrierType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BarrierType::UpAndOut => "up-and-out",
            BarrierType::DownAndOut => "down-and-out",
        })
    }
}

impl fmt::Display for PayoffType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PayoffType::Call => "call",
            PayoffType::Put => "put",
        })
    }
}

/// Knock-out option with strike `K`, barrier `L` and maturity `T`,
/// continuously monitored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarrierContract {
    pub barrier_type: BarrierType,
    pub payoff_type: PayoffType,
    pub strike: f64,
    pub barrier: f64,
    pub maturity: f64,
}

impl BarrierContract {
    pub fn new(
        barrier_type: BarrierType,
        payoff_type: PayoffType,
        strike: f64,
        barrier: f64,
        maturity: f64,
    ) -> Result<Self> {
        let c = Self {
            barrier_type,
            payoff_type,
            strike,
            barrier,
            maturity,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn up_and_out_call(strike: f64, barrier: f64, maturity: f64) -> Result<Self> {
        Self::new(BarrierType::UpAndOut, PayoffType::Call, strike, barrier, maturity)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.strike > 0.0 && self.strike.is_finite()) {
            return Err(invalid("strike must be positive"));
        }
        // an infinite up barrier is allowed: it prices the vanilla option
        if !(self.barrier > 0.0) || self.barrier.is_nan() {
            return Err(invalid("barrier must be positive"));
        }
        if !(self.maturity > 0.0 && self.maturity.is_finite()) {
            return Err(invalid("maturity must be positive"));
        }
        Ok(())
    }

    pub fn with_barrier(&self, barrier: f64) -> Self {
        Self { barrier, ..*self }
    }

    pub fn with_payoff(&self, payoff_type: PayoffType) -> Self {
        Self { payoff_type, ..*self }
    }

    #[inline]
    pub fn payoff(&self, x: f64) -> f64 {
        self.payoff_type.payoff(self.strike, x)
    }

    /// Whether a price sits on the knocked side of the barrier.
    #[inline]
    pub fn is_knocked(&self, x: f64) -> bool {
        match self.barrier_type {
            BarrierType::UpAndOut => x > self.barrier,
            BarrierType::DownAndOut => x < self.barrier,
        }
    }

    /// Probability that the bridge from `x` to `y` stays on the live side.
    #[inline]
    pub fn survival(&self, x: f64, y: f64, p: &BridgeParams) -> f64 {
        match self.barrier_type {
            BarrierType::UpAndOut => up_survival(x, y, self.barrier, p),
            BarrierType::DownAndOut => down_survival(x, y, self.barrier, p),
        }
    }
}
