//! Barrier option pricing by marginal functional quantization.
//!
//! The crate builds product quantizers of Brownian motion from its
//! Karhunen-Loève expansion, pushes every quantizer path through the
//! companion ODE of the price dynamics to obtain one price grid per pricing
//! date, estimates the transition probabilities of the resulting Markov
//! chain and prices continuously monitored knock-out options by a forward
//! induction that weights each transition with the Brownian-bridge survival
//! probability. A Brownian-bridge Monte Carlo pricer and the closed-form
//! Black-Scholes barrier prices are provided as baselines.

pub mod bridge;
pub mod cli;
pub mod contract;
pub mod brownian;
pub mod closed_form;
pub mod error;
pub mod mc;
pub mod model;
pub mod normal;
pub mod path_quantization;
pub mod quant_pricer;
pub mod quantizer;
pub mod rk;
pub mod transition;

pub use error::{Error, Result};
