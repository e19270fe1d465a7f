//! Regular Brownian bridge Monte Carlo pricer.
//!
//! Paths follow the discrete Euler scheme. Between two dates the continuous
//! Euler scheme is a Brownian bridge, so its extremum is drawn by inverting
//! the bridge law (indicator estimator) or integrated out by multiplying the
//! bridge survival probabilities (conditional estimator).

use crate::bridge::{sample_bridge_max, sample_bridge_min, BridgeParams};
use crate::contract::{BarrierContract, BarrierType};
use crate::error::{invalid, Result};
use crate::model::Model;
use crate::normal;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::str::FromStr;
use std::time::Instant;

/// Paths per reduction block. Blocks are merged in index order, so results
/// do not depend on the number of threads.
const BLOCK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    /// `payoff · 1{simulated extremum on the live side}`.
    Indicator,
    /// `payoff · Π_k g(x_{k-1}, x_k)`.
    Conditional,
}

impl FromStr for Estimator {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "indicator" => Ok(Estimator::Indicator),
            "conditional" | "conditional-product" => Ok(Estimator::Conditional),
            _ => Err(invalid(format!("unknown estimator '{s}' (expected indicator or conditional)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub n_steps: usize,
    pub n_paths: usize,
    pub seed: u64,
    pub estimator: Estimator,
}

impl McConfig {
    pub fn new(n_steps: usize, n_paths: usize, seed: u64, estimator: Estimator) -> Result<Self> {
        let c = Self {
            n_steps,
            n_paths,
            seed,
            estimator,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_steps == 0 {
            return Err(invalid("Monte Carlo needs at least one time step"));
        }
        if self.n_paths == 0 {
            return Err(invalid("Monte Carlo needs at least one path"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McResult {
    pub price: f64,
    /// Per-sample variance of the discounted estimator.
    pub sample_variance: f64,
    /// `sqrt(sample_variance / M)`.
    pub std_error: f64,
    pub n_paths: usize,
    /// Wall-clock seconds of the whole simulation.
    pub elapsed: f64,
}

/// `X_0 = x0`, `X_{k+1} = X_k + b(X_k) T/n + σ(X_k) sqrt(T/n) Z_{k+1}`.
pub fn euler_path(model: &Model, horizon: f64, normals: &[f64]) -> Vec<f64> {
    let dt = horizon / normals.len() as f64;
    let sq = dt.sqrt();
    let mut x = model.x0();
    let mut out = Vec::with_capacity(normals.len() + 1);
    out.push(x);
    for &z in normals {
        x += model.drift(x) * dt + model.diffusion(x) * sq * z;
        out.push(x);
    }
    out
}

/// Uniform on the open interval `(0, 1)`: the midpoints of a 2^-52 grid.
#[inline]
pub fn open_uniform(rng: &mut impl RngCore) -> f64 {
    ((rng.next_u64() >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

/// Generator of path `path`: a ChaCha8 stream selected by the path index.
pub fn path_rng(seed: u64, path: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path);
    rng
}

/// Running mean and centred second moment.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    #[inline]
    fn push(&mut self, y: f64) {
        self.n += 1.0;
        let d = y - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (y - self.mean);
    }

    fn merge(&mut self, o: &Moments) {
        if o.n == 0.0 {
            return;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        self.mean += d * o.n / n;
        self.m2 += o.m2 + d * d * self.n * o.n / n;
        self.n = n;
    }

    fn variance(&self) -> f64 {
        if self.n > 1.0 {
            (self.m2 / (self.n - 1.0)).max(0.0)
        } else {
            0.0
        }
    }
}

/// Per path: terminal value, extremum driven by the bridge uniforms and the
/// survival product for every barrier.
struct PathSampler<'a> {
    model: &'a Model,
    contract: &'a BarrierContract,
    barriers: &'a [f64],
    n_steps: usize,
    want_product: bool,
}

impl PathSampler<'_> {
    // Writes the discounted samples of every (estimator, barrier) pair.
    fn run(&self, rng: &mut ChaCha8Rng, discount: f64, indicator: &mut [f64], product: &mut [f64]) {
        let n = self.n_steps;
        let horizon = self.contract.maturity;
        let dt = horizon / n as f64;
        let sq = dt.sqrt();
        let up = self.contract.barrier_type == BarrierType::UpAndOut;
        let mut x = self.model.x0();
        let mut extremum = x;
        product.iter_mut().for_each(|p| *p = 1.0);
        for _ in 0..n {
            let z = normal::quantile_fast(open_uniform(rng));
            let u = open_uniform(rng);
            let sigma = self.model.diffusion(x);
            let y = x + self.model.drift(x) * dt + sigma * sq * z;
            let bridge = BridgeParams {
                n_steps: n,
                horizon,
                sigma_x: sigma,
            };
            let e = if sigma == 0.0 {
                if up { x.max(y) } else { x.min(y) }
            } else if up {
                sample_bridge_max(x, y, u, &bridge)
            } else {
                sample_bridge_min(x, y, u, &bridge)
            };
            extremum = if up { extremum.max(e) } else { extremum.min(e) };
            if self.want_product {
                for (p, &l) in product.iter_mut().zip(self.barriers) {
                    if *p != 0.0 {
                        *p *= self.contract.with_barrier(l).survival(x, y, &bridge);
                    }
                }
            }
            x = y;
        }
        let pay = discount * self.contract.payoff(x);
        for (i, &l) in self.barriers.iter().enumerate() {
            let alive = if up { extremum <= l } else { extremum >= l };
            indicator[i] = if alive { pay } else { 0.0 };
            product[i] *= pay;
        }
    }
}

/// Both estimators for every barrier level from one set of paths.
/// Returns `(indicator, conditional)` results per barrier; the conditional
/// results are empty unless `with_conditional`.
pub fn rbb_simulate(
    model: &Model,
    contract: &BarrierContract,
    barriers: &[f64],
    n_steps: usize,
    n_paths: usize,
    seed: u64,
    with_conditional: bool,
) -> Result<(Vec<McResult>, Vec<McResult>)> {
    model.validate()?;
    contract.validate()?;
    McConfig::new(n_steps, n_paths, seed, Estimator::Indicator)?;
    for &l in barriers {
        contract.with_barrier(l).validate()?;
    }
    let start = Instant::now();
    let discount = (-model.rate() * contract.maturity).exp();
    let nb = barriers.len();
    let sampler = PathSampler {
        model,
        contract,
        barriers,
        n_steps,
        want_product: with_conditional,
    };
    let n_blocks = n_paths.div_ceil(BLOCK);
    let blocks: Vec<(Vec<Moments>, Vec<Moments>)> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let mut ind = vec![Moments::default(); nb];
            let mut cond = vec![Moments::default(); nb];
            let mut yi = vec![0.0; nb];
            let mut yc = vec![0.0; nb];
            for path in b * BLOCK..((b + 1) * BLOCK).min(n_paths) {
                let mut rng = path_rng(seed, path as u64);
                sampler.run(&mut rng, discount, &mut yi, &mut yc);
                for i in 0..nb {
                    ind[i].push(yi[i]);
                    if with_conditional {
                        cond[i].push(yc[i]);
                    }
                }
            }
            (ind, cond)
        })
        .collect();
    let mut ind = vec![Moments::default(); nb];
    let mut cond = vec![Moments::default(); nb];
    for (bi, bc) in &blocks {
        for i in 0..nb {
            ind[i].merge(&bi[i]);
            cond[i].merge(&bc[i]);
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let result = |m: &Moments| {
        let v = m.variance();
        McResult {
            price: m.mean,
            sample_variance: v,
            std_error: (v / n_paths as f64).sqrt(),
            n_paths,
            elapsed,
        }
    };
    let ind = ind.iter().map(result).collect();
    let cond = if with_conditional { cond.iter().map(result).collect() } else { Vec::new() };
    Ok((ind, cond))
}

/// Price of one contract with the configured estimator.
pub fn rbb_price(model: &Model, contract: &BarrierContract, cfg: &McConfig) -> Result<McResult> {
    Ok(rbb_price_barriers(model, contract, &[contract.barrier], cfg)?.remove(0))
}

/// Prices of the contract at several barrier levels from the same paths.
pub fn rbb_price_barriers(model: &Model, contract: &BarrierContract, barriers: &[f64], cfg: &McConfig) -> Result<Vec<McResult>> {
    cfg.validate()?;
    let cond = cfg.estimator == Estimator::Conditional;
    let (i, c) = rbb_simulate(model, contract, barriers, cfg.n_steps, cfg.n_paths, cfg.seed, cond)?;
    Ok(if cond { c } else { i })
}

/// Per-sample variances `(indicator, conditional)` on the same paths.
pub fn estimator_variance_comparison(model: &Model, contract: &BarrierContract, cfg: &McConfig) -> Result<(f64, f64)> {
    let (i, c) = rbb_simulate(model, contract, &[contract.barrier], cfg.n_steps, cfg.n_paths, cfg.seed, true)?;
    Ok((i[0].sample_variance, c[0].sample_variance))
}
