//! Barrier prices from the quantized chain by forward induction.
//!
//! The kernel of step `k` weights each transition probability with the
//! probability that the Brownian bridge between the two levels stays on the
//! live side of the barrier, `Ĥ_k^{ij} = g(x_i, x_j) p̂_k^{ij}`. The measure
//! `π̂_k = π̂_{k-1} Ĥ_k` then carries the surviving mass and the price is the
//! discounted payoff integrated against `π̂_n`.

use crate::bridge::BridgeParams;
use crate::contract::{BarrierContract, PayoffType};
use crate::error::{invalid, Error, Result};
use crate::model::Model;
use crate::transition::{left_multiply, QuantizedChain, TransitionMatrix};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::time::Instant;

/// Sub-probability measure `π̂_k` over the levels of date `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedMeasure {
    pub step: usize,
    pub values: Vec<f64>,
}

impl QuantizedMeasure {
    pub fn mass(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// Call and put prices read off the same terminal measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantPrice {
    pub contract: BarrierContract,
    pub call: f64,
    pub put: f64,
    /// Total mass of `π̂_n`, the quantized no-knockout probability.
    pub survival: f64,
    pub elapsed: f64,
}

impl QuantPrice {
    /// Price of the contract's own payoff.
    pub fn price(&self) -> f64 {
        match self.contract.payoff_type {
            PayoffType::Call => self.call,
            PayoffType::Put => self.put,
        }
    }
}

/// `Ĥ^{ij} = g(x_i, x_j) p̂^{ij}` with `g` the bridge survival probability of
/// the contract and the bridge diffusion frozen at `σ(x_i)`.
pub fn quantized_kernel(
    model: &Model,
    contract: &BarrierContract,
    grid_prev: &[f64],
    grid_next: &[f64],
    transitions: &TransitionMatrix,
    n_steps: usize,
) -> Result<TransitionMatrix> {
    kernel_rows(model, contract, grid_prev, grid_next, transitions, n_steps, None)
}

// Rows outside `active` are left at zero without evaluating anything.
fn kernel_rows(
    model: &Model,
    contract: &BarrierContract,
    grid_prev: &[f64],
    grid_next: &[f64],
    transitions: &TransitionMatrix,
    n_steps: usize,
    active: Option<&[bool]>,
) -> Result<TransitionMatrix> {
    if transitions.rows() != grid_prev.len() || transitions.cols() != grid_next.len() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} transitions between grids of {} and {} levels",
            transitions.rows(),
            transitions.cols(),
            grid_prev.len(),
            grid_next.len()
        )));
    }
    let rows: Vec<Vec<f64>> = grid_prev
        .par_iter()
        .enumerate()
        .map(|(i, &x)| {
            if active.is_some_and(|a| !a[i]) {
                return Ok(vec![0.0; grid_next.len()]);
            }
            let bridge = BridgeParams::new(n_steps, contract.maturity, model.diffusion(x))?;
            Ok(grid_next
                .iter()
                .zip(transitions.row(i))
                .map(|(&y, &p)| contract.survival(x, y, &bridge) * p)
                .collect())
        })
        .collect::<Result<_>>()?;
    TransitionMatrix::from_rows(transitions.step, rows)
}

/// `π̂_0 = δ_{x0_cell}`, `π̂_k = π̂_{k-1} Ĥ_k`; returns every `π̂_k`.
pub fn forward_induction_all(kernels: &[TransitionMatrix], x0_cell: usize) -> Result<Vec<QuantizedMeasure>> {
    let first = kernels
        .first()
        .ok_or_else(|| invalid("forward induction needs at least one kernel"))?;
    if x0_cell >= first.rows() {
        return Err(Error::DimensionMismatch(format!(
            "x0 cell {x0_cell} outside {} source states",
            first.rows()
        )));
    }
    let mut pi = vec![0.0; first.rows()];
    pi[x0_cell] = 1.0;
    let mut out = vec![QuantizedMeasure { step: 0, values: pi }];
    for (k, h) in kernels.iter().enumerate() {
        let next = left_multiply(&out[k].values, h)?;
        out.push(QuantizedMeasure { step: k + 1, values: next });
    }
    Ok(out)
}

/// Terminal measure `π̂_n` of [`forward_induction_all`].
pub fn forward_induction(kernels: &[TransitionMatrix], x0_cell: usize) -> Result<QuantizedMeasure> {
    Ok(forward_induction_all(kernels, x0_cell)?.pop().expect("nonempty"))
}

/// All quantized kernels of a chain for one contract.
pub fn chain_kernels(chain: &QuantizedChain, contract: &BarrierContract) -> Result<Vec<TransitionMatrix>> {
    check_horizon(chain, contract)?;
    (1..=chain.n_steps())
        .map(|k| {
            quantized_kernel(
                &chain.model,
                contract,
                &chain.source_levels(k),
                chain.grid.grid_at(k)?,
                &chain.matrices[k - 1],
                chain.n_steps(),
            )
        })
        .collect()
}

/// Zeroes the kernel rows whose source level is already knocked out.
/// Those rows are zero by construction, so this never changes a price.
pub fn prune_knocked_rows(kernels: &mut [TransitionMatrix], chain: &QuantizedChain, contract: &BarrierContract) -> Result<()> {
    let mut pruned = Vec::with_capacity(kernels.len());
    for (idx, h) in kernels.iter().enumerate() {
        let levels = chain.source_levels(idx + 1);
        let rows = (0..h.rows())
            .map(|i| {
                if contract.is_knocked(levels[i]) {
                    vec![0.0; h.cols()]
                } else {
                    h.row(i).to_vec()
                }
            })
            .collect();
        pruned.push(TransitionMatrix::from_rows(h.step, rows)?);
    }
    kernels.clone_from_slice(&pruned);
    Ok(())
}

fn check_horizon(chain: &QuantizedChain, contract: &BarrierContract) -> Result<()> {
    contract.validate()?;
    if (chain.grid.horizon - contract.maturity).abs() > 1e-12 * contract.maturity {
        return Err(invalid(format!(
            "contract maturity {} differs from the chain horizon {}",
            contract.maturity, chain.grid.horizon
        )));
    }
    Ok(())
}

/// Prices call and put of the contract from one terminal measure.
///
/// Kernels are built one step at a time and dropped after use. Rows whose
/// source level is knocked out or carries no mass are skipped, which gives
/// the same bits as the full product since those rows only add zeros.
pub fn price_barrier(chain: &QuantizedChain, contract: &BarrierContract) -> Result<QuantPrice> {
    price_barrier_with(chain, contract, true)
}

/// [`price_barrier`] with row pruning switched on or off.
pub fn price_barrier_with(chain: &QuantizedChain, contract: &BarrierContract, prune: bool) -> Result<QuantPrice> {
    check_horizon(chain, contract)?;
    let start = Instant::now();
    let n = chain.n_steps();
    let mut pi = vec![1.0];
    for k in 1..=n {
        let levels = chain.source_levels(k);
        let active: Vec<bool> = levels
            .iter()
            .zip(&pi)
            .map(|(&x, &w)| w != 0.0 && !contract.is_knocked(x))
            .collect();
        let h = kernel_rows(
            &chain.model,
            contract,
            &levels,
            chain.grid.grid_at(k)?,
            &chain.matrices[k - 1],
            n,
            prune.then_some(active.as_slice()),
        )?;
        pi = if prune {
            left_multiply(&pi, &h)?
        } else {
            dense_left_multiply(&pi, &h)
        };
    }
    let terminal = chain.grid.grid_at(n)?;
    let discount = (-chain.model.rate() * contract.maturity).exp();
    let (mut call, mut put, mut survival) = (0.0, 0.0, 0.0);
    for (&w, &x) in pi.iter().zip(terminal) {
        call += w * PayoffType::Call.payoff(contract.strike, x);
        put += w * PayoffType::Put.payoff(contract.strike, x);
        survival += w;
    }
    Ok(QuantPrice {
        contract: *contract,
        call: discount * call,
        put: discount * put,
        survival,
        elapsed: start.elapsed().as_secs_f64(),
    })
}

fn dense_left_multiply(w: &[f64], m: &TransitionMatrix) -> Vec<f64> {
    let mut out = vec![0.0; m.cols()];
    for (i, &wi) in w.iter().enumerate() {
        for (o, p) in out.iter_mut().zip(m.row(i)) {
            *o += wi * p;
        }
    }
    out
}

/// Prices the contract for several barrier levels on the same chain.
pub fn price_barriers(chain: &QuantizedChain, contract: &BarrierContract, barriers: &[f64]) -> Result<Vec<QuantPrice>> {
    barriers
        .iter()
        .map(|&l| price_barrier(chain, &contract.with_barrier(l)))
        .collect()
}
