//! Marginal functional quantization of the price process.
//!
//! Each Brownian quantizer path `α_m` drives the companion ODE
//! `x' = b(x) - σσ'(x)/2 + σ(x) α_m'(t)`, `x(0) = x0`. The sorted values of
//! all solutions at a pricing date form the price grid for that date.

use crate::brownian::BrownianProductQuantizer;
use crate::error::{invalid, Error, Result};
use crate::model::Model;
use crate::rk::rk6_step;
use rayon::prelude::*;
use std::io::Write;

pub const DEFAULT_SUBSTEPS: usize = 4;

/// Price grids at the dates `t_k = kT/n`, `k = 0..=n`.
#[derive(Debug, Clone)]
pub struct QuantizedPriceGrid {
    pub n_steps: usize,
    pub horizon: f64,
    pub dates: Vec<f64>,
    grids: Vec<Vec<f64>>,
    path_weights: Vec<f64>,
    // ranks[k][m]: position of path m in grids[k]
    ranks: Vec<Vec<usize>>,
}

impl QuantizedPriceGrid {
    /// Ascending price levels at date `k`.
    pub fn grid_at(&self, k: usize) -> Result<&[f64]> {
        self.grids
            .get(k)
            .map(Vec::as_slice)
            .ok_or_else(|| invalid(format!("step index {k} outside 0..={}", self.n_steps)))
    }

    pub fn grids(&self) -> &[Vec<f64>] {
        &self.grids
    }

    /// Weights of the underlying Brownian quantizer paths, by path index.
    pub fn path_weights(&self) -> &[f64] {
        &self.path_weights
    }

    /// Rank of path `m` in the sorted grid of date `k`.
    pub fn rank(&self, k: usize, m: usize) -> usize {
        self.ranks[k][m]
    }

    /// Price reached by path `m` at date `k`.
    pub fn path_price(&self, k: usize, m: usize) -> f64 {
        self.grids[k][self.ranks[k][m]]
    }

    pub fn size(&self) -> usize {
        self.path_weights.len()
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.n_steps as f64
    }

    /// Path weights rearranged in grid order for date `k`.
    pub fn weights_by_rank(&self, k: usize) -> Vec<f64> {
        let mut w = vec![0.0; self.size()];
        for (m, &r) in self.ranks[k].iter().enumerate() {
            w[r] = self.path_weights[m];
        }
        w
    }

    /// `Σ_m w_m x_m(t_k)`.
    pub fn weighted_mean(&self, k: usize) -> f64 {
        (0..self.size())
            .map(|m| self.path_weights[m] * self.path_price(k, m))
            .sum()
    }

    /// CSV dump with columns `k,t_k,rank,price,weight`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "t_k", "rank", "price", "weight"])?;
        for k in 0..=self.n_steps {
            let weights = self.weights_by_rank(k);
            for (rank, price) in self.grids[k].iter().enumerate() {
                w.write_record(&[
                    k.to_string(),
                    self.dates[k].to_string(),
                    rank.to_string(),
                    price.to_string(),
                    weights[rank].to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Integrates the companion ODE of every quantizer path with `substeps`
/// RK6 steps per pricing interval and sorts the values at each date.
pub fn quantize_price_process(
    model: &Model,
    quantizer: &BrownianProductQuantizer,
    n_steps: usize,
    substeps: usize,
) -> Result<QuantizedPriceGrid> {
    model.validate()?;
    if n_steps == 0 || substeps == 0 {
        return Err(invalid("n_steps and substeps must be at least 1"));
    }
    let horizon = quantizer.horizon;
    let dt = horizon / n_steps as f64;
    let h = dt / substeps as f64;
    let x0 = model.x0();

    let paths: Vec<Vec<f64>> = (0..quantizer.len())
        .into_par_iter()
        .map(|m| {
            let rhs = |t: f64, x: f64| {
                model.corrected_drift(x) + model.diffusion(x) * quantizer.derivative_unchecked(m, t)
            };
            let mut values = Vec::with_capacity(n_steps + 1);
            values.push(x0);
            let mut x = x0;
            for k in 0..n_steps {
                for s in 0..substeps {
                    let t = k as f64 * dt + s as f64 * h;
                    x = rk6_step(&rhs, t, x, h);
                    let t_end = t + h;
                    if !x.is_finite() {
                        return Err(Error::NonFiniteState { path: m, time: t_end });
                    }
                    if x <= 0.0 {
                        return Err(Error::NonPositiveState {
                            path: m,
                            time: t_end,
                            value: x,
                        });
                    }
                }
                values.push(x);
            }
            Ok(values)
        })
        .collect::<Result<_>>()?;

    let size = paths.len();
    let mut grids = Vec::with_capacity(n_steps + 1);
    let mut ranks = Vec::with_capacity(n_steps + 1);
    for k in 0..=n_steps {
        let mut order: Vec<usize> = (0..size).collect();
        order.sort_by(|&a, &b| paths[a][k].total_cmp(&paths[b][k]).then(a.cmp(&b)));
        let mut rank = vec![0; size];
        for (r, &m) in order.iter().enumerate() {
            rank[m] = r;
        }
        grids.push(order.iter().map(|&m| paths[m][k]).collect());
        ranks.push(rank);
    }

    Ok(QuantizedPriceGrid {
        n_steps,
        horizon,
        dates: (0..=n_steps).map(|k| k as f64 * dt).collect(),
        grids,
        path_weights: quantizer.weights().to_vec(),
        ranks,
    })
}
