//! Transition probabilities of the quantized price chain.
//!
//! The probability of moving from level `x_i` at date `k-1` to the Voronoi
//! cell of level `x_j` at date `k` is estimated by conditioning at the cell's
//! own point: `p_ij = F(b_{j+1}; x_i) - F(b_j; x_i)` where `b` are the
//! midpoint boundaries of the next grid and `F(·; x)` is a one-step
//! conditional distribution function.

use crate::brownian::BrownianProductQuantizer;
use crate::error::{invalid, Error, Result};
use crate::model::{lognormal_cdf, Model};
use crate::normal;
use crate::path_quantization::{quantize_price_process, QuantizedPriceGrid};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Which one-step conditional law drives the transition estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CdfMode {
    /// Closed-form law (lognormal, Black-Scholes only).
    Exact,
    /// Gaussian law of one Euler step.
    Euler,
}

impl CdfMode {
    /// Exact when the model has a closed-form law, Euler otherwise.
    pub fn preferred(model: &Model) -> Self {
        match model {
            Model::BlackScholes { .. } => CdfMode::Exact,
            Model::PseudoCev { .. } => CdfMode::Euler,
        }
    }
}

/// Row-stochastic matrix `p_ij` between two consecutive grids.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    pub step: usize,
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    /// Largest `|1 - row sum|` before rows were renormalized.
    pub max_deficit: f64,
}

impl TransitionMatrix {
    pub fn from_rows(step: usize, rows: Vec<Vec<f64>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged transition rows".into()));
        }
        Ok(Self {
            step,
            rows: rows.len(),
            cols,
            data: rows.into_iter().flatten().collect(),
            max_deficit: 0.0,
        })
    }

    pub fn identity(step: usize, n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self {
            step,
            rows: n,
            cols: n,
            data,
            max_deficit: 0.0,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }
}

/// `[0, (x_1+x_2)/2, …, (x_{d-1}+x_d)/2, +∞]`.
pub fn cell_boundaries(grid: &[f64]) -> Vec<f64> {
    let mut b = Vec::with_capacity(grid.len() + 1);
    b.push(0.0);
    b.extend(grid.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    b.push(f64::INFINITY);
    b
}

/// Transition matrix from `grid_prev` to the cells of `grid_next` over `dt`.
///
/// The outermost boundaries get `F = 0` and `F = 1`, so the bottom cell
/// absorbs any Gaussian mass below zero and the top cell the mass up to
/// `+∞`; rows are then renormalized to sum to one.
pub fn transition_matrix(
    model: &Model,
    grid_prev: &[f64],
    grid_next: &[f64],
    dt: f64,
    mode: CdfMode,
    step: usize,
) -> Result<TransitionMatrix> {
    if grid_prev.is_empty() || grid_next.is_empty() {
        return Err(Error::DimensionMismatch("empty grid".into()));
    }
    if !(dt > 0.0) {
        return Err(invalid("time step must be positive"));
    }
    if mode == CdfMode::Exact && !matches!(model, Model::BlackScholes { .. }) {
        return Err(Error::Unsupported(format!(
            "exact transition law unavailable for {}",
            model.name()
        )));
    }
    let bounds = cell_boundaries(grid_next);
    let inner = &bounds[1..bounds.len() - 1];
    let cols = grid_next.len();

    let cdf_row = |x: f64, out: &mut [f64]| {
        // out has cols + 1 entries
        out[0] = 0.0;
        out[cols] = 1.0;
        match (mode, model) {
            (CdfMode::Exact, &Model::BlackScholes { r, sigma, .. }) => {
                for (o, &b) in out[1..cols].iter_mut().zip(inner) {
                    *o = lognormal_cdf(r, sigma, b, x, dt);
                }
            }
            _ => {
                let mean = x + model.drift(x) * dt;
                let sd = model.diffusion(x) * dt.sqrt();
                for (o, &b) in out[1..cols].iter_mut().zip(inner) {
                    *o = if sd == 0.0 {
                        if b >= mean { 1.0 } else { 0.0 }
                    } else {
                        normal::cdf((b - mean) / sd)
                    };
                }
            }
        }
    };

    let rows: Vec<(Vec<f64>, f64)> = grid_prev
        .par_iter()
        .map(|&x| {
            let mut f = vec![0.0; cols + 1];
            cdf_row(x, &mut f);
            let mut row: Vec<f64> = f.windows(2).map(|w| (w[1] - w[0]).max(0.0)).collect();
            let sum: f64 = row.iter().sum();
            let deficit = (1.0 - sum).abs();
            if sum > 0.0 {
                row.iter_mut().for_each(|p| *p /= sum);
            }
            (row, deficit)
        })
        .collect();

    let max_deficit = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let mut m = TransitionMatrix::from_rows(step, rows.into_iter().map(|r| r.0).collect())?;
    m.max_deficit = max_deficit;
    Ok(m)
}

/// Pushes a unit mass at `x0_cell` through the chain: `w_k = w_{k-1} p_k`.
pub fn chain_marginals(matrices: &[TransitionMatrix], x0_cell: usize) -> Result<Vec<Vec<f64>>> {
    let first = matrices
        .first()
        .ok_or_else(|| invalid("chain needs at least one transition matrix"))?;
    if x0_cell >= first.rows() {
        return Err(Error::DimensionMismatch(format!(
            "x0 cell {x0_cell} outside {} source states",
            first.rows()
        )));
    }
    let mut w = vec![0.0; first.rows()];
    w[x0_cell] = 1.0;
    let mut out = vec![w.clone()];
    for m in matrices {
        w = left_multiply(&w, m)?;
        out.push(w.clone());
    }
    Ok(out)
}

/// Row vector times matrix.
pub(crate) fn left_multiply(w: &[f64], m: &TransitionMatrix) -> Result<Vec<f64>> {
    if w.len() != m.rows() {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} against a {}x{} matrix",
            w.len(),
            m.rows(),
            m.cols()
        )));
    }
    let mut out = vec![0.0; m.cols()];
    for (i, &wi) in w.iter().enumerate() {
        if wi == 0.0 {
            continue;
        }
        for (o, p) in out.iter_mut().zip(m.row(i)) {
            *o += wi * p;
        }
    }
    Ok(out)
}

/// The quantized price chain: grids at every date plus the transition
/// matrices between them. The first matrix has a single source row, the
/// deterministic initial price.
#[derive(Debug, Clone)]
pub struct QuantizedChain {
    pub model: Model,
    pub grid: QuantizedPriceGrid,
    pub matrices: Vec<TransitionMatrix>,
    pub mode: CdfMode,
}

impl QuantizedChain {
    pub fn build(
        model: &Model,
        quantizer: &BrownianProductQuantizer,
        n_steps: usize,
        substeps: usize,
        mode: CdfMode,
    ) -> Result<Self> {
        let grid = quantize_price_process(model, quantizer, n_steps, substeps)?;
        let dt = grid.dt();
        let start = [model.x0()];
        let mut matrices = Vec::with_capacity(n_steps);
        for k in 1..=n_steps {
            let prev: &[f64] = if k == 1 { &start } else { grid.grid_at(k - 1)? };
            matrices.push(transition_matrix(model, prev, grid.grid_at(k)?, dt, mode, k)?);
        }
        Ok(Self {
            model: *model,
            grid,
            matrices,
            mode,
        })
    }

    pub fn n_steps(&self) -> usize {
        self.grid.n_steps
    }

    /// Source levels of step `k` (1-based): `[x0]` for the first step.
    pub fn source_levels(&self, k: usize) -> Vec<f64> {
        if k == 1 {
            vec![self.model.x0()]
        } else {
            self.grid.grids()[k - 1].clone()
        }
    }

    /// CSV dump of the nonzero entries with columns `k,i,j,p`.
    pub fn write_transitions_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "i", "j", "p"])?;
        for m in &self.matrices {
            for i in 0..m.rows() {
                for (j, &p) in m.row(i).iter().enumerate() {
                    if p != 0.0 {
                        w.write_record(&[m.step.to_string(), i.to_string(), j.to_string(), p.to_string()])?;
                    }
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}
