//! Product functional quantization of Brownian motion on `[0, T]`.
//!
//! Brownian motion has the Karhunen-Loève expansion
//! `W_t = Σ sqrt(λ_k) ξ_k e_k(t)` with explicit sine eigenfunctions. A
//! product quantizer keeps the first `L` coordinates and quantizes each
//! `ξ_k` with an optimal `N_k`-point normal quantizer.

use crate::error::{invalid, Result};
use crate::quantizer::{optimal_normal_quantizer, GaussianQuantizer};
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::OnceLock;

/// Largest marginal quantizer size considered by the decomposition search.
pub const MAX_FACTOR: usize = 64;
/// Default cap on the number of quantized coordinates.
pub const DEFAULT_TRUNCATION: usize = 20;

/// `λ_k = (T / (π (k - 1/2)))²`, `k ≥ 1`.
pub fn kl_eigenvalue(k: usize, horizon: f64) -> f64 {
    let f = horizon / (PI * (k as f64 - 0.5));
    f * f
}

/// `e_k(t) = sqrt(2/T) sin(π (k - 1/2) t / T)`.
pub fn kl_eigenfunction(k: usize, horizon: f64, t: f64) -> f64 {
    (2.0 / horizon).sqrt() * (PI * (k as f64 - 0.5) * t / horizon).sin()
}

fn kl_eigenfunction_derivative(k: usize, horizon: f64, t: f64) -> f64 {
    let w = PI * (k as f64 - 0.5) / horizon;
    (2.0 / horizon).sqrt() * w * (w * t).cos()
}

/// Optimal normal quantizers for every size `1..=MAX_FACTOR`, built once.
fn quantizer_table() -> &'static [GaussianQuantizer] {
    static TABLE: OnceLock<Vec<GaussianQuantizer>> = OnceLock::new();
    TABLE.get_or_init(|| {
        (1..=MAX_FACTOR)
            .map(|m| optimal_normal_quantizer(m).expect("normal quantizer table"))
            .collect()
    })
}

/// Cached optimal quantizer of N(0,1) with `m` levels (`1 ≤ m ≤ MAX_FACTOR`).
pub fn cached_normal_quantizer(m: usize) -> Result<&'static GaussianQuantizer> {
    if m == 0 || m > MAX_FACTOR {
        return Err(invalid(format!("marginal quantizer size {m} outside 1..={MAX_FACTOR}")));
    }
    Ok(&quantizer_table()[m - 1])
}

/// Factor sizes `N_1 ≥ … ≥ N_L` of a product quantizer.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductDecomposition {
    pub budget: usize,
    pub factors: Vec<usize>,
    pub residual_distortion: f64,
}

impl ProductDecomposition {
    /// `d_N`, the number of quantizer paths.
    pub fn size(&self) -> usize {
        self.factors.iter().product()
    }
}

/// Quadratic error `‖W - Ŵ‖²` of the product quantizer with the given factors:
/// quantized coordinates contribute `λ_k d(N_k)`, the dropped ones their full
/// variance `λ_k`. The tail uses `Σ_k λ_k = T²/2`.
pub fn product_distortion(factors: &[usize], horizon: f64) -> Result<f64> {
    let mut kept = 0.0;
    let mut quantized = 0.0;
    for (i, &n) in factors.iter().enumerate() {
        let lambda = kl_eigenvalue(i + 1, horizon);
        kept += lambda;
        quantized += lambda * cached_normal_quantizer(n)?.distortion;
    }
    Ok(quantized + (0.5 * horizon * horizon - kept).max(0.0))
}

/// Best product decomposition `N_1 × … × N_L ≤ budget`, `N_k ≥ 2`,
/// `L ≤ truncation`, found by exhaustive depth-first search over
/// nonincreasing factor sequences.
pub fn optimal_decomposition(budget: usize, truncation: usize) -> Result<ProductDecomposition> {
    if budget < 2 {
        return Err(invalid("decomposition budget must be at least 2"));
    }
    if truncation == 0 {
        return Err(invalid("truncation must be at least 1"));
    }
    // The argmin is invariant under T (λ_k scales with T²), so search at T = 1.
    let lambdas: Vec<f64> = (1..=truncation).map(|k| kl_eigenvalue(k, 1.0)).collect();
    let dist: Vec<f64> = quantizer_table().iter().map(|q| q.distortion).collect();

    struct Search<'a> {
        lambdas: &'a [f64],
        dist: &'a [f64],
        budget: usize,
        best: (f64, Vec<usize>),
    }

    impl Search<'_> {
        // `error` is Σ λ_k (d(N_k) - 1) over the chosen prefix; the total
        // error is 1/2 + error.
        fn visit(&mut self, prefix: &mut Vec<usize>, product: usize, error: f64) {
            if !prefix.is_empty() && error < self.best.0 {
                self.best = (error, prefix.clone());
            }
            let depth = prefix.len();
            if depth == self.lambdas.len() {
                return;
            }
            let cap = prefix.last().copied().unwrap_or(MAX_FACTOR).min(self.budget / product);
            for n in 2..=cap {
                let gain = self.lambdas[depth] * (self.dist[n - 1] - 1.0);
                prefix.push(n);
                self.visit(prefix, product * n, error + gain);
                prefix.pop();
            }
        }
    }

    let mut search = Search {
        lambdas: &lambdas,
        dist: &dist,
        budget,
        best: (f64::INFINITY, Vec::new()),
    };
    search.visit(&mut Vec::new(), 1, 0.0);
    let factors = search.best.1;
    let residual_distortion = product_distortion(&factors, 1.0)?;
    Ok(ProductDecomposition {
        budget,
        factors,
        residual_distortion,
    })
}

/// Product quantizer of Brownian motion on `[0, T]`.
///
/// Paths are numbered in mixed-radix order of their multi-index
/// `(i_1, …, i_L)` with `i_1` the most significant digit, so path `m` and
/// path `d_N - 1 - m` are mirror images.
#[derive(Debug, Clone)]
pub struct BrownianProductQuantizer {
    pub decomposition: ProductDecomposition,
    pub horizon: f64,
    pub marginal_quantizers: Vec<GaussianQuantizer>,
    // row-major, d_N × L: sqrt(λ_k) x_{i_k}
    coefficients: Vec<f64>,
    weights: Vec<f64>,
}

impl BrownianProductQuantizer {
    /// Quantizer with explicitly chosen factor sizes.
    pub fn with_factors(factors: &[usize], horizon: f64) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(invalid("horizon must be positive"));
        }
        if factors.is_empty() || factors.iter().any(|&n| n < 1) {
            return Err(invalid("factors must be nonempty and positive"));
        }
        let marginal_quantizers: Vec<GaussianQuantizer> = factors
            .iter()
            .map(|&n| cached_normal_quantizer(n).cloned())
            .collect::<Result<_>>()?;
        let levels = factors.len();
        let size: usize = factors.iter().product();
        let scale: Vec<f64> = (1..=levels).map(|k| kl_eigenvalue(k, horizon).sqrt()).collect();

        let mut coefficients = Vec::with_capacity(size * levels);
        let mut weights = Vec::with_capacity(size);
        let mut index = vec![0usize; levels];
        for _ in 0..size {
            let mut w = 1.0;
            for k in 0..levels {
                let q = &marginal_quantizers[k];
                coefficients.push(scale[k] * q.points[index[k]]);
                w *= q.weights[index[k]];
            }
            weights.push(w);
            // increment the mixed-radix counter, last digit fastest
            for k in (0..levels).rev() {
                index[k] += 1;
                if index[k] < factors[k] {
                    break;
                }
                index[k] = 0;
            }
        }
        let residual_distortion = product_distortion(factors, horizon)?;
        Ok(Self {
            decomposition: ProductDecomposition {
                budget: size,
                factors: factors.to_vec(),
                residual_distortion,
            },
            horizon,
            marginal_quantizers,
            coefficients,
            weights,
        })
    }

    /// Quantizer built on the optimal decomposition for `budget`.
    pub fn optimal(budget: usize, horizon: f64) -> Result<Self> {
        let decomposition = optimal_decomposition(budget, DEFAULT_TRUNCATION)?;
        let mut q = Self::with_factors(&decomposition.factors, horizon)?;
        q.decomposition.budget = budget;
        Ok(q)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn levels(&self) -> usize {
        self.decomposition.factors.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, m: usize) -> f64 {
        self.weights[m]
    }

    /// KL coefficients `c_k = sqrt(λ_k) x_{i_k}` of path `m`.
    pub fn coefficients(&self, m: usize) -> &[f64] {
        let l = self.levels();
        &self.coefficients[m * l..(m + 1) * l]
    }

    /// Zero-based multi-index of path `m`.
    pub fn multi_index(&self, mut m: usize) -> Vec<usize> {
        let factors = &self.decomposition.factors;
        let mut idx = vec![0; factors.len()];
        for k in (0..factors.len()).rev() {
            idx[k] = m % factors[k];
            m /= factors[k];
        }
        idx
    }

    /// Index of the path whose multi-index is mirrored in every coordinate.
    pub fn mirror(&self, m: usize) -> usize {
        self.len() - 1 - m
    }

    fn check(&self, m: usize, t: f64) -> Result<()> {
        if m >= self.len() {
            return Err(invalid(format!("path index {m} out of range 0..{}", self.len())));
        }
        if !(0.0..=self.horizon).contains(&t) {
            return Err(invalid(format!("time {t} outside [0, {}]", self.horizon)));
        }
        Ok(())
    }

    /// `α_m(t) = Σ_k c_k e_k(t)`.
    pub fn path_value(&self, m: usize, t: f64) -> Result<f64> {
        self.check(m, t)?;
        Ok(self.value_unchecked(m, t))
    }

    /// `α'_m(t)`, the derivative of the finite sine series.
    pub fn path_derivative(&self, m: usize, t: f64) -> Result<f64> {
        self.check(m, t)?;
        Ok(self.derivative_unchecked(m, t))
    }

    pub(crate) fn value_unchecked(&self, m: usize, t: f64) -> f64 {
        self.coefficients(m)
            .iter()
            .enumerate()
            .map(|(k, c)| c * kl_eigenfunction(k + 1, self.horizon, t))
            .sum()
    }

    pub(crate) fn derivative_unchecked(&self, m: usize, t: f64) -> f64 {
        self.coefficients(m)
            .iter()
            .enumerate()
            .map(|(k, c)| c * kl_eigenfunction_derivative(k + 1, self.horizon, t))
            .sum()
    }

    /// One line per path: 1-based multi-index, weight, coefficients, with a
    /// leading `#` comment describing the decomposition.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "# budget {} horizon {} factors {} paths {}\n",
            self.decomposition.budget,
            self.horizon,
            self.decomposition
                .factors
                .iter()
                .map(|n| n.to_string())
                .collect::<Vec<_>>()
                .join("x"),
            self.len()
        );
        for m in 0..self.len() {
            let idx: Vec<String> = self.multi_index(m).iter().map(|i| (i + 1).to_string()).collect();
            let _ = write!(out, "{} {:.16e}", idx.join(" "), self.weights[m]);
            for c in self.coefficients(m) {
                let _ = write!(out, " {c:.16e}");
            }
            out.push('\n');
        }
        out
    }
}
