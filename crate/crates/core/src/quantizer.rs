//! Optimal quadratic quantizers of the standard normal distribution.
//!
//! Every cell quantity (mass, first and second moment) is evaluated in
//! closed form through the normal density and distribution function, so the
//! solver and the distortion are fully deterministic.

use crate::error::{invalid, Error, Result};
use crate::normal;
use std::fmt::Write as _;
use std::path::Path;

const MAX_ITERATIONS: usize = 10_000;
const POINT_TOLERANCE: f64 = 1e-12;
// Lloyd hands over to Newton once the points move less than this.
const LLOYD_HANDOVER: f64 = 1e-7;

/// An `n_levels`-point quantizer of N(0, 1) with its cell masses.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianQuantizer {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    pub distortion: f64,
}

impl GaussianQuantizer {
    pub fn n_levels(&self) -> usize {
        self.points.len()
    }

    /// Largest gap between a point and the conditional mean of its cell.
    pub fn stationarity_residual(&self) -> f64 {
        stationarity_residual(&self.points)
    }

    /// Writes the cache format: a `N <levels>` header, then `point weight`
    /// per line with 17 significant digits.
    pub fn to_cache_string(&self) -> String {
        let mut out = format!("N {}\n", self.n_levels());
        for (x, w) in self.points.iter().zip(&self.weights) {
            let _ = writeln!(out, "{x:.16e} {w:.16e}");
        }
        out
    }

    pub fn from_cache_str(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty quantizer file".into()))?;
        let n: usize = header
            .strip_prefix("N ")
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| Error::Parse(format!("bad header line `{header}`")))?;
        let mut points = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for line in lines {
            let mut cols = line.split_whitespace().map(str::parse::<f64>);
            match (cols.next(), cols.next(), cols.next()) {
                (Some(Ok(x)), Some(Ok(w)), None) => {
                    points.push(x);
                    weights.push(w);
                }
                _ => return Err(Error::Parse(format!("bad quantizer line `{line}`"))),
            }
        }
        if points.len() != n {
            return Err(Error::Parse(format!(
                "header announces {n} levels, found {}",
                points.len()
            )));
        }
        let distortion = distortion(&points)?;
        Ok(Self {
            points,
            weights,
            distortion,
        })
    }

    pub fn write_cache(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_cache_string())?;
        Ok(())
    }

    pub fn read_cache(path: &Path) -> Result<Self> {
        Self::from_cache_str(&std::fs::read_to_string(path)?)
    }
}

/// Per-cell closed-form moments of N(0,1) on the Voronoi cells of `points`.
struct Cells {
    mass: Vec<f64>,
    // ∫ z φ(z) dz over the cell
    first: Vec<f64>,
    // ∫ z² φ(z) dz over the cell
    second: Vec<f64>,
    // boundaries, length n + 1 with ∓∞ at the ends
    bounds: Vec<f64>,
}

fn midpoint_bounds(points: &[f64]) -> Vec<f64> {
    let mut b = Vec::with_capacity(points.len() + 1);
    b.push(f64::NEG_INFINITY);
    b.extend(points.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    b.push(f64::INFINITY);
    b
}

// z φ(z), vanishing at ±∞.
fn z_pdf(z: f64) -> f64 {
    if z.is_infinite() {
        0.0
    } else {
        z * normal::pdf(z)
    }
}

// Φ(b) - Φ(a), computed in whichever tail keeps relative precision.
fn normal_mass(a: f64, b: f64) -> f64 {
    if a > 0.0 {
        normal::cdf(-a) - normal::cdf(-b)
    } else {
        normal::cdf(b) - normal::cdf(a)
    }
}

fn cells(points: &[f64]) -> Cells {
    let bounds = midpoint_bounds(points);
    let n = points.len();
    let mut mass = Vec::with_capacity(n);
    let mut first = Vec::with_capacity(n);
    let mut second = Vec::with_capacity(n);
    for w in bounds.windows(2) {
        let (a, b) = (w[0], w[1]);
        let m = normal_mass(a, b);
        let pa = normal::pdf(a);
        let pb = normal::pdf(b);
        mass.push(m);
        first.push(pa - pb);
        second.push(m + z_pdf(a) - z_pdf(b));
    }
    Cells {
        mass,
        first,
        second,
        bounds,
    }
}

fn check_increasing(points: &[f64]) -> Result<()> {
    if points.is_empty() {
        return Err(invalid("quantizer needs at least one point"));
    }
    if points.iter().any(|x| !x.is_finite()) {
        return Err(invalid("quantizer points must be finite"));
    }
    if points.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("quantizer points must be strictly increasing"));
    }
    Ok(())
}

/// Voronoi cell masses of N(0,1) for an increasing point set.
pub fn quantizer_weights(points: &[f64]) -> Result<Vec<f64>> {
    check_increasing(points)?;
    Ok(cells(points).mass)
}

/// Quadratic distortion `E[min_i (Z - x_i)^2]`, evaluated cellwise in closed form.
pub fn distortion(points: &[f64]) -> Result<f64> {
    check_increasing(points)?;
    Ok(distortion_unchecked(points))
}

fn distortion_unchecked(points: &[f64]) -> f64 {
    let c = cells(points);
    points
        .iter()
        .enumerate()
        .map(|(i, &x)| c.second[i] - 2.0 * x * c.first[i] + x * x * c.mass[i])
        .sum()
}

fn stationarity_residual(points: &[f64]) -> f64 {
    let c = cells(points);
    points
        .iter()
        .enumerate()
        .map(|(i, &x)| (x - c.first[i] / c.mass[i]).abs())
        .fold(0.0, f64::max)
}

/// One Lloyd update: every point moves to the conditional mean of its cell.
fn lloyd_step(points: &[f64]) -> Vec<f64> {
    let c = cells(points);
    (0..points.len()).map(|i| c.first[i] / c.mass[i]).collect()
}

/// Runs plain Lloyd iterations from the quantile initialization and returns
/// the distortion after every iteration (the first entry is the initial one).
pub fn lloyd_trace(n_levels: usize, iterations: usize) -> Result<Vec<f64>> {
    let mut points = initial_points(n_levels)?;
    let mut trace = vec![distortion_unchecked(&points)];
    for _ in 0..iterations {
        points = lloyd_step(&points);
        trace.push(distortion_unchecked(&points));
    }
    Ok(trace)
}

fn initial_points(n_levels: usize) -> Result<Vec<f64>> {
    if n_levels == 0 {
        return Err(invalid("n_levels must be at least 1"));
    }
    let n = n_levels as f64;
    Ok((1..=n_levels)
        .map(|i| normal::quantile((2.0 * i as f64 - 1.0) / (2.0 * n)))
        .collect())
}

/// Newton step on the stationarity system `x_i m_i - μ_i = 0`.
///
/// The Jacobian is tridiagonal because each cell only depends on its two
/// neighbours through the midpoint boundaries.
fn newton_step(points: &[f64]) -> Option<Vec<f64>> {
    let n = points.len();
    let c = cells(points);
    let mut diag = vec![0.0; n];
    let mut lower = vec![0.0; n];
    let mut upper = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    for i in 0..n {
        let x = points[i];
        let (a, b) = (c.bounds[i], c.bounds[i + 1]);
        let da = if a.is_finite() { 0.5 * (a - x) * normal::pdf(a) } else { 0.0 };
        let db = if b.is_finite() { 0.5 * (x - b) * normal::pdf(b) } else { 0.0 };
        diag[i] = c.mass[i] + da + db;
        lower[i] = da;
        upper[i] = db;
        rhs[i] = -(x * c.mass[i] - c.first[i]);
    }
    // Thomas algorithm
    for i in 1..n {
        if diag[i - 1] == 0.0 {
            return None;
        }
        let f = lower[i] / diag[i - 1];
        diag[i] -= f * upper[i - 1];
        rhs[i] -= f * rhs[i - 1];
    }
    let mut delta = vec![0.0; n];
    for i in (0..n).rev() {
        let next = if i + 1 < n { upper[i] * delta[i + 1] } else { 0.0 };
        if diag[i] == 0.0 {
            return None;
        }
        delta[i] = (rhs[i] - next) / diag[i];
    }
    let out: Vec<f64> = points.iter().zip(&delta).map(|(x, d)| x + d).collect();
    let ok = out.iter().all(|x| x.is_finite()) && out.windows(2).all(|w| w[0] < w[1]);
    ok.then_some(out)
}

fn symmetrize(points: &mut [f64]) {
    let n = points.len();
    for i in 0..n / 2 {
        let v = 0.5 * (points[n - 1 - i] - points[i]);
        points[i] = -v;
        points[n - 1 - i] = v;
    }
    if n % 2 == 1 {
        points[n / 2] = 0.0;
    }
}

fn max_move(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Optimal quadratic `n_levels`-quantizer of N(0,1).
///
/// Lloyd iterations from the midpoint quantiles bring the grid into the
/// basin of the optimum, then Newton steps polish it until the points move
/// less than 1e-12. The result is symmetrized about 0.
pub fn optimal_normal_quantizer(n_levels: usize) -> Result<GaussianQuantizer> {
    let mut points = initial_points(n_levels)?;
    let mut current = distortion_unchecked(&points);
    let mut iterations = 0;
    let mut last_move = f64::INFINITY;

    while iterations < MAX_ITERATIONS && last_move > LLOYD_HANDOVER {
        let next = lloyd_step(&points);
        let d = distortion_unchecked(&next);
        debug_assert!(d <= current * (1.0 + 1e-12), "Lloyd increased the distortion");
        last_move = max_move(&points, &next);
        points = next;
        current = d;
        iterations += 1;
    }

    while iterations < MAX_ITERATIONS && last_move > POINT_TOLERANCE {
        let next = match newton_step(&points) {
            Some(p) => p,
            None => lloyd_step(&points),
        };
        last_move = max_move(&points, &next);
        points = next;
        iterations += 1;
    }

    symmetrize(&mut points);
    let residual = stationarity_residual(&points);
    if last_move > POINT_TOLERANCE && residual > 1e-10 {
        return Err(Error::NoConvergence {
            iterations,
            residual,
        });
    }
    let c = cells(&points);
    let distortion = distortion_unchecked(&points);
    Ok(GaussianQuantizer {
        points,
        weights: c.mass,
        distortion,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    // Midpoint-rule integration of the cell distortion, independent of the
    // closed-form moments.
    fn distortion_by_quadrature(points: &[f64]) -> f64 {
        let (lo, hi, steps) = (-12.0, 12.0, 400_000);
        let h = (hi - lo) / steps as f64;
        (0..steps)
            .map(|k| {
                let z = lo + (k as f64 + 0.5) * h;
                let d = points.iter().map(|x| (z - x).powi(2)).fold(f64::INFINITY, f64::min);
                d * normal::pdf(z) * h
            })
            .sum()
    }

    #[test]
    fn single_level_is_the_mean() {
        let q = optimal_normal_quantizer(1).unwrap();
        assert_eq!(q.points, vec![0.0]);
        assert!((q.weights[0] - 1.0).abs() < 1e-15);
        assert!((q.distortion - 1.0).abs() < 1e-14);
    }

    #[test]
    fn two_levels_are_half_normal_means() {
        let q = optimal_normal_quantizer(2).unwrap();
        let a = (2.0 / PI).sqrt();
        assert!((q.points[1] - a).abs() < 1e-12);
        assert!((q.points[0] + a).abs() < 1e-12);
        assert_eq!(q.weights, vec![0.5, 0.5]);
        assert!((q.distortion - (1.0 - 2.0 / PI)).abs() < 1e-13);
    }

    #[test]
    fn closed_form_distortion_matches_quadrature() {
        let a = (2.0 / PI).sqrt();
        for pts in [vec![0.5], vec![-a, a], vec![-1.3, 0.1, 0.9, 2.0]] {
            let exact = distortion(&pts).unwrap();
            let quad = distortion_by_quadrature(&pts);
            assert!((exact - quad).abs() < 1e-9, "{pts:?}: {exact} vs {quad}");
        }
        assert!((distortion(&[0.5]).unwrap() - 1.25).abs() < 1e-14);
        assert!((distortion(&[0.0]).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn weights_examples() {
        assert_eq!(quantizer_weights(&[0.0]).unwrap(), vec![1.0]);
        let w = quantizer_weights(&[-3.7, 3.7]).unwrap();
        assert!((w[0] - 0.5).abs() < 1e-16 && (w[1] - 0.5).abs() < 1e-16);
        let w = quantizer_weights(&[-1.0, 0.0, 1.0]).unwrap();
        let expect = [0.308_537_538_725_986_9, 0.382_924_922_548_026_2, 0.308_537_538_725_986_9];
        for (a, b) in w.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn weights_reject_duplicates_and_empty() {
        assert!(quantizer_weights(&[0.0, 0.0]).is_err());
        assert!(quantizer_weights(&[]).is_err());
        assert!(distortion(&[1.0, -1.0]).is_err());
        assert!(optimal_normal_quantizer(0).is_err());
    }

    #[test]
    fn lloyd_never_increases_distortion() {
        for n in [3, 7, 23, 40] {
            let trace = lloyd_trace(n, 300).unwrap();
            for w in trace.windows(2) {
                assert!(w[1] <= w[0] * (1.0 + 1e-12), "n={n}: {} -> {}", w[0], w[1]);
            }
        }
    }

    #[test]
    fn optimum_properties() {
        let mut previous = f64::INFINITY;
        for n in 1..=40 {
            let q = optimal_normal_quantizer(n).unwrap();
            assert!(q.stationarity_residual() < 1e-9, "n={n}");
            assert!((q.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for i in 0..n {
                assert!((q.points[i] + q.points[n - 1 - i]).abs() < 1e-9);
                assert!((q.weights[i] - q.weights[n - 1 - i]).abs() < 1e-12);
            }
            assert!(q.distortion < previous, "distortion not decreasing at n={n}");
            previous = q.distortion;
        }
    }

    #[test]
    fn deterministic() {
        assert_eq!(optimal_normal_quantizer(17).unwrap(), optimal_normal_quantizer(17).unwrap());
    }

    #[test]
    fn cache_round_trip() {
        let q = optimal_normal_quantizer(5).unwrap();
        let text = q.to_cache_string();
        assert!(text.starts_with("N 5\n"));
        let back = GaussianQuantizer::from_cache_str(&text).unwrap();
        for (a, b) in q.points.iter().zip(&back.points) {
            assert!((a - b).abs() <= 1e-16 * a.abs().max(1.0));
        }
        assert!(GaussianQuantizer::from_cache_str("N 3\n0 1\n").is_err());
    }

    proptest! {
        #[test]
        fn weights_sum_to_one(mut pts in prop::collection::vec(-6.0f64..6.0, 1..50)) {
            pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            pts.dedup();
            let w = quantizer_weights(&pts).unwrap();
            prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(w.iter().all(|&x| x >= 0.0));
        }
    }
}
