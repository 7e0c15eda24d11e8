#![allow(dead_code)]
//! Independent reference implementations used as test oracles.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;

/// Smallest eigenvalue of the 2x2 population covariance, by two passes and
/// an eigen-decomposition.
pub fn mici_direct(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut c = DMatrix::<f64>::zeros(2, 2);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        c[(0, 0)] += dx * dx / n;
        c[(1, 1)] += dy * dy / n;
        c[(0, 1)] += dx * dy / n;
    }
    c[(1, 0)] = c[(0, 1)];
    SymmetricEigen::new(c).eigenvalues.min()
}

/// `1 / (1 + mean_k ||x - x_k||²)` by brute force.
pub fn density_direct(samples: &[Vec<f64>], x: &[f64]) -> f64 {
    let mean_sq: f64 = samples
        .iter()
        .map(|s| s.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
        .sum::<f64>()
        / samples.len() as f64;
    1.0 / (1.0 + mean_sq)
}

/// Hoeffding bound written out term by term, without simplification.
pub fn hoeffding_direct(a: f64, b: f64, n: f64, cut: f64, alpha: f64) -> f64 {
    let inner = (n - cut) / (2.0 * cut * (n - cut)) * (1.0 / alpha).ln();
    (b - a) * inner.sqrt()
}

/// Least squares through the normal equations.
pub fn batch_least_squares(x: &DMatrix<f64>, y: &DMatrix<f64>) -> DMatrix<f64> {
    let xtx = x.transpose() * x;
    let xty = x.transpose() * y;
    xtx.cholesky().expect("full column rank").solve(&xty)
}

pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m.clone()).eigenvalues.min()
}

pub fn is_symmetric(m: &DMatrix<f64>, tol: f64) -> bool {
    (m - m.transpose()).abs().max() <= tol
}

pub fn random_vec<R: Rng>(rng: &mut R, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

pub fn dvec(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}
