//! Stochastic configuration of new hidden nodes.
//!
//! A new node's inverse covariance is drawn at random from a ladder of
//! ascending scopes. Candidates must keep the supervisory inequality
//! `ζ_o >= 0` for every output against the layer's current residuals; the
//! first scope that yields an admissible candidate wins, and within it the
//! candidate with the largest total `ζ`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::escn::{log_type_reduce, Antecedent};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScnParams {
    /// Candidates drawn per scope.
    pub t_max: usize,
    /// Ascending scope ladder.
    pub scopes: Vec<f64>,
    /// Contraction parameter.
    pub r: f64,
}

impl Default for ScnParams {
    fn default() -> Self {
        Self {
            t_max: 20,
            scopes: vec![0.1, 0.5, 1.0, 1.5, 2.0, 3.0, 5.0, 10.0, 30.0, 50.0, 100.0, 150.0, 200.0],
            r: 0.9,
        }
    }
}

impl ScnParams {
    pub fn validate(&self) -> Result<()> {
        if self.t_max == 0 {
            return Err(Error::InvalidParameter("scn.t_max must be at least 1".into()));
        }
        if self.scopes.is_empty() || self.scopes.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(Error::InvalidParameter("scn.scopes must be positive and finite".into()));
        }
        if self.scopes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("scn.scopes must be strictly ascending".into()));
        }
        if !(self.r > 0.0 && self.r < 1.0) {
            return Err(Error::InvalidParameter("scn.r must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// Result of one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScnOutcome {
    pub inv_cov: DMatrix<f64>,
    pub scope_used: f64,
    pub zeta_total: f64,
    pub satisfied: bool,
    /// Contraction value in force when the candidate was scored.
    pub r_used: f64,
    /// `(1 - r_used) / (R + 1)`.
    pub mu_used: f64,
}

/// Symmetric positive-definite draw `L Lᵀ / ξ` with `L` lower triangular,
/// off-diagonals uniform on `[-ξ, ξ]` and diagonal uniform on `(0, ξ]`.
pub fn sample_inverse_covariance<R: Rng + ?Sized>(n: usize, xi: f64, rng: &mut R) -> DMatrix<f64> {
    let mut l = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..i {
            l[(i, j)] = rng.random_range(-xi..=xi);
        }
        l[(i, i)] = xi - rng.random_range(0.0..xi);
    }
    let mut m = &l * l.transpose() / xi;
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// `ζ = (eᵀg)² / gᵀg - (1 - r - μ) eᵀe`, or `None` for a dead candidate.
pub fn robustness(g: &[f64], e: &[f64], r: f64, mu: f64) -> Option<f64> {
    let gg: f64 = g.iter().map(|v| v * v).sum();
    if !(gg > 0.0) {
        return None;
    }
    let eg: f64 = g.iter().zip(e).map(|(a, b)| a * b).sum();
    let ee: f64 = e.iter().map(|v| v * v).sum();
    Some(eg * eg / gg - (1.0 - r - mu) * ee)
}

/// Crisp type-reduced firings of `antecedent` over every row of `window`.
pub fn window_firings(antecedent: &Antecedent, window: &DMatrix<f64>, q: f64, radius: f64) -> Vec<f64> {
    let mut row = vec![0.0; window.ncols()];
    (0..window.nrows())
        .map(|t| {
            for (j, v) in row.iter_mut().enumerate() {
                *v = window[(t, j)];
            }
            log_type_reduce(antecedent.log_activation(&row, radius), q).exp()
        })
        .collect()
}

/// Per-output robustness of a candidate, `None` if the candidate is dead.
pub fn candidate_zetas(g: &[f64], residuals: &DMatrix<f64>, r: f64, mu: f64) -> Option<Vec<f64>> {
    (0..residuals.ncols())
        .map(|o| robustness(g, residuals.column(o).as_slice(), r, mu))
        .collect()
}

/// Inputs for [`configure_node`].
pub struct ConfigureRequest<'a> {
    pub center: &'a [f64],
    pub spread: &'a [f64],
    /// `N x n` window of (weighted, shifted) inputs.
    pub window: &'a DMatrix<f64>,
    /// `N x m` residuals of the current layer over the window.
    pub residuals: &'a DMatrix<f64>,
    /// Existing node count `R`.
    pub existing: usize,
    pub q: f64,
    pub radius: f64,
}

/// Draws the antecedent of a new node. Candidate `k` of scope `s` uses its
/// own ChaCha stream, so the result does not depend on evaluation order.
pub fn configure_node(req: &ConfigureRequest<'_>, params: &ScnParams, seed: u64) -> (Antecedent, ScnOutcome) {
    let n = req.center.len();
    let t_max = params.t_max as u64;
    let mut r = params.r;
    let mut best_overall: Option<(f64, DMatrix<f64>, f64, f64, f64)> = None;
    let mut last = None;

    for (s, &xi) in params.scopes.iter().enumerate() {
        let mu = (1.0 - r) / (req.existing as f64 + 1.0);
        let mut best_in_scope: Option<(f64, DMatrix<f64>)> = None;
        for k in 0..t_max {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(s as u64 * t_max + k);
            let inv_cov = sample_inverse_covariance(n, xi, &mut rng);
            let candidate = Antecedent::centered(req.center, req.spread, inv_cov);
            let g = window_firings(&candidate, req.window, req.q, req.radius);
            let Some(zetas) = candidate_zetas(&g, req.residuals, r, mu) else {
                last = Some((candidate.inv_cov, xi, r, mu));
                continue;
            };
            let total: f64 = zetas.iter().sum();
            let min = zetas.iter().copied().fold(f64::INFINITY, f64::min);
            if best_overall.as_ref().is_none_or(|b| total > b.0) {
                best_overall = Some((total, candidate.inv_cov.clone(), xi, r, mu));
            }
            if min >= 0.0 && best_in_scope.as_ref().is_none_or(|b| total > b.0) {
                best_in_scope = Some((total, candidate.inv_cov));
            }
        }
        if let Some((total, inv_cov)) = best_in_scope {
            let outcome = ScnOutcome {
                inv_cov: inv_cov.clone(),
                scope_used: xi,
                zeta_total: total,
                satisfied: true,
                r_used: r,
                mu_used: mu,
            };
            return (Antecedent::centered(req.center, req.spread, inv_cov), outcome);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(u64::MAX - s as u64);
        let tau = (1.0 - r) - rng.random_range(0.0..(1.0 - r));
        r = (r + tau).min(0.999);
    }

    let (zeta_total, inv_cov, scope_used, r_used, mu_used) = match best_overall {
        Some(b) => b,
        None => {
            let (inv_cov, xi, r, mu) = last.expect("at least one candidate is drawn");
            (f64::NEG_INFINITY, inv_cov, xi, r, mu)
        }
    };
    let outcome = ScnOutcome {
        inv_cov: inv_cov.clone(),
        scope_used,
        zeta_total,
        satisfied: false,
        r_used,
        mu_used,
    };
    (Antecedent::centered(req.center, req.spread, inv_cov), outcome)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_by_one_draw_is_in_scope() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for xi in [0.1, 1.0, 50.0] {
            for _ in 0..100 {
                let m = sample_inverse_covariance(1, xi, &mut rng);
                assert!(m[(0, 0)] > 0.0 && m[(0, 0)] <= xi);
            }
        }
    }

    #[test]
    fn sampling_is_seeded() {
        let a = sample_inverse_covariance(4, 3.0, &mut ChaCha8Rng::seed_from_u64(9));
        let b = sample_inverse_covariance(4, 3.0, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }

    #[test]
    fn robustness_cases() {
        let g = [1.0, 2.0, 0.0];
        let (r, mu) = (0.9, 0.05);
        let par = robustness(&g, &[2.0, 4.0, 0.0], r, mu).unwrap();
        assert!((par - 20.0 * (r + mu)).abs() < 1e-12);
        let perp = robustness(&g, &[2.0, -1.0, 5.0], r, mu).unwrap();
        assert!((perp + (1.0 - r - mu) * 30.0).abs() < 1e-12);
        assert_eq!(robustness(&g, &[0.0; 3], r, mu), Some(0.0));
        assert_eq!(robustness(&[0.0; 3], &[1.0; 3], r, mu), None);
    }

    #[test]
    fn zero_residuals_take_first_scope() {
        let window = DMatrix::from_fn(30, 2, |i, j| (i as f64 * 0.37 + j as f64).sin());
        let residuals = DMatrix::zeros(30, 2);
        let req = ConfigureRequest {
            center: &[0.0, 0.0],
            spread: &[0.01, 0.01],
            window: &window,
            residuals: &residuals,
            existing: 0,
            q: 0.5,
            radius: 1.0,
        };
        let p = ScnParams::default();
        let (a, out) = configure_node(&req, &p, 5);
        let (b, again) = configure_node(&req, &p, 5);
        assert!(out.satisfied);
        assert_eq!(out.scope_used, 0.1);
        assert_eq!(out.zeta_total, 0.0);
        assert_eq!(a, b);
        assert_eq!(out, again);
    }
}
