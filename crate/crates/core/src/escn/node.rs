//! Interval type-2 Gaussian hidden nodes.
//!
//! A node's antecedent is an interval centroid `[c_lower, c_upper]` plus an
//! inverse covariance matrix. The multivariate Gaussian is projected onto
//! each axis through a per-dimension radius, per-dimension upper and lower
//! memberships are formed from the two centres, and the product t-norm
//! combines them into an interval firing `[lower, upper]`.
//!
//! Firings are computed in the log domain so that far-away inputs keep a
//! usable ordering instead of underflowing to zero.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Second-order Chebyshev functional-link expansion:
/// `[1, T1(x1), T2(x1), ..., T1(xn), T2(xn)]`.
pub fn chebyshev_expand(x: &[f64]) -> DVector<f64> {
    let mut xe = DVector::zeros(2 * x.len() + 1);
    xe[0] = 1.0;
    for (j, &v) in x.iter().enumerate() {
        xe[2 * j + 1] = v;
        xe[2 * j + 2] = 2.0 * v * v - 1.0;
    }
    xe
}

/// Per-dimension radii `σ_j = r · sqrt((Σ⁻¹)_jj)`.
pub fn project_radii(inv_cov: &DMatrix<f64>, radius: f64) -> DVector<f64> {
    DVector::from_iterator(
        inv_cov.nrows(),
        (0..inv_cov.nrows()).map(|j| radius * inv_cov[(j, j)].max(0.0).sqrt()),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalFiring {
    pub lower: f64,
    pub upper: f64,
}

/// Natural logarithms of an [`IntervalFiring`]; `-inf` encodes zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogFiring {
    pub lower: f64,
    pub upper: f64,
}

impl LogFiring {
    pub fn exp(self) -> IntervalFiring {
        IntervalFiring {
            lower: self.lower.exp(),
            upper: self.upper.exp(),
        }
    }
}

/// q type reduction `(1 - q) * upper + q * lower`.
pub fn type_reduce(f: IntervalFiring, q: f64) -> f64 {
    (1.0 - q) * f.upper + q * f.lower
}

/// [`type_reduce`] on log firings, returning a log value.
pub fn log_type_reduce(f: LogFiring, q: f64) -> f64 {
    if f.upper == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    f.upper + ((1.0 - q) + q * (f.lower - f.upper).exp()).ln()
}

/// Antecedent part of a hidden node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Antecedent {
    pub c_lower: DVector<f64>,
    pub c_upper: DVector<f64>,
    pub inv_cov: DMatrix<f64>,
}

impl Antecedent {
    /// Interval centroid `center ∓ spread`.
    pub fn centered(center: &[f64], spread: &[f64], inv_cov: DMatrix<f64>) -> Self {
        Self {
            c_lower: DVector::from_iterator(center.len(), center.iter().zip(spread).map(|(c, d)| c - d)),
            c_upper: DVector::from_iterator(center.len(), center.iter().zip(spread).map(|(c, d)| c + d)),
            inv_cov,
        }
    }

    pub fn midpoint(&self) -> DVector<f64> {
        (&self.c_lower + &self.c_upper) * 0.5
    }

    pub fn log_activation(&self, x: &[f64], radius: f64) -> LogFiring {
        let mut upper = 0.0;
        let mut lower = 0.0;
        for (j, &v) in x.iter().enumerate() {
            let sigma = radius * self.inv_cov[(j, j)].max(0.0).sqrt();
            let (cl, cu) = (self.c_lower[j], self.c_upper[j]);
            let gauss = |c: f64| {
                if sigma > 0.0 {
                    let z = (v - c) / sigma;
                    -0.5 * z * z
                } else if v == c {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            };
            upper += if v < cl {
                gauss(cl)
            } else if v > cu {
                gauss(cu)
            } else {
                0.0
            };
            lower += if v <= 0.5 * (cl + cu) { gauss(cu) } else { gauss(cl) };
        }
        LogFiring { lower, upper }
    }
}

/// Interval firing of a node at `x` (already weighted and shifted).
pub fn node_activation(node: &Antecedent, x: &[f64], radius: f64) -> IntervalFiring {
    node.log_activation(x, radius).exp()
}

/// A hidden node: antecedent plus its local functional-link consequent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HiddenNode {
    pub antecedent: Antecedent,
    /// `(2n+1) x m` output weights.
    pub w: DMatrix<f64>,
    /// `(2n+1) x (2n+1)` output covariance.
    pub omega: DMatrix<f64>,
    pub birth_stamp: usize,
}

impl HiddenNode {
    pub fn new(antecedent: Antecedent, w: DMatrix<f64>, omega: f64, birth_stamp: usize) -> Self {
        let d = w.nrows();
        Self {
            antecedent,
            w,
            omega: DMatrix::identity(d, d) * omega,
            birth_stamp,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn expansion_layout() {
        let xe = chebyshev_expand(&[0.5, -1.0]);
        assert_eq!(xe.as_slice(), &[1.0, 0.5, -0.5, -1.0, 1.0]);
        assert_eq!(
            chebyshev_expand(&[0.0; 3]).as_slice(),
            &[1.0, 0.0, -1.0, 0.0, -1.0, 0.0, -1.0]
        );
    }

    #[test]
    fn expansion_obeys_recurrence() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let v: f64 = rng.random_range(-3.0..3.0);
            let xe = chebyshev_expand(&[v]);
            assert_eq!(xe[2], 2.0 * v * xe[1] - xe[0]);
        }
    }

    #[test]
    fn radii_follow_inverse_covariance_diagonal() {
        assert_eq!(project_radii(&DMatrix::identity(3, 3), 1.0).as_slice(), &[1.0; 3]);
        let m = DMatrix::from_row_slice(2, 2, &[4.0, 0.3, 0.3, 1.0]);
        assert_eq!(project_radii(&m, 1.0).as_slice(), &[2.0, 1.0]);
    }

    #[test]
    fn crisp_centre_fires_fully() {
        let a = Antecedent::centered(&[1.0, 2.0], &[0.0, 0.0], DMatrix::identity(2, 2));
        let f = node_activation(&a, &[1.0, 2.0], 1.0);
        assert_eq!((f.lower, f.upper), (1.0, 1.0));
    }

    #[test]
    fn inside_interval_upper_is_one() {
        let a = Antecedent::centered(&[0.0, 0.0], &[0.5, 0.5], DMatrix::identity(2, 2));
        let f = node_activation(&a, &[0.2, -0.4], 1.0);
        assert_eq!(f.upper, 1.0);
        assert!(f.lower < 1.0 && f.lower > 0.0);
    }

    #[test]
    fn zero_radius_is_an_indicator() {
        let a = Antecedent::centered(&[1.0], &[0.0], DMatrix::zeros(1, 1));
        assert_eq!(node_activation(&a, &[1.0], 1.0).upper, 1.0);
        assert_eq!(node_activation(&a, &[1.5], 1.0).upper, 0.0);
    }

    #[test]
    fn type_reduction_endpoints() {
        let f = IntervalFiring { lower: 0.2, upper: 0.8 };
        assert_eq!(type_reduce(f, 0.0), 0.8);
        assert_eq!(type_reduce(f, 1.0), 0.2);
        assert_abs_diff_eq!(type_reduce(f, 0.5), 0.5, epsilon = 1e-15);
        let lf = LogFiring {
            lower: 0.2f64.ln(),
            upper: 0.8f64.ln(),
        };
        for q in [0.0, 0.3, 0.5, 1.0] {
            assert_abs_diff_eq!(log_type_reduce(lf, q).exp(), type_reduce(f, q), epsilon = 1e-14);
        }
    }
}
