//! Online feature weighting from pairwise redundancy.
//!
//! Pairwise redundancy is measured by the maximal information compression
//! index (MICI): the smallest eigenvalue of the 2x2 covariance matrix of a
//! variable pair. It is 0 for perfectly linearly dependent pairs and grows
//! as the pair carries independent information. A feature's score is its
//! mean MICI against all other features; weights are scores divided by the
//! largest score, so redundant features are softly suppressed.
//!
//! All moments are population moments, accumulated with Welford/Chan
//! updates so that merged accumulators agree with a single pass.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Second-order statistics of a pair of series.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PairStats {
    pub count: f64,
    pub mean: [f64; 2],
    /// Sums of squared deviations.
    pub m2: [f64; 2],
    /// Sum of cross deviations.
    pub co: f64,
}

/// Raised when a Pearson correlation is requested for a zero-variance series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("constant feature: correlation is undefined")]
pub struct ConstantFeature;

impl PairStats {
    pub fn from_series(a: &[f64], b: &[f64]) -> Self {
        let mut s = Self::default();
        for (&x, &y) in a.iter().zip(b) {
            s.push(x, y);
        }
        s
    }

    pub fn push(&mut self, a: f64, b: f64) {
        self.count += 1.0;
        let d0 = a - self.mean[0];
        let d1 = b - self.mean[1];
        self.mean[0] += d0 / self.count;
        self.mean[1] += d1 / self.count;
        self.m2[0] += d0 * (a - self.mean[0]);
        self.m2[1] += d1 * (b - self.mean[1]);
        self.co += d0 * (b - self.mean[1]);
    }

    pub fn merge(&self, other: &Self) -> Self {
        if self.count == 0.0 {
            return *other;
        }
        if other.count == 0.0 {
            return *self;
        }
        let n = self.count + other.count;
        let d0 = other.mean[0] - self.mean[0];
        let d1 = other.mean[1] - self.mean[1];
        let f = self.count * other.count / n;
        Self {
            count: n,
            mean: [self.mean[0] + d0 * other.count / n, self.mean[1] + d1 * other.count / n],
            m2: [
                self.m2[0] + other.m2[0] + d0 * d0 * f,
                self.m2[1] + other.m2[1] + d1 * d1 * f,
            ],
            co: self.co + other.co + d0 * d1 * f,
        }
    }

    pub fn var(&self) -> [f64; 2] {
        if self.count == 0.0 {
            return [0.0, 0.0];
        }
        [(self.m2[0] / self.count).max(0.0), (self.m2[1] / self.count).max(0.0)]
    }

    pub fn cov(&self) -> f64 {
        if self.count == 0.0 {
            0.0
        } else {
            self.co / self.count
        }
    }
}

pub fn pearson(stats: &PairStats) -> Result<f64, ConstantFeature> {
    let [v1, v2] = stats.var();
    if stats.count < 2.0 || v1 <= 0.0 || v2 <= 0.0 {
        return Err(ConstantFeature);
    }
    Ok((stats.cov() / (v1 * v2).sqrt()).clamp(-1.0, 1.0))
}

/// MICI of a pair. Zero-variance pairs give 0 (maximal redundancy).
pub fn mici(stats: &PairStats) -> f64 {
    let [v1, v2] = stats.var();
    let rho = match pearson(stats) {
        Ok(r) => r,
        Err(ConstantFeature) => return 0.0,
    };
    // (v1+v2)^2 - 4 v1 v2 (1 - rho^2), clamped against rounding
    let radicand = ((v1 - v2) * (v1 - v2) + 4.0 * v1 * v2 * rho * rho).max(0.0);
    let largest = 0.5 * (v1 + v2 + radicand.sqrt());
    if largest <= 0.0 {
        return 0.0;
    }
    // smallest eigenvalue as det / largest, which avoids cancellation
    let det = (v1 * v2 * (1.0 - rho * rho)).max(0.0);
    det / largest
}

/// MICI of the standardised pair, `1 - |ρ|`. Identical series give 0, a
/// constant series against anything else gives 1.
pub fn standardized_mici(a: &[f64], b: &[f64]) -> f64 {
    if a == b {
        return 0.0;
    }
    match pearson(&PairStats::from_series(a, b)) {
        Ok(rho) => 1.0 - rho.abs(),
        Err(ConstantFeature) => 1.0,
    }
}

/// Running moments of all `n` features, updated chunk by chunk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMoments {
    pub count: f64,
    pub mean: DVector<f64>,
    pub co: DMatrix<f64>,
}

impl FeatureMoments {
    pub fn new(n: usize) -> Self {
        Self {
            count: 0.0,
            mean: DVector::zeros(n),
            co: DMatrix::zeros(n, n),
        }
    }

    pub fn n_features(&self) -> usize {
        self.mean.len()
    }

    pub fn push_row(&mut self, x: &[f64]) {
        let n = self.mean.len();
        self.count += 1.0;
        let delta: Vec<f64> = (0..n).map(|j| x[j] - self.mean[j]).collect();
        for j in 0..n {
            self.mean[j] += delta[j] / self.count;
        }
        for j in 0..n {
            let after = x[j] - self.mean[j];
            for l in 0..n {
                self.co[(l, j)] += delta[l] * after;
            }
        }
    }

    pub fn push_matrix(&mut self, x: &DMatrix<f64>) {
        let mut row = vec![0.0; x.ncols()];
        for r in 0..x.nrows() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = x[(r, j)];
            }
            self.push_row(&row);
        }
    }

    pub fn merge(&self, other: &Self) -> Self {
        if self.count == 0.0 {
            return other.clone();
        }
        if other.count == 0.0 {
            return self.clone();
        }
        let n = self.count + other.count;
        let delta = &other.mean - &self.mean;
        let f = self.count * other.count / n;
        Self {
            count: n,
            mean: &self.mean + &delta * (other.count / n),
            co: &self.co + &other.co + &delta * delta.transpose() * f,
        }
    }

    pub fn pair(&self, j: usize, l: usize) -> PairStats {
        PairStats {
            count: self.count,
            mean: [self.mean[j], self.mean[l]],
            m2: [self.co[(j, j)], self.co[(l, l)]],
            co: self.co[(j, l)],
        }
    }

    /// Symmetric matrix of pairwise MICI values (diagonal left at 0).
    pub fn mici_matrix(&self) -> DMatrix<f64> {
        let n = self.n_features();
        let mut g = DMatrix::zeros(n, n);
        for j in 0..n {
            for l in (j + 1)..n {
                let v = mici(&self.pair(j, l));
                g[(j, l)] = v;
                g[(l, j)] = v;
            }
        }
        g
    }

    pub fn input_weights(&self) -> InputWeights {
        input_weights(&feature_scores(&self.mici_matrix()))
    }
}

/// Mean off-diagonal MICI per feature. A single feature scores 1.
pub fn feature_scores(gamma: &DMatrix<f64>) -> Vec<f64> {
    let n = gamma.nrows();
    if n < 2 {
        return vec![1.0; n];
    }
    (0..n)
        .map(|j| (0..n).filter(|&l| l != j).map(|l| gamma[(j, l)]).sum::<f64>() / (n - 1) as f64)
        .collect()
}

/// Per-feature weights in `[0, 1]`, shared by every layer of the stack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputWeights(pub Vec<f64>);

impl InputWeights {
    pub fn ones(n: usize) -> Self {
        Self(vec![1.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Column-wise scaling `λ ∘ X`.
    pub fn apply(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = x.clone();
        for (j, mut col) in out.column_iter_mut().enumerate() {
            col *= self.0[j];
        }
        out
    }
}

pub fn input_weights(scores: &[f64]) -> InputWeights {
    let max = scores.iter().copied().fold(0.0_f64, f64::max);
    if max <= 0.0 {
        return InputWeights::ones(scores.len());
    }
    InputWeights(scores.iter().map(|s| (s / max).clamp(0.0, 1.0)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn pearson_extremes() {
        let a = [0.0, 1.0, 2.0, 5.0];
        let twice: Vec<f64> = a.iter().map(|v| 2.0 * v).collect();
        let neg: Vec<f64> = a.iter().map(|v| -v).collect();
        assert_abs_diff_eq!(
            pearson(&PairStats::from_series(&a, &twice)).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            pearson(&PairStats::from_series(&a, &neg)).unwrap(),
            -1.0,
            epsilon = 1e-12
        );
        assert_eq!(pearson(&PairStats::from_series(&a, &[3.0; 4])), Err(ConstantFeature));
    }

    #[test]
    fn pearson_and_mici_small_example() {
        // population moments: v1 = 1.25, v2 = 0.25, cov = 0.25
        let s = PairStats::from_series(&[0., 1., 2., 3.], &[0., 1., 0., 1.]);
        assert_abs_diff_eq!(pearson(&s).unwrap(), 0.447_213_595_5, epsilon = 1e-9);
        // 0.5 * (1.5 - sqrt(1.25))
        assert_abs_diff_eq!(mici(&s), 0.190_983_005_6, epsilon = 1e-9);
    }

    #[test]
    fn mici_special_cases() {
        let a = [0.3, 1.7, 2.2, 9.0, 4.4];
        assert_abs_diff_eq!(mici(&PairStats::from_series(&a, &a)), 0.0, epsilon = 1e-12);
        // independent, equal variance: v = 1, rho = 0
        let x = [1.0, -1.0, 1.0, -1.0];
        let y = [1.0, 1.0, -1.0, -1.0];
        assert_abs_diff_eq!(mici(&PairStats::from_series(&x, &y)), 1.0, epsilon = 1e-12);
        assert_eq!(mici(&PairStats::from_series(&a, &[2.0; 5])), 0.0);
    }

    #[test]
    fn scores_are_row_means() {
        let g = DMatrix::from_row_slice(3, 3, &[0., 1., 3., 1., 0., 5., 3., 5., 0.]);
        assert_eq!(feature_scores(&g), vec![2.0, 3.0, 4.0]);
        let g2 = DMatrix::from_row_slice(2, 2, &[0., 0.7, 0.7, 0.]);
        assert_eq!(feature_scores(&g2), vec![0.7, 0.7]);
        assert_eq!(feature_scores(&DMatrix::zeros(1, 1)), vec![1.0]);
    }

    #[test]
    fn weights_normalise_by_max() {
        let w = input_weights(&[0.2, 0.5, 0.4]);
        assert_abs_diff_eq!(w.0[0], 0.4, epsilon = 1e-15);
        assert_abs_diff_eq!(w.0[1], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(w.0[2], 0.8, epsilon = 1e-15);
        assert_eq!(input_weights(&[0.3, 0.3]).0, vec![1.0, 1.0]);
        assert_eq!(input_weights(&[0.0, 0.0, 0.0]).0, vec![1.0; 3]);
        assert_eq!(input_weights(&[0.0, 2.0]).0, vec![0.0, 1.0]);
    }

    #[test]
    fn identical_features_score_zero() {
        let mut m = FeatureMoments::new(3);
        for v in [1.0, 4.0, 2.0, 8.0] {
            m.push_row(&[v, v, v]);
        }
        assert!(feature_scores(&m.mici_matrix()).iter().all(|&s| s.abs() < 1e-12));
        assert_eq!(m.input_weights().0, vec![1.0; 3]);
    }

    #[test]
    fn feature_moments_merge_matches_single_pass() {
        let rows: Vec<[f64; 3]> = (0..50)
            .map(|i| {
                let t = i as f64;
                [t.sin() * 3.0, t * 0.1 + 7.0, (t * 0.7).cos()]
            })
            .collect();
        let mut all = FeatureMoments::new(3);
        let mut a = FeatureMoments::new(3);
        let mut b = FeatureMoments::new(3);
        for (i, r) in rows.iter().enumerate() {
            all.push_row(r);
            if i < 20 {
                a.push_row(r)
            } else {
                b.push_row(r)
            }
        }
        let merged = a.merge(&b);
        assert_abs_diff_eq!(merged.count, all.count);
        for (x, y) in merged.co.iter().zip(all.co.iter()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-9);
        }
        for (x, y) in merged.mean.iter().zip(all.mean.iter()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-12);
        }
    }
}
