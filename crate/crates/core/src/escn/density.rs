use nalgebra::DVector;
use serde::{Deserialize, Serialize};

/// Recursive density accumulator.
///
/// `D(x) = 1 / (1 + ||x - μ||² + s - ||μ||²)` where `μ` is the running mean
/// and `s` the running mean of squared norms, which equals
/// `1 / (1 + mean_k ||x - x_k||²)` over every sample seen. The spread term
/// `s - ||μ||²` is carried as a Welford scatter sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityStats {
    pub count: f64,
    pub mean: DVector<f64>,
    scatter: f64,
}

impl DensityStats {
    pub fn new(n: usize) -> Self {
        Self {
            count: 0.0,
            mean: DVector::zeros(n),
            scatter: 0.0,
        }
    }

    pub fn update(&mut self, x: &[f64]) {
        self.count += 1.0;
        let mut acc = 0.0;
        for (j, &v) in x.iter().enumerate() {
            let delta = v - self.mean[j];
            self.mean[j] += delta / self.count;
            acc += delta * (v - self.mean[j]);
        }
        self.scatter += acc;
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
        Self {
            count: n,
            mean: &self.mean + &delta * (other.count / n),
            scatter: self.scatter + other.scatter + delta.norm_squared() * self.count * other.count / n,
        }
    }

    /// Running mean of squared norms.
    pub fn mean_sq_norm(&self) -> f64 {
        self.mean.norm_squared() + self.spread()
    }

    fn spread(&self) -> f64 {
        if self.count == 0.0 {
            0.0
        } else {
            (self.scatter / self.count).max(0.0)
        }
    }

    pub fn density(&self, x: &[f64]) -> f64 {
        let d2: f64 = x.iter().zip(self.mean.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
        1.0 / (1.0 + d2 + self.spread())
    }
}
