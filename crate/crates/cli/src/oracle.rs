//! Reference computations checked against the engine by `dsscn oracle`.

use clap::ValueEnum;
use dsscn::drift::hoeffding_bound;
use dsscn::escn::{chebyshev_expand, fwgrls_update, Antecedent, DensityStats, HiddenNode};
use dsscn::weighting::{mici, PairStats};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Check {
    Mici,
    Density,
    Fwgrls,
    Hoeffding,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub check: Check,
    pub cases: usize,
    pub max_deviation: f64,
    pub tolerance: f64,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.max_deviation <= self.tolerance
    }
}

/// Smallest eigenvalue of the population covariance of `(a, b)`, two-pass,
/// closed form for a symmetric 2x2 matrix.
fn mici_two_pass(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut vaa, mut vbb, mut vab) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        vaa += (x - ma) * (x - ma);
        vbb += (y - mb) * (y - mb);
        vab += (x - ma) * (y - mb);
    }
    let (vaa, vbb, vab) = (vaa / n, vbb / n, vab / n);
    let half_trace = 0.5 * (vaa + vbb);
    let half_gap = 0.5 * (vaa - vbb);
    half_trace - (half_gap * half_gap + vab * vab).sqrt()
}

pub fn check_mici(pairs: usize, seed: u64) -> OracleReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..pairs {
        let n = rng.random_range(5..80);
        let slope = rng.random_range(-2.0..2.0);
        let a: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
        let b: Vec<f64> = a.iter().map(|x| slope * x + rng.random_range(-1.0..1.0)).collect();
        let got = mici(&PairStats::from_series(&a, &b));
        worst = worst.max((got - mici_two_pass(&a, &b)).abs());
    }
    OracleReport {
        check: Check::Mici,
        cases: pairs,
        max_deviation: worst,
        tolerance: 1e-9,
    }
}

pub fn check_density(samples: usize, seed: u64) -> OracleReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stats = DensityStats::new(3);
    let mut seen: Vec<[f64; 3]> = Vec::with_capacity(samples);
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    let every = (samples / 100).max(1);
    for t in 0..samples {
        let x = [(); 3].map(|_| rng.random_range(-4.0..4.0));
        stats.update(&x);
        seen.push(x);
        if t % every == every - 1 || t + 1 == samples {
            let q = [(); 3].map(|_| rng.random_range(-6.0..6.0));
            let mean_sq = seen
                .iter()
                .map(|s| s.iter().zip(&q).map(|(a, b)| (a - b).powi(2)).sum::<f64>())
                .sum::<f64>()
                / seen.len() as f64;
            worst = worst.max((stats.density(&q) - 1.0 / (1.0 + mean_sq)).abs());
            cases += 1;
        }
    }
    OracleReport {
        check: Check::Density,
        cases,
        max_deviation: worst,
        tolerance: 1e-9,
    }
}

/// Relative distance between recursive and batch least squares on a noisy
/// linear target in the Chebyshev-expanded space.
pub fn check_fwgrls(samples: usize, seed: u64) -> OracleReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w_true = [0.7, -1.2, 0.4, 2.0, -0.3];
    let mut xs = DMatrix::<f64>::zeros(samples, 5);
    let mut ys = DMatrix::<f64>::zeros(samples, 1);
    for t in 0..samples {
        let x = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let xe = chebyshev_expand(&x);
        xs.row_mut(t).copy_from(&xe.transpose());
        ys[(t, 0)] = xe.iter().zip(&w_true).map(|(a, b)| a * b).sum::<f64>() + rng.random_range(-0.3..0.3);
    }
    let mut node = HiddenNode::new(
        Antecedent::centered(&[0.0, 0.0], &[0.0, 0.0], DMatrix::identity(2, 2)),
        DMatrix::zeros(5, 1),
        1e5,
        0,
    );
    for t in 0..samples {
        fwgrls_update(&mut node, &xs.row(t).transpose(), 1.0, &[ys[(t, 0)]], 0.0);
    }
    let batch = (xs.transpose() * &xs)
        .lu()
        .solve(&(xs.transpose() * &ys))
        .expect("design matrix has full column rank");
    OracleReport {
        check: Check::Fwgrls,
        cases: samples,
        max_deviation: (&node.w - &batch).norm() / batch.norm(),
        tolerance: 1e-3,
    }
}

/// The pinned reference point plus random arguments, against the bound
/// written out term by term.
pub fn check_hoeffding(cases: usize, seed: u64) -> OracleReport {
    let literal = |n: f64, cut: f64, alpha: f64| ((n - cut) / (2.0 * cut * (n - cut)) * (1.0 / alpha).ln()).sqrt();
    let mut worst = (hoeffding_bound(0.0, 1.0, 1000.0, 500.0, 0.09) - 0.04907)
        .abs()
        .max((literal(1000.0, 500.0, 0.09) - 0.04907).abs());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..cases {
        let n = rng.random_range(2..20_000) as f64;
        let cut = rng.random_range(1..n as usize) as f64;
        let alpha = rng.random_range(0.001..0.5);
        worst = worst.max((hoeffding_bound(0.0, 1.0, n, cut, alpha) - literal(n, cut, alpha)).abs());
    }
    OracleReport {
        check: Check::Hoeffding,
        cases: cases + 1,
        max_deviation: worst,
        tolerance: 1e-5,
    }
}

pub fn run_check(check: Check, size: Option<usize>, seed: u64) -> OracleReport {
    match check {
        Check::Mici => check_mici(size.unwrap_or(1000), seed),
        Check::Density => check_density(size.unwrap_or(10_000), seed),
        Check::Fwgrls => check_fwgrls(size.unwrap_or(50), seed),
        Check::Hoeffding => check_hoeffding(size.unwrap_or(1000), seed),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_eigenvalue_on_known_pairs() {
        assert!((mici_two_pass(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0])).abs() < 1e-12);
        // uncorrelated, unit variance
        let v = mici_two_pass(&[1.0, -1.0, 1.0, -1.0], &[1.0, 1.0, -1.0, -1.0]);
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn every_check_passes_at_default_size() {
        for check in [Check::Mici, Check::Density, Check::Fwgrls, Check::Hoeffding] {
            let r = run_check(check, None, 3);
            assert!(r.passed(), "{r:?}");
        }
    }
}
