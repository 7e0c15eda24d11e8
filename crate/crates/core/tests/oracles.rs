mod common;

use common::*;
use dsscn::drift::hoeffding_bound;
use dsscn::escn::{chebyshev_expand, fwgrls_update, Antecedent, DensityStats, HiddenNode};
use dsscn::weighting::{mici, FeatureMoments, PairStats};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn mici_matches_eigen_decomposition() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let n = rng.random_range(5..60);
        let scale = rng.random_range(0.1..10.0);
        let mix = rng.random_range(-1.0..1.0);
        let a = random_vec(&mut rng, n, -scale, scale);
        let noise = random_vec(&mut rng, n, -1.0, 1.0);
        let b: Vec<f64> = a.iter().zip(&noise).map(|(x, e)| mix * x + e).collect();
        let got = mici(&PairStats::from_series(&a, &b));
        worst = worst.max((got - mici_direct(&a, &b)).abs());
    }
    assert!(worst <= 1e-9, "max deviation {worst}");
}

#[test]
fn merged_moments_give_the_same_mici() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let rows: Vec<Vec<f64>> = (0..300).map(|_| random_vec(&mut rng, 3, -2.0, 5.0)).collect();
    let mut whole = FeatureMoments::new(3);
    let mut left = FeatureMoments::new(3);
    let mut right = FeatureMoments::new(3);
    for (i, r) in rows.iter().enumerate() {
        whole.push_row(r);
        if i < 111 {
            left.push_row(r)
        } else {
            right.push_row(r)
        }
    }
    let merged = left.merge(&right);
    let a = merged.mici_matrix();
    let b = whole.mici_matrix();
    assert!((a - &b).abs().max() < 1e-9);
    let col = |j: usize| rows.iter().map(|r| r[j]).collect::<Vec<_>>();
    assert!((b[(0, 2)] - mici_direct(&col(0), &col(2))).abs() < 1e-9);
}

#[test]
fn recursive_density_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut stats = DensityStats::new(3);
    let mut seen: Vec<Vec<f64>> = Vec::new();
    let mut worst: f64 = 0.0;
    for t in 0..10_000 {
        let x = random_vec(&mut rng, 3, -4.0, 4.0);
        stats.update(&x);
        seen.push(x);
        if t % 97 == 0 {
            let q = random_vec(&mut rng, 3, -6.0, 6.0);
            let d = stats.density(&q);
            assert!(d > 0.0 && d <= 1.0);
            worst = worst.max((d - density_direct(&seen, &q)).abs());
        }
    }
    assert!(worst <= 1e-9, "max deviation {worst}");
}

#[test]
fn hoeffding_matches_direct_formula() {
    assert!((hoeffding_bound(0.0, 1.0, 1000.0, 500.0, 0.09) - 0.04907).abs() <= 1e-5);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..200 {
        let n = rng.random_range(2.0..5000.0f64).floor();
        let cut = rng.random_range(1.0..n).floor();
        let alpha = rng.random_range(0.001..0.5);
        let got = hoeffding_bound(0.0, 1.0, n, cut, alpha);
        assert!((got - hoeffding_direct(0.0, 1.0, n, cut, alpha)).abs() < 1e-12);
    }
}

#[test]
fn chebyshev_matches_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..100 {
        let x = random_vec(&mut rng, 4, -2.0, 2.0);
        let xe = chebyshev_expand(&x);
        assert_eq!(xe.len(), 9);
        assert_eq!(xe[0], 1.0);
        for (j, v) in x.iter().enumerate() {
            assert_eq!(xe[2 * j + 1], *v);
            assert_eq!(xe[2 * j + 2], 2.0 * v * v - 1.0);
        }
    }
}

fn linear_problem(seed: u64, noise: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w_true = [0.7, -1.2, 0.4, 2.0, -0.3];
    let mut xs = DMatrix::zeros(50, 5);
    let mut ys = DMatrix::zeros(50, 1);
    for t in 0..50 {
        let x = random_vec(&mut rng, 2, -1.0, 1.0);
        let xe = chebyshev_expand(&x);
        xs.row_mut(t).copy_from(&xe.transpose());
        let e: f64 = rng.random_range(-noise..=noise);
        ys[(t, 0)] = xe.iter().zip(&w_true).map(|(a, b)| a * b).sum::<f64>() + e;
    }
    (xs, ys)
}

fn single_node(d: usize, m: usize) -> HiddenNode {
    HiddenNode::new(
        Antecedent::centered(&[0.0, 0.0], &[0.0, 0.0], DMatrix::identity(2, 2)),
        DMatrix::zeros(d, m),
        1e5,
        0,
    )
}

fn run_fwgrls(xs: &DMatrix<f64>, ys: &DMatrix<f64>, decay: f64) -> HiddenNode {
    let mut node = single_node(xs.ncols(), ys.ncols());
    for t in 0..xs.nrows() {
        let xe = xs.row(t).transpose();
        let y: Vec<f64> = ys.row(t).iter().copied().collect();
        fwgrls_update(&mut node, &xe, 1.0, &y, decay);
    }
    node
}

#[test]
fn fwgrls_without_decay_matches_batch_least_squares() {
    let (xs, ys) = linear_problem(17, 0.3);
    let node = run_fwgrls(&xs, &ys, 0.0);
    let batch = batch_least_squares(&xs, &ys);
    let rel = (&node.w - &batch).norm() / batch.norm();
    assert!(rel <= 1e-3, "relative deviation {rel}");
}

#[test]
fn decay_shrinks_weights_on_noise() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let xs = DMatrix::from_fn(200, 5, |_, j| if j == 0 { 1.0 } else { rng.random_range(-1.0..1.0) });
    let ys = DMatrix::from_fn(200, 1, |_, _| rng.random_range(-1.0..1.0));
    let plain = run_fwgrls(&xs, &ys, 0.0);
    let decayed = run_fwgrls(&xs, &ys, 1e-5);
    assert!(decayed.w.norm() < plain.w.norm());
}

#[test]
fn covariance_stays_positive_definite() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut node = single_node(5, 2);
    for t in 0..10_000 {
        let x = random_vec(&mut rng, 2, -1.5, 1.5);
        let xe = chebyshev_expand(&x);
        let lambda = rng.random_range(0.0..=1.0);
        fwgrls_update(&mut node, &xe, lambda, &[x[0], -x[1]], 1e-5);
        if t % 500 == 499 {
            assert!(is_symmetric(&node.omega, 0.0));
            assert!(min_eigenvalue(&node.omega) > 0.0, "Ω lost definiteness at step {t}");
        }
    }
}
