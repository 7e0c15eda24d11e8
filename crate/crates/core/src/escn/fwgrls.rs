use nalgebra::DVector;

use super::node::HiddenNode;

/// Fuzzily weighted generalized recursive least squares step for one node.
///
/// `firing` is the node's normalised crisp firing in `[0, 1]`; a zero
/// firing leaves the node untouched. With `decay = 0` this is plain
/// firing-weighted RLS. The decay term pulls weights towards zero through
/// the updated covariance (quadratic penalty, gradient `W`).
pub fn fwgrls_update(node: &mut HiddenNode, xe: &DVector<f64>, firing: f64, target: &[f64], decay: f64) {
    if !(firing > 0.0) {
        return;
    }
    let omega_x = &node.omega * xe;
    let denom = 1.0 / firing + xe.dot(&omega_x);
    if !denom.is_finite() || denom <= 0.0 {
        return;
    }
    let gain = omega_x / denom;
    // Ω x is also xᵀΩ transposed since Ω is symmetric
    let omega_x_t = (&node.omega * xe).transpose();
    node.omega -= &gain * omega_x_t;
    let d = node.omega.nrows();
    for r in 0..d {
        for c in (r + 1)..d {
            let v = 0.5 * (node.omega[(r, c)] + node.omega[(c, r)]);
            node.omega[(r, c)] = v;
            node.omega[(c, r)] = v;
        }
    }
    let prediction = node.w.tr_mul(xe);
    let error = DVector::from_iterator(target.len(), target.iter().zip(prediction.iter()).map(|(t, p)| t - p));
    if decay != 0.0 {
        let shrink = &node.omega * &node.w * decay;
        node.w -= shrink;
    }
    node.w += &gain * error.transpose();
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::escn::node::Antecedent;
    use nalgebra::DMatrix;

    fn node(d: usize, m: usize) -> HiddenNode {
        HiddenNode::new(
            Antecedent::centered(&[0.0], &[0.0], DMatrix::identity(1, 1)),
            DMatrix::zeros(d, m),
            1e5,
            0,
        )
    }

    #[test]
    fn zero_firing_is_a_no_op() {
        let mut n = node(3, 1);
        let before = n.clone();
        fwgrls_update(&mut n, &DVector::from_vec(vec![1.0, 2.0, 3.0]), 0.0, &[1.0], 0.0);
        assert_eq!(n, before);
    }

    #[test]
    fn single_step_moves_towards_target() {
        let mut n = node(3, 2);
        let xe = DVector::from_vec(vec![1.0, 0.5, -0.5]);
        fwgrls_update(&mut n, &xe, 1.0, &[1.0, 0.0], 0.0);
        let y = n.w.tr_mul(&xe);
        assert!((y[0] - 1.0).abs() < 1e-4);
        assert!(y[1].abs() < 1e-12);
    }
}
