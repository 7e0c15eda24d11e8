use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::density::DensityStats;
use super::fwgrls::fwgrls_update;
use super::node::{chebyshev_expand, log_type_reduce, Antecedent, HiddenNode, LogFiring};
use super::EscnConfig;
use crate::error::{Error, Result};
use crate::scn::{configure_node, ConfigureRequest, ScnOutcome, ScnParams};
use crate::splitmix64;
use crate::weighting::{mici, PairStats};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrowDecision {
    Add,
    Replace(usize),
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Inference {
    pub y: DVector<f64>,
    /// False when no node fires at all (including an empty layer).
    pub covered: bool,
}

/// One configuration event inside [`LayerReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScnEvent {
    pub nodes_before: usize,
    pub scope_used: f64,
    pub zeta_total: f64,
    pub satisfied: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LayerReport {
    pub samples: usize,
    pub added: usize,
    pub replaced: usize,
    pub pruned: usize,
    /// Predict-before-update error rate over the chunk.
    pub train_error: f64,
    pub scn_events: Vec<ScnEvent>,
}

/// Index of the largest score, ties to the lowest index. A single output is
/// read as a binary score with threshold 0.5 (class 0 above, class 1 below).
pub fn predict_class(y: &[f64]) -> usize {
    if y.len() == 1 {
        return if y[0] >= 0.5 { 0 } else { 1 };
    }
    let mut best = 0;
    for (o, &v) in y.iter().enumerate() {
        if v > y[best] {
            best = o;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EscnLayer {
    pub nodes: Vec<HiddenNode>,
    pub q: Vec<f64>,
    pub bias: f64,
    pub density: DensityStats,
    pub config: EscnConfig,
    pub scn: ScnParams,
    n_inputs: usize,
    n_outputs: usize,
    seed: u64,
    configurations: u64,
    replace_threshold: f64,
}

impl EscnLayer {
    pub fn new(n_inputs: usize, n_outputs: usize, config: EscnConfig, scn: ScnParams, seed: u64) -> Result<Self> {
        config.validate()?;
        scn.validate()?;
        if n_inputs == 0 || n_outputs == 0 {
            return Err(Error::InvalidParameter(
                "layer needs at least one input and output".into(),
            ));
        }
        let chi = ChiSquared::new(n_inputs as f64).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        let replace_threshold = (-chi.inverse_cdf(1.0 - config.replace_level)).exp();
        Ok(Self {
            nodes: Vec::new(),
            q: vec![config.q; n_outputs],
            bias: 0.0,
            density: DensityStats::new(n_inputs),
            config,
            scn,
            n_inputs,
            n_outputs,
            seed,
            configurations: 0,
            replace_threshold,
        })
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn n_outputs(&self) -> usize {
        self.n_outputs
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Firing level at or above which a growth event recentres the nearest
    /// node instead of adding one.
    pub fn replace_threshold(&self) -> f64 {
        self.replace_threshold
    }

    fn crisp_q(&self) -> f64 {
        self.q.iter().sum::<f64>() / self.q.len() as f64
    }

    pub fn log_firings(&self, x: &[f64]) -> Vec<LogFiring> {
        self.nodes
            .iter()
            .map(|n| n.antecedent.log_activation(x, self.config.radius))
            .collect()
    }

    /// Log crisp (type-reduced) firings.
    pub fn log_crisp_firings(&self, x: &[f64]) -> Vec<f64> {
        let q = self.crisp_q();
        self.log_firings(x).into_iter().map(|f| log_type_reduce(f, q)).collect()
    }

    /// Crisp firings normalised to sum to one; all zero when nothing fires.
    pub fn normalized_firings(&self, x: &[f64]) -> Vec<f64> {
        normalize_log(&self.log_crisp_firings(x))
    }

    /// MIMO output. Firings are rescaled by a common factor before the
    /// weighted average, which leaves the ratio unchanged.
    pub fn infer(&self, x: &[f64]) -> Inference {
        let m = self.n_outputs;
        let logs = self.log_firings(x);
        let shift = logs
            .iter()
            .flat_map(|f| [f.lower, f.upper])
            .fold(f64::NEG_INFINITY, f64::max);
        if shift == f64::NEG_INFINITY {
            return Inference {
                y: DVector::zeros(m),
                covered: false,
            };
        }
        let xe = chebyshev_expand(x);
        let mut num = DVector::<f64>::zeros(m);
        let mut den = 0.0;
        for (node, f) in self.nodes.iter().zip(&logs) {
            let lo = (f.lower - shift).exp();
            let up = (f.upper - shift).exp();
            den += lo + up;
            if lo == 0.0 && up == 0.0 {
                continue;
            }
            let beta = node.w.tr_mul(&xe);
            for o in 0..m {
                num[o] += ((1.0 - self.q[o]) * lo + self.q[o] * up) * beta[o];
            }
        }
        Inference {
            y: num.map(|v| v / den + self.bias),
            covered: true,
        }
    }

    /// Row-wise [`infer`](Self::infer); also returns the uncovered count.
    pub fn infer_batch(&self, x: &DMatrix<f64>) -> (DMatrix<f64>, usize) {
        let mut out = DMatrix::zeros(x.nrows(), self.n_outputs);
        let mut uncovered = 0;
        let mut row = vec![0.0; x.ncols()];
        for t in 0..x.nrows() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = x[(t, j)];
            }
            let inf = self.infer(&row);
            if !inf.covered {
                uncovered += 1;
            }
            out.row_mut(t).copy_from(&inf.y.transpose());
        }
        (out, uncovered)
    }

    /// Growth test for a sample already folded into the density statistics.
    pub fn grow_check(&self, x: &[f64]) -> GrowDecision {
        if self.nodes.is_empty() {
            return GrowDecision::Add;
        }
        let crisp = self.log_crisp_firings(x);
        let (nearest, best) = argmax(&crisp);
        if best == f64::NEG_INFINITY {
            return GrowDecision::Add;
        }
        let d = self.density.density(x);
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for node in &self.nodes {
            let dc = self.density.density(node.antecedent.midpoint().as_slice());
            lo = lo.min(dc);
            hi = hi.max(dc);
        }
        if !(d > hi || d < lo) {
            return GrowDecision::None;
        }
        if best.exp() >= self.replace_threshold {
            GrowDecision::Replace(nearest)
        } else {
            GrowDecision::Add
        }
    }

    /// Nodes whose normalised firing series is weakly related to the
    /// targets, judged by MICI averaged over outputs.
    pub fn prune_check(&self, firings: &DMatrix<f64>, targets: &DMatrix<f64>, stamp: usize) -> Vec<usize> {
        let r = self.nodes.len();
        if r < 2 || firings.nrows() < 2 {
            return Vec::new();
        }
        let scores: Vec<f64> = (0..r)
            .map(|i| {
                let g = firings.column(i);
                (0..targets.ncols())
                    .map(|o| mici(&PairStats::from_series(g.as_slice(), targets.column(o).as_slice())))
                    .sum::<f64>()
                    / targets.ncols() as f64
            })
            .collect();
        let mean = scores.iter().sum::<f64>() / r as f64;
        let std = (scores.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / r as f64).sqrt();
        let limit = mean + self.config.prune_threshold * std;
        let mut out: Vec<usize> = (0..r)
            .filter(|&i| scores[i] > limit && stamp > self.nodes[i].birth_stamp)
            .collect();
        if out.len() >= r {
            out.truncate(r - 1);
        }
        out
    }

    /// Single pass over a labelled chunk of layer inputs.
    pub fn train_chunk(&mut self, inputs: &DMatrix<f64>, targets: &DMatrix<f64>, stamp: usize) -> Result<LayerReport> {
        if inputs.ncols() != self.n_inputs {
            return Err(Error::DimensionMismatch {
                expected: self.n_inputs,
                got: inputs.ncols(),
                context: "layer training inputs",
            });
        }
        if targets.ncols() != self.n_outputs || targets.nrows() != inputs.nrows() {
            return Err(Error::DimensionMismatch {
                expected: self.n_outputs,
                got: targets.ncols(),
                context: "layer training targets",
            });
        }
        let n_rows = inputs.nrows();
        let mut report = LayerReport {
            samples: n_rows,
            ..Default::default()
        };
        if n_rows == 0 {
            return Ok(report);
        }
        let spread = column_std(inputs)
            .into_iter()
            .map(|s| s * self.config.center_spread)
            .collect::<Vec<_>>();
        let mut errors = 0usize;
        let mut x = vec![0.0; self.n_inputs];
        let mut y = vec![0.0; self.n_outputs];
        for t in 0..n_rows {
            for (j, v) in x.iter_mut().enumerate() {
                *v = inputs[(t, j)];
            }
            for (o, v) in y.iter_mut().enumerate() {
                *v = targets[(t, o)];
            }
            let label = predict_class_of_target(&y);
            let inf = self.infer(&x);
            if !inf.covered || predict_class(inf.y.as_slice()) != label {
                errors += 1;
            }

            self.density.update(&x);
            match self.grow_check(&x) {
                GrowDecision::Add => {
                    let outcome = self.add_node(&x, &spread, inputs, targets, stamp);
                    report.added += 1;
                    report.scn_events.push(outcome);
                }
                GrowDecision::Replace(i) => {
                    let inv_cov = self.nodes[i].antecedent.inv_cov.clone();
                    self.nodes[i].antecedent = Antecedent::centered(&x, &spread, inv_cov);
                    report.replaced += 1;
                }
                GrowDecision::None => {}
            }

            let xe = chebyshev_expand(&x);
            let lambda = self.normalized_firings(&x);
            let decay = self.config.decay;
            for (node, &l) in self.nodes.iter_mut().zip(&lambda) {
                fwgrls_update(node, &xe, l, &y, decay);
            }
        }
        report.train_error = errors as f64 / n_rows as f64;

        if self.nodes.len() >= 2 {
            let mut firings = DMatrix::zeros(n_rows, self.nodes.len());
            for t in 0..n_rows {
                for (j, v) in x.iter_mut().enumerate() {
                    *v = inputs[(t, j)];
                }
                for (i, l) in self.normalized_firings(&x).into_iter().enumerate() {
                    firings[(t, i)] = l;
                }
            }
            let mut doomed = self.prune_check(&firings, targets, stamp);
            doomed.sort_unstable_by(|a, b| b.cmp(a));
            for i in &doomed {
                self.nodes.remove(*i);
            }
            report.pruned = doomed.len();
        }
        Ok(report)
    }

    fn add_node(
        &mut self,
        x: &[f64],
        spread: &[f64],
        window: &DMatrix<f64>,
        targets: &DMatrix<f64>,
        stamp: usize,
    ) -> ScnEvent {
        let residuals = if self.nodes.is_empty() {
            targets.clone()
        } else {
            targets - self.infer_batch(window).0
        };
        let w = match argmax(&self.log_crisp_firings(x)) {
            (i, v) if v > f64::NEG_INFINITY => self.nodes[i].w.clone(),
            _ => DMatrix::zeros(2 * self.n_inputs + 1, self.n_outputs),
        };
        let seed = splitmix64(self.seed ^ splitmix64(self.configurations));
        self.configurations += 1;
        let req = ConfigureRequest {
            center: x,
            spread,
            window,
            residuals: &residuals,
            existing: self.nodes.len(),
            q: self.crisp_q(),
            radius: self.config.radius,
        };
        let (antecedent, outcome): (Antecedent, ScnOutcome) = configure_node(&req, &self.scn, seed);
        let event = ScnEvent {
            nodes_before: self.nodes.len(),
            scope_used: outcome.scope_used,
            zeta_total: outcome.zeta_total,
            satisfied: outcome.satisfied,
        };
        self.nodes
            .push(HiddenNode::new(antecedent, w, self.config.omega, stamp));
        event
    }
}

fn predict_class_of_target(y: &[f64]) -> usize {
    let mut best = 0;
    for (o, &v) in y.iter().enumerate() {
        if v > y[best] {
            best = o;
        }
    }
    best
}

fn argmax(v: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, &x) in v.iter().enumerate() {
        if x > best.1 {
            best = (i, x);
        }
    }
    best
}

fn normalize_log(logs: &[f64]) -> Vec<f64> {
    let shift = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if shift == f64::NEG_INFINITY {
        return vec![0.0; logs.len()];
    }
    let e: Vec<f64> = logs.iter().map(|l| (l - shift).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

fn column_std(x: &DMatrix<f64>) -> Vec<f64> {
    let n = x.nrows() as f64;
    (0..x.ncols())
        .map(|j| {
            let c = x.column(j);
            let mean = c.sum() / n;
            (c.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::one_hot_encode;

    fn layer(n: usize, m: usize) -> EscnLayer {
        EscnLayer::new(n, m, EscnConfig::default(), ScnParams::default(), 11).unwrap()
    }

    #[test]
    fn class_prediction_rules() {
        assert_eq!(predict_class(&[0.1, 0.7, 0.2]), 1);
        assert_eq!(predict_class(&[0.5, 0.5]), 0);
        assert_eq!(predict_class(&[0.5]), 0);
        assert_eq!(predict_class(&[0.49]), 1);
    }

    #[test]
    fn single_full_node_gives_half_beta() {
        let mut l = layer(2, 2);
        let a = Antecedent::centered(&[0.3, -0.2], &[0.0, 0.0], DMatrix::identity(2, 2));
        let w = DMatrix::from_fn(5, 2, |i, j| (i + 2 * j) as f64 * 0.1 - 0.2);
        l.nodes.push(HiddenNode::new(a, w.clone(), 1e5, 0));
        let x = [0.3, -0.2];
        let beta = w.tr_mul(&chebyshev_expand(&x));
        let y = l.infer(&x).y;
        for o in 0..2 {
            assert!((y[o] - beta[o] / 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn empty_layer_is_uncovered_and_grows() {
        let l = layer(2, 2);
        let inf = l.infer(&[1.0, 2.0]);
        assert!(!inf.covered);
        assert_eq!(inf.y.as_slice(), &[0.0, 0.0]);
        assert_eq!(l.grow_check(&[1.0, 2.0]), GrowDecision::Add);
    }

    #[test]
    fn first_chunk_creates_nodes() {
        let mut l = layer(2, 2);
        let x = DMatrix::from_fn(100, 2, |i, j| ((i * 7 + j * 3) % 11) as f64 / 11.0);
        let labels: Vec<usize> = (0..100).map(|i| 1 + usize::from(x[(i, 0)] > 0.5)).collect();
        let y = one_hot_encode(&labels, 2).unwrap();
        let rep = l.train_chunk(&x, &y, 1).unwrap();
        assert!(l.n_nodes() >= 1);
        assert!(rep.added >= 1);
        assert_eq!(rep.scn_events.len(), rep.added);
    }

    #[test]
    fn single_class_chunk_is_fine() {
        let mut l = layer(3, 2);
        let x = DMatrix::from_fn(50, 3, |i, j| (i as f64 * 0.1 + j as f64).cos());
        let y = one_hot_encode(&vec![1; 50], 2).unwrap();
        l.train_chunk(&x, &y, 1).unwrap();
        let out = l.infer(&[0.0, 0.0, 0.0]).y;
        assert!(out.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn prune_keeps_one() {
        let l = layer(1, 1);
        let f = DMatrix::from_fn(10, 1, |i, _| i as f64);
        assert!(l.prune_check(&f, &f, 5).is_empty());
    }
}
