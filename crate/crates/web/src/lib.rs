//! Browser bindings for the dsscn demo page.
//!
//! Each export returns a JSON string; the plain functions behind them are
//! usable (and tested) natively.

use dsscn::drift::{DriftConfig, DriftDetector};
use dsscn::escn::node_activation;
use dsscn::harness::{run_prequential_with, Protocol, RunConfig, TraceRow};
use dsscn::stack::StackedNetwork;
use dsscn::stream::{HyperplaneParams, SeaParams, StreamSource};
use dsscn::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Scaled-down version of a named preset with `samples` rows.
pub fn demo_source(dataset: &str, samples: usize) -> Result<(StreamSource, usize)> {
    match dataset {
        "sea" => Ok((
            StreamSource::Sea(SeaParams::alternating(samples, samples.div_ceil(4).max(1), &[4.0, 7.0])),
            500,
        )),
        "hyperplane" => {
            let mut p = HyperplaneParams::preset();
            p.drift_start = p.drift_start * samples / p.samples;
            p.drift_span = p.drift_span * samples / p.samples;
            p.samples = samples;
            Ok((StreamSource::Hyperplane(p), 1200))
        }
        other => Err(Error::InvalidParameter(format!("unknown dataset {other:?}"))),
    }
}

#[derive(Debug, Serialize)]
pub struct StreamRun {
    pub trace: Vec<TraceRow>,
    pub accuracy: f64,
    pub drift_stamps: Vec<usize>,
    pub warning_stamps: Vec<usize>,
    pub final_depth: usize,
    pub final_nodes: usize,
}

fn prequential(dataset: &str, samples: usize, seed: u64, alpha: f64) -> Result<(StreamRun, StackedNetwork)> {
    let (source, chunk) = demo_source(dataset, samples)?;
    let mut cfg = RunConfig::new(source, Protocol::Prequential, chunk, seed);
    cfg.engine.stack.alpha = alpha;
    cfg.validate()?;
    let mut last = None;
    let report = run_prequential_with(&cfg, |n| last = Some(n.clone()))?;
    let net = last.ok_or_else(|| Error::InvalidParameter("stream produced no chunks".into()))?;
    let s = report.summary;
    Ok((
        StreamRun {
            trace: report.trace,
            accuracy: s.accuracy_mean,
            drift_stamps: s.drift_stamps,
            warning_stamps: s.warning_stamps,
            final_depth: s.final_depth,
            final_nodes: s.final_nodes,
        },
        net,
    ))
}

pub fn stream_run(dataset: &str, samples: usize, seed: u64, alpha: f64) -> Result<StreamRun> {
    prequential(dataset, samples, seed, alpha).map(|(r, _)| r)
}

#[derive(Debug, Serialize)]
pub struct MembershipCurves {
    pub layer: usize,
    pub feature: usize,
    pub xs: Vec<f64>,
    /// One `(lower, upper)` curve pair per hidden node.
    pub lower: Vec<Vec<f64>>,
    pub upper: Vec<Vec<f64>>,
}

/// Interval firing of every node of `layer` (1-based) as `feature` sweeps
/// `[lo, hi]` in raw units, the other inputs held at each node's centre.
pub fn membership(
    net: &StackedNetwork,
    layer: usize,
    feature: usize,
    lo: f64,
    hi: f64,
    points: usize,
) -> Result<MembershipCurves> {
    if layer == 0 || layer > net.depth() {
        return Err(Error::InvalidParameter(format!(
            "layer {layer} out of range 1..={}",
            net.depth()
        )));
    }
    if feature >= net.n_features() || points < 2 || hi.partial_cmp(&lo) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::InvalidParameter("bad feature index or sweep range".into()));
    }
    let link = &net.links[layer - 1];
    let weight = net.lambda.0[feature];
    let radius = link.layer.config.radius;
    let xs: Vec<f64> = (0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect();
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    for node in &link.layer.nodes {
        let mut input: Vec<f64> = node.antecedent.midpoint().iter().copied().collect();
        let (mut lo_curve, mut up_curve) = (Vec::with_capacity(points), Vec::with_capacity(points));
        for x in &xs {
            input[feature] = weight * x;
            let f = node_activation(&node.antecedent, &input, radius);
            lo_curve.push(f.lower);
            up_curve.push(f.upper);
        }
        lower.push(lo_curve);
        upper.push(up_curve);
    }
    Ok(MembershipCurves {
        layer,
        feature,
        xs,
        lower,
        upper,
    })
}

fn feature_range(dataset: &str) -> (f64, f64) {
    if dataset == "sea" {
        (0.0, 10.0)
    } else {
        (0.0, 1.0)
    }
}

pub fn trained_membership(
    dataset: &str,
    samples: usize,
    seed: u64,
    layer: usize,
    feature: usize,
) -> Result<MembershipCurves> {
    let (_, net) = prequential(dataset, samples, seed, 0.5)?;
    let (lo, hi) = feature_range(dataset);
    membership(&net, layer, feature, lo, hi, 121)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimelinePoint {
    pub chunk: usize,
    pub error_rate: f64,
    pub dist: f64,
    pub eps_drift: f64,
    pub eps_warning: f64,
    pub status: dsscn::drift::DriftStatus,
}

/// Detector verdicts on a Bernoulli error stream whose rate moves from
/// `p_before` to `p_after` linearly over `ramp` chunks starting after chunk
/// `jump`.
#[allow(clippy::too_many_arguments)]
pub fn timeline(
    p_before: f64,
    p_after: f64,
    jump: usize,
    ramp: usize,
    chunks: usize,
    chunk_size: usize,
    seed: u64,
    drift: DriftConfig,
) -> Result<Vec<TimelinePoint>> {
    drift.validate()?;
    if !(0.0..=1.0).contains(&p_before) || !(0.0..=1.0).contains(&p_after) || chunk_size == 0 {
        return Err(Error::InvalidParameter(
            "error rates must lie in [0, 1] and chunks be non-empty".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut det = DriftDetector::new(drift);
    (1..=chunks)
        .map(|k| {
            let progress = if k <= jump {
                0.0
            } else {
                ((k - jump) as f64 / ramp.max(1) as f64).min(1.0)
            };
            let p = p_before + (p_after - p_before) * progress;
            let errors: Vec<f64> = (0..chunk_size)
                .map(|_| f64::from(u8::from(rng.random_bool(p))))
                .collect();
            let v = det.observe(&errors)?;
            Ok(TimelinePoint {
                chunk: k,
                error_rate: errors.iter().sum::<f64>() / chunk_size as f64,
                dist: v.dist,
                eps_drift: v.eps_drift,
                eps_warning: v.eps_warning,
                status: v.status,
            })
        })
        .collect()
}

fn to_js<T: Serialize>(value: Result<T>) -> std::result::Result<String, JsError> {
    let value = value.map_err(|e| JsError::new(&e.to_string()))?;
    serde_json::to_string(&value).map_err(|e| JsError::new(&e.to_string()))
}

/// Prequential run over a scaled preset; JSON `StreamRun`.
#[wasm_bindgen]
pub fn run_stream(dataset: &str, samples: u32, seed: u32, alpha: f64) -> std::result::Result<String, JsError> {
    to_js(stream_run(dataset, samples as usize, u64::from(seed), alpha))
}

/// Node membership curves after a prequential run; JSON `MembershipCurves`.
#[wasm_bindgen]
pub fn membership_curves(
    dataset: &str,
    samples: u32,
    seed: u32,
    layer: u32,
    feature: u32,
) -> std::result::Result<String, JsError> {
    to_js(trained_membership(
        dataset,
        samples as usize,
        u64::from(seed),
        layer as usize,
        feature as usize,
    ))
}

/// Detector timeline on a synthetic error stream; JSON list of points.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn drift_timeline(
    p_before: f64,
    p_after: f64,
    jump: u32,
    ramp: u32,
    chunks: u32,
    chunk_size: u32,
    seed: u32,
    alpha_drift: f64,
    alpha_warning: f64,
) -> std::result::Result<String, JsError> {
    let drift = DriftConfig {
        alpha_drift,
        alpha_warning,
        ..DriftConfig::default()
    };
    to_js(timeline(
        p_before,
        p_after,
        jump as usize,
        ramp as usize,
        chunks as usize,
        chunk_size as usize,
        u64::from(seed),
        drift,
    ))
}
