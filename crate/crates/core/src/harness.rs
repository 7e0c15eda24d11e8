//! Evaluation protocols: periodic hold-out and prequential test-then-train.
//!
//! A run produces a deterministic trace (one row per stamp), the list of
//! node-configuration events, and wall-clock timings kept apart from the
//! trace so that same-seed traces are byte-identical.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;
#[cfg(not(target_arch = "wasm32"))]
use std::time::Instant;
#[cfg(target_arch = "wasm32")]
use web_time::Instant;

use serde::{Deserialize, Serialize};

use crate::config::EngineConfig;
use crate::drift::DriftStatus;
use crate::error::{Error, Result};
use crate::stack::StackedNetwork;
use crate::stream::{DataChunk, HyperplaneParams, SeaParams, StreamSource};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    Holdout,
    Prequential,
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "holdout" | "hold-out" => Ok(Protocol::Holdout),
            "prequential" => Ok(Protocol::Prequential),
            other => Err(Error::InvalidParameter(format!("unknown protocol {other:?}"))),
        }
    }
}

impl std::fmt::Display for Protocol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Protocol::Holdout => "holdout",
            Protocol::Prequential => "prequential",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub source: StreamSource,
    pub protocol: Protocol,
    pub chunk_size: usize,
    pub train_fraction: f64,
    pub seed: u64,
    pub engine: EngineConfig,
    /// Stop updating the model after this stamp.
    pub freeze_after: Option<usize>,
}

impl RunConfig {
    pub fn new(source: StreamSource, protocol: Protocol, chunk_size: usize, seed: u64) -> Self {
        Self {
            source,
            protocol,
            chunk_size,
            train_fraction: 0.8,
            seed,
            engine: EngineConfig::default(),
            freeze_after: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.chunk_size < 2 {
            return Err(Error::InvalidParameter("chunk size must be at least 2".into()));
        }
        if self.protocol == Protocol::Holdout && !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::InvalidParameter("train fraction must lie in (0, 1)".into()));
        }
        self.engine.validate()
    }

    /// Resolved configuration as TOML, used as the run header.
    pub fn header(&self) -> String {
        #[derive(Serialize)]
        struct Header<'a> {
            run: RunHeader<'a>,
            #[serde(flatten)]
            engine: &'a EngineConfig,
        }
        #[derive(Serialize)]
        struct RunHeader<'a> {
            source: &'a StreamSource,
            protocol: Protocol,
            chunk_size: usize,
            train_fraction: f64,
            seed: u64,
            #[serde(skip_serializing_if = "Option::is_none")]
            freeze_after: Option<usize>,
        }
        toml::to_string(&Header {
            run: RunHeader {
                source: &self.source,
                protocol: self.protocol,
                chunk_size: self.chunk_size,
                train_fraction: self.train_fraction,
                seed: self.seed,
                freeze_after: self.freeze_after,
            },
            engine: &self.engine,
        })
        .expect("run header serializes")
    }
}

/// Named dataset presets: source, chunk size and hold-out train fraction.
pub fn dataset_preset(name: &str) -> Option<(StreamSource, usize, f64)> {
    match name {
        "sea" => Some((StreamSource::Sea(SeaParams::preset()), 500, 0.8)),
        "hyperplane" => Some((
            StreamSource::Hyperplane(HyperplaneParams::preset()),
            1200,
            1000.0 / 1200.0,
        )),
        _ => None,
    }
}

pub const DATASET_PRESETS: &[&str] = &["sea", "hyperplane"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub stamp: usize,
    pub train_samples: usize,
    pub test_samples: usize,
    /// Empty when nothing was tested at this stamp.
    pub accuracy: Option<f64>,
    pub verdict: Option<DriftStatus>,
    /// Detector statistic and thresholds behind `verdict`.
    pub drift_dist: Option<f64>,
    pub eps_drift: Option<f64>,
    pub eps_warning: Option<f64>,
    pub depth: usize,
    pub nodes: usize,
    pub added: usize,
    pub replaced: usize,
    pub pruned: usize,
    pub new_layer: bool,
    pub merged: bool,
    /// Input weights joined by `;`.
    pub lambda: String,
    /// Scopes used by node configurations at this stamp, joined by `;`.
    pub scopes: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScopeEvent {
    pub stamp: usize,
    pub layer: usize,
    pub nodes_before: usize,
    pub scope_used: f64,
    pub zeta_total: f64,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub stamps: usize,
    pub tested_stamps: usize,
    pub accuracy_mean: f64,
    pub accuracy_std: f64,
    pub nodes_mean: f64,
    pub nodes_std: f64,
    pub depth_mean: f64,
    pub depth_std: f64,
    pub final_nodes: usize,
    pub final_depth: usize,
    pub input_dims: usize,
    pub drift_stamps: Vec<usize>,
    pub warning_stamps: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_std: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub header: String,
    pub trace: Vec<TraceRow>,
    pub scope_events: Vec<ScopeEvent>,
    /// Wall seconds per stamp, aligned with `trace`.
    pub runtimes: Vec<f64>,
    pub summary: Summary,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Mean and population std of every metric; runtime is filled only when
/// timings are given.
pub fn summarize(trace: &[TraceRow], runtimes: Option<&[f64]>) -> Summary {
    let acc: Vec<f64> = trace.iter().filter_map(|r| r.accuracy).collect();
    let nodes: Vec<f64> = trace.iter().map(|r| r.nodes as f64).collect();
    let depth: Vec<f64> = trace.iter().map(|r| r.depth as f64).collect();
    let (accuracy_mean, accuracy_std) = mean_std(&acc);
    let (nodes_mean, nodes_std) = mean_std(&nodes);
    let (depth_mean, depth_std) = mean_std(&depth);
    let rt = runtimes.map(mean_std);
    let stamps_with = |s: DriftStatus| trace.iter().filter(|r| r.verdict == Some(s)).map(|r| r.stamp).collect();
    Summary {
        stamps: trace.len(),
        tested_stamps: acc.len(),
        accuracy_mean,
        accuracy_std,
        nodes_mean,
        nodes_std,
        depth_mean,
        depth_std,
        final_nodes: trace.last().map_or(0, |r| r.nodes),
        final_depth: trace.last().map_or(0, |r| r.depth),
        input_dims: trace
            .last()
            .map_or(0, |r| r.lambda.split(';').filter(|s| !s.is_empty()).count()),
        drift_stamps: stamps_with(DriftStatus::Drift),
        warning_stamps: stamps_with(DriftStatus::Warning),
        runtime_mean: rt.map(|r| r.0),
        runtime_std: rt.map(|r| r.1),
    }
}

struct Runner {
    config: RunConfig,
    network: Option<StackedNetwork>,
    trace: Vec<TraceRow>,
    scope_events: Vec<ScopeEvent>,
    runtimes: Vec<f64>,
}

impl Runner {
    fn new(config: &RunConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config: config.clone(),
            network: None,
            trace: Vec::new(),
            scope_events: Vec::new(),
            runtimes: Vec::new(),
        })
    }

    fn network_for(&mut self, chunk: &DataChunk) -> Result<&mut StackedNetwork> {
        if self.network.is_none() {
            let m = chunk.n_classes().ok_or(Error::Unlabeled(chunk.stamp))?;
            let e = &self.config.engine;
            self.network = Some(StackedNetwork::new(
                chunk.n_features(),
                m,
                e.stack.clone(),
                e.escn.clone(),
                e.scn.clone(),
                e.drift.clone(),
                self.config.seed,
            )?);
        }
        Ok(self.network.as_mut().expect("network just created"))
    }

    fn frozen(&self, stamp: usize) -> bool {
        self.config.freeze_after.is_some_and(|f| stamp > f)
    }

    fn test(&self, chunk: &DataChunk) -> Result<Option<f64>> {
        if chunk.is_empty() {
            return Ok(None);
        }
        let Some(net) = &self.network else { return Ok(None) };
        if net.depth() == 0 {
            return Ok(None);
        }
        let labels = chunk.labels().ok_or(Error::Unlabeled(chunk.stamp))?;
        let predicted = net.predict(&chunk.x)?;
        let correct = predicted.iter().zip(&labels).filter(|(p, l)| p == l).count();
        Ok(Some(correct as f64 / labels.len() as f64))
    }

    fn record(
        &mut self,
        train: Option<&DataChunk>,
        stamp: usize,
        tested: usize,
        accuracy: Option<f64>,
        started: Instant,
    ) -> Result<()> {
        let mut row = TraceRow {
            stamp,
            train_samples: 0,
            test_samples: tested,
            accuracy,
            verdict: None,
            drift_dist: None,
            eps_drift: None,
            eps_warning: None,
            depth: 0,
            nodes: 0,
            added: 0,
            replaced: 0,
            pruned: 0,
            new_layer: false,
            merged: false,
            lambda: String::new(),
            scopes: String::new(),
        };
        if let Some(chunk) = train.filter(|c| !c.is_empty() && !self.frozen(stamp)) {
            let net = self.network_for(chunk)?;
            let report = net.process_chunk(chunk)?;
            row.train_samples = chunk.len();
            row.verdict = Some(report.verdict.status);
            if report.verdict.cut.is_some() {
                row.drift_dist = Some(report.verdict.dist);
                row.eps_drift = Some(report.verdict.eps_drift);
                row.eps_warning = Some(report.verdict.eps_warning);
            }
            row.new_layer = report.new_layer;
            row.merged = report.merge.is_some();
            if let Some(lr) = &report.layer_report {
                row.added = lr.added;
                row.replaced = lr.replaced;
                row.pruned = lr.pruned;
                let layer = report.trained_layer.unwrap_or(0);
                let scopes: Vec<String> = lr.scn_events.iter().map(|e| e.scope_used.to_string()).collect();
                row.scopes = scopes.join(";");
                for e in &lr.scn_events {
                    self.scope_events.push(ScopeEvent {
                        stamp,
                        layer,
                        nodes_before: e.nodes_before,
                        scope_used: e.scope_used,
                        zeta_total: e.zeta_total,
                        satisfied: e.satisfied,
                    });
                }
            }
        }
        if let Some(net) = &self.network {
            row.depth = net.depth();
            row.nodes = net.total_nodes();
            row.lambda = net.lambda.0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(";");
        }
        self.trace.push(row);
        self.runtimes.push(started.elapsed().as_secs_f64());
        Ok(())
    }

    fn finish(self) -> RunReport {
        let summary = summarize(&self.trace, Some(&self.runtimes));
        RunReport {
            header: self.config.header(),
            trace: self.trace,
            scope_events: self.scope_events,
            runtimes: self.runtimes,
            summary,
        }
    }
}

/// Leading `train_fraction` of each chunk trains, the trailing remainder
/// tests the updated model.
pub fn run_holdout(config: &RunConfig) -> Result<RunReport> {
    run_holdout_with(config, |_| {})
}

pub fn run_holdout_with(config: &RunConfig, mut on_stamp: impl FnMut(&StackedNetwork)) -> Result<RunReport> {
    let mut runner = Runner::new(config)?;
    for chunk in config.source.chunks(config.chunk_size, config.seed)? {
        let chunk = chunk?;
        let started = Instant::now();
        let split = (chunk.len() as f64 * config.train_fraction).floor() as usize;
        if split == 0 || split >= chunk.len() {
            return Err(Error::InvalidChunk(format!(
                "stamp {}: {} rows cannot be split with train fraction {}",
                chunk.stamp,
                chunk.len(),
                config.train_fraction
            )));
        }
        let train = chunk.rows(0, split)?;
        let test = chunk.rows(split, chunk.len())?;
        // train first, then test on the held-out tail
        let mut accuracy = None;
        runner.record(Some(&train), chunk.stamp, 0, None, started)?;
        if let Some(a) = runner.test(&test)? {
            accuracy = Some(a);
        }
        let row = runner.trace.last_mut().expect("row just recorded");
        row.accuracy = accuracy;
        row.test_samples = if accuracy.is_some() { test.len() } else { 0 };
        *runner.runtimes.last_mut().expect("timing just recorded") = started.elapsed().as_secs_f64();
        if let Some(net) = &runner.network {
            on_stamp(net);
        }
    }
    Ok(runner.finish())
}

/// Each chunk is tested with the model trained through the previous one,
/// then used for training.
pub fn run_prequential(config: &RunConfig) -> Result<RunReport> {
    run_prequential_with(config, |_| {})
}

pub fn run_prequential_with(config: &RunConfig, mut on_stamp: impl FnMut(&StackedNetwork)) -> Result<RunReport> {
    let mut runner = Runner::new(config)?;
    for chunk in config.source.chunks(config.chunk_size, config.seed)? {
        let chunk = chunk?;
        let started = Instant::now();
        let accuracy = runner.test(&chunk)?;
        let tested = if accuracy.is_some() { chunk.len() } else { 0 };
        runner.record(Some(&chunk), chunk.stamp, tested, accuracy, started)?;
        if let Some(net) = &runner.network {
            on_stamp(net);
        }
    }
    Ok(runner.finish())
}

pub fn run(config: &RunConfig) -> Result<RunReport> {
    match config.protocol {
        Protocol::Holdout => run_holdout(config),
        Protocol::Prequential => run_prequential(config),
    }
}

/// Independent runs on up to `jobs` threads; results keep input order.
pub fn run_many(configs: &[RunConfig], jobs: usize) -> Vec<Result<RunReport>> {
    let jobs = jobs.max(1);
    let mut results: Vec<Option<Result<RunReport>>> = (0..configs.len()).map(|_| None).collect();
    let next = std::sync::atomic::AtomicUsize::new(0);
    let slots = std::sync::Mutex::new(&mut results);
    std::thread::scope(|s| {
        for _ in 0..jobs.min(configs.len()) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if i >= configs.len() {
                    break;
                }
                let r = run(&configs[i]);
                slots.lock().expect("result lock")[i] = Some(r);
            });
        }
    });
    results.into_iter().map(|r| r.expect("every run finished")).collect()
}

pub fn write_trace<W: Write>(out: W, trace: &[TraceRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in trace {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trace<R: Read>(input: R) -> Result<Vec<TraceRow>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

pub fn write_trace_file(path: impl AsRef<Path>, trace: &[TraceRow]) -> Result<()> {
    write_trace(File::create(path)?, trace)
}

pub fn read_trace_file(path: impl AsRef<Path>) -> Result<Vec<TraceRow>> {
    read_trace(File::open(path)?)
}

pub fn write_scope_events<W: Write>(out: W, events: &[ScopeEvent]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for e in events {
        w.serialize(e)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_timings<W: Write>(out: W, trace: &[TraceRow], runtimes: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["stamp", "runtime_secs"])?;
    for (row, rt) in trace.iter().zip(runtimes) {
        w.write_record([row.stamp.to_string(), rt.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

/// Key-value text report, preceded by the commented run header.
pub fn summary_text(report: &RunReport) -> String {
    let s = &report.summary;
    let mut out = String::new();
    for line in report.header.lines() {
        let _ = writeln!(out, "# {line}");
    }
    let _ = writeln!(out, "stamps = {}", s.stamps);
    let _ = writeln!(out, "tested_stamps = {}", s.tested_stamps);
    let _ = writeln!(out, "accuracy = {:.4} +- {:.4}", s.accuracy_mean, s.accuracy_std);
    let _ = writeln!(out, "nodes = {:.2} +- {:.2}", s.nodes_mean, s.nodes_std);
    let _ = writeln!(out, "layers = {:.2} +- {:.2}", s.depth_mean, s.depth_std);
    if let (Some(m), Some(sd)) = (s.runtime_mean, s.runtime_std) {
        let _ = writeln!(out, "runtime_secs = {m:.4} +- {sd:.4}");
    }
    let _ = writeln!(out, "input_dims = {}", s.input_dims);
    let _ = writeln!(out, "final_nodes = {}", s.final_nodes);
    let _ = writeln!(out, "final_layers = {}", s.final_depth);
    let _ = writeln!(out, "drift_stamps = {}", join(&s.drift_stamps));
    let _ = writeln!(out, "warning_stamps = {}", join(&s.warning_stamps));
    let _ = writeln!(out, "scope_events = {}", report.scope_events.len());
    out
}

/// Machine-readable summary document.
pub fn summary_json(report: &RunReport) -> Result<String> {
    #[derive(Serialize)]
    struct Doc<'a> {
        config: &'a str,
        summary: &'a Summary,
        scope_events: usize,
        scopes_seen: Vec<f64>,
    }
    let mut scopes: Vec<f64> = report.scope_events.iter().map(|e| e.scope_used).collect();
    scopes.sort_by(f64::total_cmp);
    scopes.dedup();
    serde_json::to_string_pretty(&Doc {
        config: &report.header,
        summary: &report.summary,
        scope_events: report.scope_events.len(),
        scopes_seen: scopes,
    })
    .map_err(|e| Error::Snapshot(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(stamp: usize, acc: Option<f64>) -> TraceRow {
        TraceRow {
            stamp,
            train_samples: 10,
            test_samples: 10,
            accuracy: acc,
            verdict: Some(DriftStatus::Stable),
            drift_dist: Some(0.01),
            eps_drift: Some(0.2),
            eps_warning: Some(0.19),
            depth: 1,
            nodes: 3,
            added: 0,
            replaced: 0,
            pruned: 0,
            new_layer: false,
            merged: false,
            lambda: "1;0.5".into(),
            scopes: String::new(),
        }
    }

    #[test]
    fn summary_of_two_rows() {
        let s = summarize(&[row(1, Some(1.0)), row(2, Some(0.0))], None);
        assert_eq!((s.accuracy_mean, s.accuracy_std), (0.5, 0.5));
        assert_eq!(s.nodes_std, 0.0);
        assert_eq!(s.input_dims, 2);
    }

    #[test]
    fn summary_single_row_has_zero_std() {
        let s = summarize(&[row(1, Some(0.7))], None);
        assert_eq!(s.accuracy_std, 0.0);
    }

    #[test]
    fn trace_csv_round_trip() {
        let trace = vec![row(1, None), row(2, Some(0.123456789012345))];
        let mut buf = Vec::new();
        write_trace(&mut buf, &trace).unwrap();
        assert_eq!(read_trace(buf.as_slice()).unwrap(), trace);
    }

    #[test]
    fn protocol_parsing() {
        assert_eq!("holdout".parse::<Protocol>().unwrap(), Protocol::Holdout);
        assert_eq!("Prequential".parse::<Protocol>().unwrap(), Protocol::Prequential);
        assert!("kfold".parse::<Protocol>().is_err());
    }
}
