//! Three-state drift detection from Hoeffding bounds.
//!
//! The detector watches the per-sample 0/1 misclassification series of the
//! stack. Each chunk's series is appended to a reference history collected
//! since the last drift; the concatenation is split at a cut point and the
//! mean of the tail (which always holds the whole current chunk) is tested
//! against the mean of the head. A significant increase signals `Drift`,
//! a marginal one `Warning`.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum DriftStatus {
    Stable,
    Warning,
    Drift,
}

impl fmt::Display for DriftStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DriftStatus::Stable => "STABLE",
            DriftStatus::Warning => "WARNING",
            DriftStatus::Drift => "DRIFT",
        })
    }
}

impl std::str::FromStr for DriftStatus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "STABLE" => Ok(DriftStatus::Stable),
            "WARNING" => Ok(DriftStatus::Warning),
            "DRIFT" => Ok(DriftStatus::Drift),
            other => Err(Error::InvalidParameter(format!("unknown drift status {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DriftConfig {
    /// Time constant of the significance schedule, in chunks.
    pub tau: f64,
    /// Cap of the drift significance level.
    pub alpha_drift: f64,
    /// Cap of the warning significance level.
    pub alpha_warning: f64,
    /// Number of past chunks kept as reference.
    pub window: usize,
}

impl Default for DriftConfig {
    fn default() -> Self {
        Self {
            tau: 100.0,
            alpha_drift: 0.09,
            alpha_warning: 0.1,
            window: 20,
        }
    }
}

impl DriftConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.alpha_drift && self.alpha_drift < self.alpha_warning && self.alpha_warning < 1.0) {
            return Err(Error::Config(format!(
                "need 0 < alpha_drift ({}) < alpha_warning ({}) < 1",
                self.alpha_drift, self.alpha_warning
            )));
        }
        if !(self.tau > 0.0) {
            return Err(Error::Config(format!("tau must be positive, got {}", self.tau)));
        }
        if self.window == 0 {
            return Err(Error::Config("drift window must hold at least one chunk".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftVerdict {
    pub status: DriftStatus,
    /// Size of the head partition.
    pub cut: Option<usize>,
    pub dist: f64,
    pub eps_drift: f64,
    pub eps_warning: f64,
    pub alpha_drift: f64,
    pub alpha_warning: f64,
}

impl DriftVerdict {
    pub fn stable(alpha_drift: f64, alpha_warning: f64) -> Self {
        Self {
            status: DriftStatus::Stable,
            cut: None,
            dist: 0.0,
            eps_drift: f64::INFINITY,
            eps_warning: f64::INFINITY,
            alpha_drift,
            alpha_warning,
        }
    }
}

/// `(b - a) * sqrt((n - cut) / (2 cut (n - cut)) * ln(1/alpha))`.
///
/// Counts may be fractional. A non-positive `alpha` yields `+inf` (the bound
/// never triggers); `cut >= n` uses the limit of the expression.
pub fn hoeffding_bound(a: f64, b: f64, n: f64, cut: f64, alpha: f64) -> f64 {
    if !(alpha > 0.0) {
        return f64::INFINITY;
    }
    let range = (b - a).max(0.0);
    if range == 0.0 {
        return 0.0;
    }
    let ratio = if n > cut {
        (n - cut) / (2.0 * cut * (n - cut))
    } else {
        1.0 / (2.0 * cut)
    };
    range * (ratio * (1.0 / alpha).ln()).max(0.0).sqrt()
}

/// Significance levels after `t` samples with time constant `tau` (same unit):
/// `min(1 - exp(-t/tau), cap)` for drift and warning.
pub fn significance_schedule(t: f64, tau: f64, cfg: &DriftConfig) -> (f64, f64) {
    let rise = 1.0 - (-t.max(0.0) / tau).exp();
    (rise.min(cfg.alpha_drift), rise.min(cfg.alpha_warning))
}

fn prefix_sums(series: &[f64]) -> Vec<f64> {
    let mut acc = Vec::with_capacity(series.len() + 1);
    acc.push(0.0);
    let mut s = 0.0;
    for v in series {
        s += v;
        acc.push(s);
    }
    acc
}

fn range_of(series: &[f64]) -> (f64, f64) {
    series.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    })
}

fn cut_in(series: &[f64], prefix: &[f64], alpha: f64, max_cut: usize) -> Option<usize> {
    let n = series.len();
    if n < 2 || max_cut == 0 {
        return None;
    }
    let (a, b) = range_of(series);
    let mut best: Option<(usize, f64)> = None;
    for c in 1..=max_cut.min(n - 1) {
        let upper = prefix[c] / c as f64 + hoeffding_bound(a, b, n as f64, c as f64, alpha);
        // small tolerance so rounding in the prefix means cannot move the tie
        if best.is_none_or(|(_, u)| upper < u - 1e-12 * u.abs()) {
            best = Some((c, upper));
        }
    }
    best.map(|(c, _)| c)
}

/// Cut point of a series: the head length `c` in `1..N` whose mean plus
/// Hoeffding bound is smallest, i.e. where the running mean starts to rise.
/// Ties resolve to the smallest `c`. Returns `None` for series shorter than 2.
pub fn find_cut(series: &[f64], alpha: f64) -> Option<usize> {
    cut_in(series, &prefix_sums(series), alpha, series.len().saturating_sub(1))
}

/// Test `series` for an increase of its mean. The tail after the cut always
/// contains the last `min_tail` values. Thresholds are evaluated at the
/// effective count `c (N - c) / N` of the two partitions.
pub fn detect(series: &[f64], min_tail: usize, alpha_drift: f64, alpha_warning: f64) -> Result<DriftVerdict> {
    if let Some(pos) = series.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteSeries(pos));
    }
    let stable = DriftVerdict::stable(alpha_drift, alpha_warning);
    let n = series.len();
    if !(alpha_drift > 0.0) || n < 2 || min_tail >= n {
        return Ok(stable);
    }
    let (a, b) = range_of(series);
    if a == b {
        return Ok(stable);
    }
    let prefix = prefix_sums(series);
    let Some(cut) = cut_in(series, &prefix, alpha_drift, n - min_tail.max(1)) else {
        return Ok(stable);
    };
    let head = prefix[cut] / cut as f64;
    let tail = (prefix[n] - prefix[cut]) / (n - cut) as f64;
    let dist = tail - head;
    let effective = cut as f64 * (n - cut) as f64 / n as f64;
    let eps_drift = hoeffding_bound(a, b, n as f64, effective, alpha_drift);
    let eps_warning = hoeffding_bound(a, b, n as f64, effective, alpha_warning);
    let status = if dist >= eps_drift {
        DriftStatus::Drift
    } else if dist >= eps_warning {
        DriftStatus::Warning
    } else {
        DriftStatus::Stable
    };
    Ok(DriftVerdict {
        status,
        cut: Some(cut),
        dist,
        eps_drift,
        eps_warning,
        alpha_drift,
        alpha_warning,
    })
}

/// Stateful chunk-level detector: reference history plus sample counter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftDetector {
    pub config: DriftConfig,
    history: VecDeque<Vec<f64>>,
    samples_seen: u64,
    chunks_seen: u64,
}

impl DriftDetector {
    pub fn new(config: DriftConfig) -> Self {
        Self {
            config,
            history: VecDeque::new(),
            samples_seen: 0,
            chunks_seen: 0,
        }
    }

    pub fn samples_seen(&self) -> u64 {
        self.samples_seen
    }

    pub fn history_len(&self) -> usize {
        self.history.iter().map(Vec::len).sum()
    }

    /// Current `(alpha_drift, alpha_warning)`; tau is converted from chunks
    /// to samples with the mean chunk length observed so far.
    pub fn alphas(&self) -> (f64, f64) {
        if self.chunks_seen == 0 {
            return (0.0, 0.0);
        }
        let mean_chunk = self.samples_seen as f64 / self.chunks_seen as f64;
        significance_schedule(self.samples_seen as f64, self.config.tau * mean_chunk, &self.config)
    }

    /// Count a chunk that could not be monitored (no model yet).
    pub fn skip(&mut self, samples: usize) {
        self.samples_seen += samples as u64;
        self.chunks_seen += 1;
    }

    pub fn observe(&mut self, errors: &[f64]) -> Result<DriftVerdict> {
        let (alpha_drift, alpha_warning) = self.alphas();
        let mut series: Vec<f64> = Vec::with_capacity(self.history_len() + errors.len());
        for h in &self.history {
            series.extend_from_slice(h);
        }
        series.extend_from_slice(errors);
        let verdict = detect(&series, errors.len(), alpha_drift, alpha_warning)?;
        self.skip(errors.len());
        if verdict.status == DriftStatus::Drift {
            self.history.clear();
        } else {
            self.history.push_back(errors.to_vec());
            while self.history.len() > self.config.window {
                self.history.pop_front();
            }
        }
        Ok(verdict)
    }
}
