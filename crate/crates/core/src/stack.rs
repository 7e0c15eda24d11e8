//! Deep stack of eSCN layers chained by random shifts.
//!
//! Layer `d > 1` sees `λ∘X + α·Y_{d-1}·P_d`, where `Y_{d-1}` is the output
//! of the layer below and `P_d` a frozen `m x n` matrix with entries in
//! `[0, 1]`. The deepest layer produces the final prediction. A drift
//! verdict appends a new layer, a stable verdict updates only the deepest
//! layer, and a warning buffers the chunk. Layers whose outputs become
//! linearly redundant are merged by dropping the younger one.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::drift::{DriftConfig, DriftDetector, DriftStatus, DriftVerdict};
use crate::error::{Error, Result};
use crate::escn::{predict_class, EscnConfig, EscnLayer, LayerReport};
use crate::scn::ScnParams;
use crate::splitmix64;
use crate::stream::DataChunk;
use crate::weighting::{standardized_mici, FeatureMoments, InputWeights};

pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StackConfig {
    /// Random-shift constant.
    pub alpha: f64,
    /// Merge two layers when their output MICI is at most this.
    pub merge_threshold: f64,
}

impl Default for StackConfig {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            merge_threshold: 0.01,
        }
    }
}

impl StackConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.alpha.is_finite() {
            return Err(Error::InvalidParameter("stack.alpha must be finite".into()));
        }
        if !(self.merge_threshold >= 0.0) {
            return Err(Error::InvalidParameter(
                "stack.merge_threshold must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerLink {
    pub layer: EscnLayer,
    /// `m x n` shift projection.
    pub p: DMatrix<f64>,
    pub birth_stamp: usize,
}

/// Weighted input of a layer, with the random shift when a layer below
/// exists.
pub fn layer_input(
    x: &DMatrix<f64>,
    lambda: &InputWeights,
    shift: Option<(&DMatrix<f64>, &DMatrix<f64>)>,
    alpha: f64,
) -> Result<DMatrix<f64>> {
    if lambda.len() != x.ncols() {
        return Err(Error::DimensionMismatch {
            expected: x.ncols(),
            got: lambda.len(),
            context: "input weights",
        });
    }
    let mut out = lambda.apply(x);
    if let Some((y_prev, p)) = shift {
        if y_prev.nrows() != x.nrows() || y_prev.ncols() != p.nrows() || p.ncols() != x.ncols() {
            return Err(Error::DimensionMismatch {
                expected: x.ncols(),
                got: p.ncols(),
                context: "random shift",
            });
        }
        out += y_prev * p * alpha;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Forward {
    /// Output of every layer, bottom first.
    pub outputs: Vec<DMatrix<f64>>,
    /// Input of every layer, bottom first.
    pub inputs: Vec<DMatrix<f64>>,
    /// 0-based predicted classes from the deepest layer.
    pub classes: Vec<usize>,
    /// Rows where the deepest layer had no firing node; predicted class 0.
    pub uncovered: usize,
}

impl Forward {
    pub fn y(&self) -> &DMatrix<f64> {
        self.outputs.last().expect("forward on a non-empty stack")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergeEvent {
    pub kept_birth: usize,
    pub removed_birth: usize,
    pub removed_index: usize,
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChunkReport {
    pub stamp: usize,
    pub verdict: DriftVerdict,
    pub depth: usize,
    pub total_nodes: usize,
    pub layer_nodes: Vec<usize>,
    pub lambda: Vec<f64>,
    /// Index of the layer that was trained, if any.
    pub trained_layer: Option<usize>,
    pub layer_report: Option<LayerReport>,
    pub new_layer: bool,
    pub buffered: usize,
    pub merge: Option<MergeEvent>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackedNetwork {
    pub links: Vec<LayerLink>,
    pub config: StackConfig,
    pub escn: EscnConfig,
    pub scn: ScnParams,
    pub moments: FeatureMoments,
    pub lambda: InputWeights,
    pub warning_buffer: Vec<DataChunk>,
    pub detector: DriftDetector,
    n_features: usize,
    n_classes: usize,
    seed: u64,
    layers_created: u64,
}

#[derive(Serialize, Deserialize)]
struct Snapshot {
    version: u32,
    network: StackedNetwork,
}

impl StackedNetwork {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        n_features: usize,
        n_classes: usize,
        config: StackConfig,
        escn: EscnConfig,
        scn: ScnParams,
        drift: DriftConfig,
        seed: u64,
    ) -> Result<Self> {
        config.validate()?;
        escn.validate()?;
        scn.validate()?;
        drift.validate()?;
        if n_features == 0 || n_classes == 0 {
            return Err(Error::InvalidParameter("network needs features and classes".into()));
        }
        Ok(Self {
            links: Vec::new(),
            config,
            escn,
            scn,
            moments: FeatureMoments::new(n_features),
            lambda: InputWeights::ones(n_features),
            warning_buffer: Vec::new(),
            detector: DriftDetector::new(drift),
            n_features,
            n_classes,
            seed,
            layers_created: 0,
        })
    }

    pub fn depth(&self) -> usize {
        self.links.len()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn total_nodes(&self) -> usize {
        self.links.iter().map(|l| l.layer.n_nodes()).sum()
    }

    /// Appends a fresh, untrained layer and returns its index.
    pub fn push_layer(&mut self, stamp: usize) -> Result<usize> {
        let k = self.layers_created;
        self.layers_created += 1;
        let layer_seed = splitmix64(self.seed ^ splitmix64(2 * k));
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(self.seed ^ splitmix64(2 * k + 1)));
        let p = DMatrix::from_fn(self.n_classes, self.n_features, |_, _| rng.random_range(0.0..=1.0));
        let layer = EscnLayer::new(
            self.n_features,
            self.n_classes,
            self.escn.clone(),
            self.scn.clone(),
            layer_seed,
        )?;
        self.links.push(LayerLink {
            layer,
            p,
            birth_stamp: stamp,
        });
        Ok(self.links.len() - 1)
    }

    /// Runs `x` through the first `depth` layers.
    fn forward_to(&self, x: &DMatrix<f64>, depth: usize) -> Result<Forward> {
        if x.ncols() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                got: x.ncols(),
                context: "stack input",
            });
        }
        let mut outputs: Vec<DMatrix<f64>> = Vec::with_capacity(depth);
        let mut inputs = Vec::with_capacity(depth);
        let mut uncovered = 0;
        for (d, link) in self.links.iter().take(depth).enumerate() {
            let shift = outputs.last().map(|y| (y, &link.p));
            let input = layer_input(x, &self.lambda, shift, self.config.alpha)?;
            let (y, u) = link.layer.infer_batch(&input);
            if d + 1 == depth {
                uncovered = u;
            }
            inputs.push(input);
            outputs.push(y);
        }
        let classes = match outputs.last() {
            None => vec![0; x.nrows()],
            Some(y) => (0..y.nrows())
                .map(|t| {
                    let row: Vec<f64> = y.row(t).iter().copied().collect();
                    if row.iter().all(|v| *v == 0.0) && uncovered > 0 {
                        0
                    } else {
                        predict_class(&row)
                    }
                })
                .collect(),
        };
        Ok(Forward {
            outputs,
            inputs,
            classes,
            uncovered,
        })
    }

    pub fn forward(&self, x: &DMatrix<f64>) -> Result<Forward> {
        if self.links.is_empty() {
            return Err(Error::InvalidParameter("forward on an empty stack".into()));
        }
        self.forward_to(x, self.links.len())
    }

    /// 0-based class predictions; class 0 for every row of an empty stack.
    pub fn predict(&self, x: &DMatrix<f64>) -> Result<Vec<usize>> {
        if self.links.is_empty() {
            return Ok(vec![0; x.nrows()]);
        }
        Ok(self.forward(x)?.classes)
    }

    /// Trains layer `index` on `x`, `y` with upstream layers frozen.
    fn train_layer(&mut self, index: usize, x: &DMatrix<f64>, y: &DMatrix<f64>, stamp: usize) -> Result<LayerReport> {
        let below = self.forward_to(x, index)?;
        let shift = below.outputs.last().map(|prev| (prev, &self.links[index].p));
        let input = layer_input(x, &self.lambda, shift, self.config.alpha)?;
        self.links[index].layer.train_chunk(&input, y, stamp)
    }

    /// Pairwise output similarity (MICI of standardised outputs, averaged
    /// over classes); drops the younger of the first pair at or below the
    /// threshold. Called on the outputs seen before the chunk updates the stack.
    pub fn prune_layers(&mut self, outputs: &[DMatrix<f64>]) -> Option<MergeEvent> {
        let d = self.links.len();
        if d < 2 || outputs.len() != d {
            return None;
        }
        for i in 0..d {
            for k in (i + 1)..d {
                let (yi, yk) = (&outputs[i], &outputs[k]);
                let similarity = (0..yi.ncols())
                    .map(|o| standardized_mici(yi.column(o).as_slice(), yk.column(o).as_slice()))
                    .sum::<f64>()
                    / yi.ncols() as f64;
                if similarity <= self.config.merge_threshold {
                    let younger = if self.links[k].birth_stamp >= self.links[i].birth_stamp {
                        k
                    } else {
                        i
                    };
                    let older = i + k - younger;
                    let event = MergeEvent {
                        kept_birth: self.links[older].birth_stamp,
                        removed_birth: self.links[younger].birth_stamp,
                        removed_index: younger,
                        similarity,
                    };
                    self.links.remove(younger);
                    return Some(event);
                }
            }
        }
        None
    }

    /// One training step of the stack on a labelled chunk.
    pub fn process_chunk(&mut self, chunk: &DataChunk) -> Result<ChunkReport> {
        let y = chunk.y.as_ref().ok_or(Error::Unlabeled(chunk.stamp))?;
        if chunk.n_features() != self.n_features || y.ncols() != self.n_classes {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                got: chunk.n_features(),
                context: "training chunk",
            });
        }
        let stamp = chunk.stamp;
        self.moments.push_matrix(&chunk.x);
        self.lambda = self.moments.input_weights();

        let mut new_layer = false;
        let mut trained_layer = None;
        let mut layer_report = None;
        let verdict;
        let mut merge = None;
        if self.links.is_empty() {
            let (ad, aw) = self.detector.alphas();
            self.detector.skip(chunk.len());
            verdict = DriftVerdict::stable(ad, aw);
            let idx = self.push_layer(stamp)?;
            layer_report = Some(self.train_layer(idx, &chunk.x, y, stamp)?);
            trained_layer = Some(idx);
            new_layer = true;
            self.warning_buffer.clear();
        } else {
            let labels = chunk.labels().expect("labelled chunk");
            let fwd = self.forward(&chunk.x)?;
            let errors: Vec<f64> = fwd
                .classes
                .iter()
                .zip(&labels)
                .map(|(p, l)| if p == l { 0.0 } else { 1.0 })
                .collect();
            verdict = self.detector.observe(&errors)?;
            merge = self.prune_layers(&fwd.outputs);
            match verdict.status {
                DriftStatus::Drift => {
                    self.warning_buffer.push(chunk.clone());
                    let data = DataChunk::concat(&self.warning_buffer)?;
                    self.warning_buffer.clear();
                    let idx = self.push_layer(stamp)?;
                    let dy = data.y.as_ref().expect("labelled buffer");
                    layer_report = Some(self.train_layer(idx, &data.x, dy, stamp)?);
                    trained_layer = Some(idx);
                    new_layer = true;
                }
                DriftStatus::Warning => {
                    self.warning_buffer.push(chunk.clone());
                    let cap = self.detector.config.window.max(1);
                    while self.warning_buffer.len() > cap {
                        self.warning_buffer.remove(0);
                    }
                }
                DriftStatus::Stable => {
                    self.warning_buffer.clear();
                    let idx = self.links.len() - 1;
                    layer_report = Some(self.train_layer(idx, &chunk.x, y, stamp)?);
                    trained_layer = Some(idx);
                }
            }
        }

        Ok(ChunkReport {
            stamp,
            verdict,
            depth: self.links.len(),
            total_nodes: self.total_nodes(),
            layer_nodes: self.links.iter().map(|l| l.layer.n_nodes()).collect(),
            lambda: self.lambda.0.clone(),
            trained_layer,
            layer_report,
            new_layer,
            buffered: self.warning_buffer.len(),
            merge,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        let snap = Snapshot {
            version: SNAPSHOT_VERSION,
            network: self.clone(),
        };
        serde_json::to_string(&snap).map_err(|e| Error::Snapshot(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Snapshot(e.to_string()))?;
        match value.get("version").and_then(|v| v.as_u64()) {
            Some(v) if v == u64::from(SNAPSHOT_VERSION) => {}
            Some(v) => return Err(Error::Snapshot(format!("unsupported snapshot version {v}"))),
            None => return Err(Error::Snapshot("missing snapshot version".into())),
        }
        let snap: Snapshot = serde_json::from_value(value).map_err(|e| Error::Snapshot(e.to_string()))?;
        Ok(snap.network)
    }

    /// Serialized state of one layer, for freeze checks.
    pub fn layer_json(&self, index: usize) -> Result<String> {
        serde_json::to_string(&self.links[index]).map_err(|e| Error::Snapshot(e.to_string()))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}
