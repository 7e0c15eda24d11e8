//! Streaming data model.
//!
//! A stream is consumed as a sequence of [`DataChunk`]s. Labels are 1-based
//! at the edges (generators, CSV files, reports) and travel between modules
//! only as one-hot class matrices.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A time-stamped batch of feature rows with optional one-hot labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataChunk {
    pub x: DMatrix<f64>,
    pub y: Option<DMatrix<f64>>,
    pub stamp: usize,
}

impl DataChunk {
    pub fn new(x: DMatrix<f64>, y: Option<DMatrix<f64>>, stamp: usize) -> Result<Self> {
        if x.nrows() == 0 {
            return Err(Error::InvalidChunk("chunk has no rows".into()));
        }
        if let Some((pos, _)) = x.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidChunk(format!(
                "non-finite feature at row {}, column {}",
                pos % x.nrows(),
                pos / x.nrows()
            )));
        }
        if let Some(y) = &y {
            if y.nrows() != x.nrows() {
                return Err(Error::DimensionMismatch {
                    expected: x.nrows(),
                    got: y.nrows(),
                    context: "label rows",
                });
            }
            for (r, row) in y.row_iter().enumerate() {
                let ones = row.iter().filter(|&&v| v == 1.0).count();
                let zeros = row.iter().filter(|&&v| v == 0.0).count();
                if ones != 1 || ones + zeros != row.len() {
                    return Err(Error::InvalidChunk(format!("label row {r} is not one-hot")));
                }
            }
        }
        Ok(Self { x, y, stamp })
    }

    pub fn len(&self) -> usize {
        self.x.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.x.nrows() == 0
    }

    pub fn n_features(&self) -> usize {
        self.x.ncols()
    }

    pub fn n_classes(&self) -> Option<usize> {
        self.y.as_ref().map(|y| y.ncols())
    }

    /// 0-based class index per row.
    pub fn labels(&self) -> Option<Vec<usize>> {
        self.y.as_ref().map(|y| {
            y.row_iter()
                .map(|row| row.iter().position(|&v| v == 1.0).unwrap_or(0))
                .collect()
        })
    }

    /// Rows `start..end` as a new chunk with the same stamp.
    pub fn rows(&self, start: usize, end: usize) -> Result<Self> {
        if start >= end || end > self.len() {
            return Err(Error::InvalidChunk(format!(
                "row range {start}..{end} is empty or exceeds {} rows",
                self.len()
            )));
        }
        let x = self.x.rows(start, end - start).into_owned();
        let y = self.y.as_ref().map(|y| y.rows(start, end - start).into_owned());
        Ok(Self {
            x,
            y,
            stamp: self.stamp,
        })
    }

    /// Stack chunks vertically. The result takes the stamp of the last chunk.
    pub fn concat(chunks: &[DataChunk]) -> Result<Self> {
        let first = chunks
            .first()
            .ok_or_else(|| Error::InvalidChunk("nothing to concatenate".into()))?;
        let n = first.n_features();
        let labeled = first.y.is_some();
        let m = first.n_classes();
        let total: usize = chunks.iter().map(DataChunk::len).sum();
        let mut x = DMatrix::zeros(total, n);
        let mut y = m.map(|m| DMatrix::zeros(total, m));
        let mut at = 0;
        for c in chunks {
            if c.n_features() != n || c.y.is_some() != labeled || c.n_classes() != m {
                return Err(Error::InvalidChunk("chunks disagree on feature or class layout".into()));
            }
            x.rows_mut(at, c.len()).copy_from(&c.x);
            if let (Some(dst), Some(src)) = (y.as_mut(), c.y.as_ref()) {
                dst.rows_mut(at, c.len()).copy_from(src);
            }
            at += c.len();
        }
        Ok(Self {
            x,
            y,
            stamp: chunks.last().map(|c| c.stamp).unwrap_or(0),
        })
    }
}

/// Encode 1-based labels into an `N x m` one-hot matrix.
pub fn one_hot_encode(labels: &[usize], m: usize) -> Result<DMatrix<f64>> {
    let mut y = DMatrix::zeros(labels.len(), m);
    for (index, &label) in labels.iter().enumerate() {
        if label == 0 || label > m {
            return Err(Error::LabelOutOfRange {
                index,
                label: label as i64,
                classes: m,
            });
        }
        y[(index, label - 1)] = 1.0;
    }
    Ok(y)
}

/// One generated observation. `label` is 1-based; `concept` identifies the
/// generating concept (the θ-schedule entry for SEA, 0/1 for hyperplane).
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub x: Vec<f64>,
    pub label: usize,
    pub concept: usize,
}

/// SEA concepts: three uniform features on `[0, 10]`, the third is noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeaParams {
    pub samples: usize,
    /// `(start_index, theta)` pairs with strictly increasing start indices.
    pub theta_schedule: Vec<(usize, f64)>,
    /// Target share of class 1, enforced by rejection sampling.
    pub minority_fraction: Option<f64>,
}

impl SeaParams {
    /// Thresholds cycling through `thetas`, switching every `drift_every` samples.
    pub fn alternating(samples: usize, drift_every: usize, thetas: &[f64]) -> Self {
        let every = drift_every.max(1);
        let theta_schedule = (0..samples.div_ceil(every).max(1))
            .map(|k| (k * every, thetas[k % thetas.len()]))
            .collect();
        Self {
            samples,
            theta_schedule,
            minority_fraction: None,
        }
    }

    /// 100k samples, θ = 4 → 7 → 4 → 7 with a switch every 25k samples.
    pub fn preset() -> Self {
        Self::alternating(100_000, 25_000, &[4.0, 7.0])
    }

    fn validate(&self) -> Result<()> {
        if self.theta_schedule.is_empty() {
            return Err(Error::InvalidParameter("SEA theta schedule is empty".into()));
        }
        if self.theta_schedule.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidParameter(
                "SEA theta schedule indices must be strictly increasing".into(),
            ));
        }
        if let Some(p) = self.minority_fraction {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "minority fraction {p} must lie in (0, 1)"
                )));
            }
        }
        Ok(())
    }
}

/// SEA decision rule: class 1 iff `f1 + f2 < theta`.
pub fn sea_label(f1: f64, f2: f64, theta: f64) -> usize {
    if f1 + f2 < theta {
        1
    } else {
        2
    }
}

/// P(f1 + f2 < θ) for independent uniforms on `[0, 10]`.
fn sea_class1_rate(theta: f64) -> f64 {
    let t = theta.clamp(0.0, 20.0);
    if t <= 10.0 {
        t * t / 200.0
    } else {
        1.0 - (20.0 - t) * (20.0 - t) / 200.0
    }
}

pub struct SeaGenerator {
    params: SeaParams,
    rng: ChaCha8Rng,
    emitted: usize,
}

impl SeaGenerator {
    pub fn new(params: SeaParams, seed: u64) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            params,
            rng: ChaCha8Rng::seed_from_u64(seed),
            emitted: 0,
        })
    }

    fn concept_at(&self, t: usize) -> usize {
        self.params
            .theta_schedule
            .iter()
            .rposition(|&(start, _)| start <= t)
            .unwrap_or(0)
    }
}

impl Iterator for SeaGenerator {
    type Item = LabeledSample;

    fn next(&mut self) -> Option<LabeledSample> {
        if self.emitted >= self.params.samples {
            return None;
        }
        let concept = self.concept_at(self.emitted);
        let theta = self.params.theta_schedule[concept].1;
        let (accept1, accept2) = match self.params.minority_fraction {
            None => (1.0, 1.0),
            Some(p) => {
                let q = sea_class1_rate(theta);
                if q <= 0.0 || q >= 1.0 {
                    (1.0, 1.0)
                } else if p < q {
                    (p * (1.0 - q) / (q * (1.0 - p)), 1.0)
                } else {
                    (1.0, q * (1.0 - p) / (p * (1.0 - q)))
                }
            }
        };
        loop {
            let f: [f64; 3] = [
                self.rng.random_range(0.0..10.0),
                self.rng.random_range(0.0..10.0),
                self.rng.random_range(0.0..10.0),
            ];
            let label = sea_label(f[0], f[1], theta);
            let accept = if label == 1 { accept1 } else { accept2 };
            if accept >= 1.0 || self.rng.random::<f64>() < accept {
                self.emitted += 1;
                return Some(LabeledSample {
                    x: f.to_vec(),
                    label,
                    concept,
                });
            }
        }
    }
}

/// Rotating-hyperplane stream with a linear mixing ramp between two concepts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperplaneParams {
    pub samples: usize,
    pub dim: usize,
    pub w: Vec<f64>,
    pub w0: f64,
    pub drift_start: usize,
    pub drift_span: usize,
    pub w_after: Vec<f64>,
}

impl HyperplaneParams {
    /// 120k samples in 4 dimensions; the second concept starts interfering
    /// after 48k samples and fully replaces the first 12k samples later.
    pub fn preset() -> Self {
        Self {
            samples: 120_000,
            dim: 4,
            w: vec![0.9, 0.6, 0.3, 0.2],
            w0: 1.0,
            drift_start: 48_000,
            drift_span: 12_000,
            w_after: vec![0.2, 0.3, 0.6, 0.9],
        }
    }

    fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidParameter("hyperplane dim must be >= 1".into()));
        }
        for (name, w) in [("w", &self.w), ("w_after", &self.w_after)] {
            if w.len() != self.dim {
                return Err(Error::InvalidParameter(format!(
                    "hyperplane {name} has {} weights for dim {}",
                    w.len(),
                    self.dim
                )));
            }
        }
        if self.drift_start > self.samples {
            return Err(Error::InvalidParameter(format!(
                "drift start {} exceeds sample count {}",
                self.drift_start, self.samples
            )));
        }
        Ok(())
    }

    /// Probability that sample `t` is drawn from the second concept.
    pub fn mixing_probability(&self, t: usize) -> f64 {
        if t < self.drift_start {
            0.0
        } else if self.drift_span == 0 {
            1.0
        } else {
            ((t - self.drift_start) as f64 / self.drift_span as f64).min(1.0)
        }
    }
}

/// Class 1 iff `x · w > w0`.
pub fn hyperplane_label(x: &[f64], w: &[f64], w0: f64) -> usize {
    let s: f64 = x.iter().zip(w).map(|(a, b)| a * b).sum();
    if s > w0 {
        1
    } else {
        2
    }
}

pub struct HyperplaneGenerator {
    params: HyperplaneParams,
    rng: ChaCha8Rng,
    emitted: usize,
}

impl HyperplaneGenerator {
    pub fn new(params: HyperplaneParams, seed: u64) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            params,
            rng: ChaCha8Rng::seed_from_u64(seed),
            emitted: 0,
        })
    }
}

impl Iterator for HyperplaneGenerator {
    type Item = LabeledSample;

    fn next(&mut self) -> Option<LabeledSample> {
        if self.emitted >= self.params.samples {
            return None;
        }
        let p = self.params.mixing_probability(self.emitted);
        let u: f64 = self.rng.random();
        let concept = usize::from(u < p);
        let x: Vec<f64> = (0..self.params.dim).map(|_| self.rng.random_range(0.0..1.0)).collect();
        let w = if concept == 0 {
            &self.params.w
        } else {
            &self.params.w_after
        };
        let label = hyperplane_label(&x, w, self.params.w0);
        self.emitted += 1;
        Some(LabeledSample { x, label, concept })
    }
}

/// Groups samples into labelled chunks of `chunk_size` rows; stamps start at 1.
pub struct Chunker<I> {
    samples: I,
    chunk_size: usize,
    classes: usize,
    stamp: usize,
}

impl<I: Iterator<Item = LabeledSample>> Chunker<I> {
    pub fn new(samples: I, chunk_size: usize, classes: usize) -> Self {
        Self {
            samples,
            chunk_size: chunk_size.max(1),
            classes,
            stamp: 0,
        }
    }
}

impl<I: Iterator<Item = LabeledSample>> Iterator for Chunker<I> {
    type Item = Result<DataChunk>;

    fn next(&mut self) -> Option<Result<DataChunk>> {
        let batch: Vec<LabeledSample> = self.samples.by_ref().take(self.chunk_size).collect();
        if batch.is_empty() {
            return None;
        }
        self.stamp += 1;
        let n = batch[0].x.len();
        let x = DMatrix::from_fn(batch.len(), n, |r, c| batch[r].x[c]);
        let labels: Vec<usize> = batch.iter().map(|s| s.label).collect();
        Some(one_hot_encode(&labels, self.classes).and_then(|y| DataChunk::new(x, Some(y), self.stamp)))
    }
}

/// Where a run draws its data from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum StreamSource {
    Sea(SeaParams),
    Hyperplane(HyperplaneParams),
    Csv {
        path: PathBuf,
        /// 0-based column index; `None` means the last column.
        label_column: Option<usize>,
    },
}

pub type ChunkStream = Box<dyn Iterator<Item = Result<DataChunk>> + Send>;

impl StreamSource {
    pub fn chunks(&self, chunk_size: usize, seed: u64) -> Result<ChunkStream> {
        Ok(match self {
            StreamSource::Sea(p) => Box::new(Chunker::new(SeaGenerator::new(p.clone(), seed)?, chunk_size, 2)),
            StreamSource::Hyperplane(p) => {
                Box::new(Chunker::new(HyperplaneGenerator::new(p.clone(), seed)?, chunk_size, 2))
            }
            StreamSource::Csv { path, label_column } => Box::new(load_csv_stream(path, chunk_size, *label_column)?),
        })
    }

    pub fn name(&self) -> String {
        match self {
            StreamSource::Sea(_) => "sea".into(),
            StreamSource::Hyperplane(_) => "hyperplane".into(),
            StreamSource::Csv { path, .. } => path.display().to_string(),
        }
    }
}

/// Write samples as CSV (`f1..fn,label`). Returns the number of rows written.
pub fn write_labeled_csv<W: Write>(out: W, samples: impl IntoIterator<Item = LabeledSample>) -> Result<usize> {
    let mut writer = csv::Writer::from_writer(out);
    let mut rows = 0;
    for s in samples {
        if rows == 0 {
            let mut header: Vec<String> = (1..=s.x.len()).map(|j| format!("f{j}")).collect();
            header.push("label".into());
            writer.write_record(&header)?;
        }
        let mut record: Vec<String> = s.x.iter().map(|v| v.to_string()).collect();
        record.push(s.label.to_string());
        writer.write_record(&record)?;
        rows += 1;
    }
    writer.flush()?;
    Ok(rows)
}

/// Chunked reader over a numeric CSV file.
pub struct CsvStream {
    path: PathBuf,
    records: csv::StringRecordsIntoIter<File>,
    skip_header: bool,
    chunk_size: usize,
    label_column: usize,
    classes: usize,
    label_offset: i64,
    row: usize,
    stamp: usize,
}

impl CsvStream {
    pub fn n_classes(&self) -> usize {
        self.classes
    }
}

fn open_reader(path: &Path) -> Result<csv::Reader<File>> {
    Ok(csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)?)
}

fn parse_cell(path: &Path, row: usize, column: usize, cell: &str) -> Result<f64> {
    cell.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::CsvCell {
            path: path.to_path_buf(),
            row,
            column,
            cell: cell.to_string(),
        })
}

fn parse_label(path: &Path, row: usize, column: usize, cell: &str) -> Result<i64> {
    let v = parse_cell(path, row, column, cell)?;
    if v.fract() != 0.0 {
        return Err(Error::CsvCell {
            path: path.to_path_buf(),
            row,
            column,
            cell: cell.to_string(),
        });
    }
    Ok(v as i64)
}

/// Open a CSV stream. The file is scanned once up front to validate every
/// cell and to find the class count (the largest label; files whose labels
/// start at 0 are shifted to 1-based). A first row with any non-numeric cell
/// is taken as a header and skipped.
pub fn load_csv_stream(path: impl AsRef<Path>, chunk_size: usize, label_column: Option<usize>) -> Result<CsvStream> {
    let path = path.as_ref().to_path_buf();
    if chunk_size == 0 {
        return Err(Error::InvalidParameter("chunk size must be >= 1".into()));
    }
    let mut reader = open_reader(&path)?;
    let mut skip_header = false;
    let mut width = None;
    let mut label_col = 0;
    let (mut min_label, mut max_label) = (i64::MAX, i64::MIN);
    let mut data_rows = 0usize;
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = i + 1;
        if i == 0 && record.iter().any(|c| c.parse::<f64>().is_err()) {
            skip_header = true;
            continue;
        }
        let w = *width.get_or_insert(record.len());
        if record.len() != w {
            return Err(Error::InvalidChunk(format!(
                "{}: row {row} has {} cells, expected {w}",
                path.display(),
                record.len()
            )));
        }
        if w < 2 {
            return Err(Error::InvalidChunk(format!(
                "{}: need at least one feature and a label column",
                path.display()
            )));
        }
        label_col = label_column.unwrap_or(w - 1);
        if label_col >= w {
            return Err(Error::InvalidParameter(format!(
                "label column {label_col} out of range for {w} columns"
            )));
        }
        for (column, cell) in record.iter().enumerate() {
            if column == label_col {
                let l = parse_label(&path, row, column, cell)?;
                min_label = min_label.min(l);
                max_label = max_label.max(l);
            } else {
                parse_cell(&path, row, column, cell)?;
            }
        }
        data_rows += 1;
    }
    if data_rows == 0 {
        return Err(Error::EmptyFile(path));
    }
    let label_offset = if min_label == 0 { 1 } else { 0 };
    if min_label + label_offset < 1 {
        return Err(Error::LabelOutOfRange {
            index: 0,
            label: min_label,
            classes: (max_label + label_offset).max(1) as usize,
        });
    }
    let classes = (max_label + label_offset) as usize;
    Ok(CsvStream {
        records: open_reader(&path)?.into_records(),
        path,
        skip_header,
        chunk_size,
        label_column: label_col,
        classes,
        label_offset,
        row: 0,
        stamp: 0,
    })
}

impl Iterator for CsvStream {
    type Item = Result<DataChunk>;

    fn next(&mut self) -> Option<Result<DataChunk>> {
        let mut features: Vec<Vec<f64>> = Vec::with_capacity(self.chunk_size);
        let mut labels = Vec::with_capacity(self.chunk_size);
        while features.len() < self.chunk_size {
            let record = match self.records.next() {
                None => break,
                Some(Err(e)) => return Some(Err(e.into())),
                Some(Ok(r)) => r,
            };
            self.row += 1;
            if self.row == 1 && self.skip_header {
                continue;
            }
            let mut x = Vec::with_capacity(record.len() - 1);
            for (column, cell) in record.iter().enumerate() {
                if column == self.label_column {
                    match parse_label(&self.path, self.row, column, cell) {
                        Ok(l) => labels.push((l + self.label_offset) as usize),
                        Err(e) => return Some(Err(e)),
                    }
                } else {
                    match parse_cell(&self.path, self.row, column, cell) {
                        Ok(v) => x.push(v),
                        Err(e) => return Some(Err(e)),
                    }
                }
            }
            features.push(x);
        }
        if features.is_empty() {
            return None;
        }
        self.stamp += 1;
        let n = features[0].len();
        let x = DMatrix::from_fn(features.len(), n, |r, c| features[r][c]);
        Some(one_hot_encode(&labels, self.classes).and_then(|y| DataChunk::new(x, Some(y), self.stamp)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_hot_places_single_one() {
        let y = one_hot_encode(&[2], 3).unwrap();
        assert_eq!(y.row(0).iter().copied().collect::<Vec<_>>(), vec![0.0, 1.0, 0.0]);
        let y = one_hot_encode(&[1], 1).unwrap();
        assert_eq!(y[(0, 0)], 1.0);
        let y = one_hot_encode(&[3, 1], 3).unwrap();
        assert_eq!(y, DMatrix::from_row_slice(2, 3, &[0., 0., 1., 1., 0., 0.]));
    }

    #[test]
    fn one_hot_rejects_out_of_range_with_index() {
        match one_hot_encode(&[1, 4, 2], 3) {
            Err(Error::LabelOutOfRange { index, label, .. }) => {
                assert_eq!((index, label), (1, 4));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(one_hot_encode(&[0], 2).is_err());
    }

    #[test]
    fn sea_threshold_rule() {
        assert_eq!(sea_label(3.0, 3.0, 7.0), 1);
        assert_eq!(sea_label(5.0, 4.0, 7.0), 2);
    }

    #[test]
    fn sea_rejects_non_increasing_schedule() {
        let p = SeaParams {
            samples: 10,
            theta_schedule: vec![(0, 4.0), (5, 7.0), (5, 4.0)],
            minority_fraction: None,
        };
        assert!(SeaGenerator::new(p, 1).is_err());
    }

    #[test]
    fn sea_is_deterministic_and_labels_follow_rule() {
        let p = SeaParams::alternating(2_000, 500, &[4.0, 7.0]);
        let a: Vec<_> = SeaGenerator::new(p.clone(), 9).unwrap().collect();
        let b: Vec<_> = SeaGenerator::new(p.clone(), 9).unwrap().collect();
        assert_eq!(a, b);
        for (t, s) in a.iter().enumerate() {
            let theta = if (t / 500) % 2 == 0 { 4.0 } else { 7.0 };
            assert_eq!(s.label, sea_label(s.x[0], s.x[1], theta));
            assert!(s.x.iter().all(|v| (0.0..10.0).contains(v)));
        }
    }

    #[test]
    fn sea_minority_fraction_is_enforced() {
        let mut p = SeaParams::alternating(40_000, 40_000, &[7.0]);
        p.minority_fraction = Some(0.1);
        let ones = SeaGenerator::new(p, 5).unwrap().filter(|s| s.label == 1).count();
        let share = ones as f64 / 40_000.0;
        // binomial sd at p=0.1, n=4e4 is 0.0015
        assert!((share - 0.1).abs() < 0.008, "share {share}");
    }

    #[test]
    fn hyperplane_rule_and_validation() {
        assert_eq!(hyperplane_label(&[0.7, 0.6], &[1.0, 1.0], 1.0), 1);
        assert_eq!(hyperplane_label(&[0.2, 0.6], &[1.0, 1.0], 1.0), 2);
        let mut p = HyperplaneParams::preset();
        p.w.pop();
        assert!(HyperplaneGenerator::new(p, 0).is_err());
    }

    #[test]
    fn hyperplane_zero_span_switches_abruptly() {
        let p = HyperplaneParams {
            samples: 400,
            drift_start: 200,
            drift_span: 0,
            ..HyperplaneParams::preset()
        };
        for (t, s) in HyperplaneGenerator::new(p, 3).unwrap().enumerate() {
            assert_eq!(s.concept, usize::from(t >= 200));
        }
    }

    #[test]
    fn hyperplane_ramp_midpoint_mixes_half() {
        // Linear ramp over 2e5 samples; the central 1e5 samples have mean
        // mixing probability exactly 0.5. Binomial sd = 158 draws.
        let p = HyperplaneParams {
            samples: 200_000,
            drift_start: 0,
            drift_span: 200_000,
            ..HyperplaneParams::preset()
        };
        assert!((p.mixing_probability(100_000) - 0.5).abs() < 1e-12);
        let second: usize = HyperplaneGenerator::new(p, 11)
            .unwrap()
            .skip(50_000)
            .take(100_000)
            .map(|s| s.concept)
            .sum();
        assert!((second as f64 - 50_000.0).abs() < 4.0 * 158.2, "{second}");
    }

    #[test]
    fn chunker_preserves_order() {
        let samples: Vec<_> = SeaGenerator::new(SeaParams::alternating(1_200, 600, &[4.0, 7.0]), 2)
            .unwrap()
            .collect();
        let chunks: Vec<_> = Chunker::new(samples.clone().into_iter(), 500, 2)
            .collect::<Result<_>>()
            .unwrap();
        assert_eq!(
            chunks.iter().map(DataChunk::len).collect::<Vec<_>>(),
            vec![500, 500, 200]
        );
        assert_eq!(chunks.iter().map(|c| c.stamp).collect::<Vec<_>>(), vec![1, 2, 3]);
        let all = DataChunk::concat(&chunks).unwrap();
        for (r, s) in samples.iter().enumerate() {
            assert_eq!(all.x.row(r).iter().copied().collect::<Vec<_>>(), s.x);
            assert_eq!(all.labels().unwrap()[r] + 1, s.label);
        }
    }

    #[test]
    fn chunk_rejects_bad_labels() {
        let x = DMatrix::from_element(2, 1, 0.5);
        let y = DMatrix::from_row_slice(2, 2, &[1., 1., 0., 1.]);
        assert!(DataChunk::new(x, Some(y), 1).is_err());
    }
}
