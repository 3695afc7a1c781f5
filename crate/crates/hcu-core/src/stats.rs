//! Annotation analysis battery: outlier-worker filtering, per-stimulus
//! feature aggregation, split-half reliability, correlation matrices,
//! percentile splits, and a deterministic 2-D projection for plot exports.
//!
//! Everything here is pure over immutable inputs; the only randomness is the
//! worker shuffling inside [`split_half_reliability`], which is driven
//! entirely by the caller's seed.

use std::collections::BTreeMap;
use std::io::{self, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::corpus::{AnnotationRecord, Corpus};
use crate::embedding::Vector;
use crate::uncertainty::UncertaintyScores;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("input lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("need at least {need} values, got {got}")]
    TooShort { need: usize, got: usize },
    #[error("zero variance; correlation undefined")]
    ZeroVariance,
    #[error("need at least {need} workers, got {got}")]
    TooFewWorkers { need: usize, got: usize },
    #[error("split {split} covers only {covered} stimuli; need at least 3")]
    InsufficientCoverage { split: usize, covered: usize },
    #[error("metric column {metric:?} is absent or too sparse ({present} present, need {need})")]
    MetricTooSparse {
        metric: String,
        present: usize,
        need: usize,
    },
    #[error("vectors must share one dimension")]
    DimensionMismatch,
}

/// The four likert-annotated features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum LikertFeature {
    Familiarity,
    Imageability,
    Arousal,
    Valence,
}

impl LikertFeature {
    pub const ALL: [LikertFeature; 4] = [
        LikertFeature::Familiarity,
        LikertFeature::Imageability,
        LikertFeature::Arousal,
        LikertFeature::Valence,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            LikertFeature::Familiarity => "familiarity",
            LikertFeature::Imageability => "imageability",
            LikertFeature::Arousal => "arousal",
            LikertFeature::Valence => "valence",
        }
    }

    pub fn value(&self, record: &AnnotationRecord) -> i32 {
        match self {
            LikertFeature::Familiarity => record.familiarity,
            LikertFeature::Imageability => record.imageability,
            LikertFeature::Arousal => record.arousal,
            LikertFeature::Valence => record.valence,
        }
    }
}

/// A worker removed by the outlier filter, with the feature and z-score that
/// triggered the removal.
#[derive(Debug, Clone, PartialEq)]
pub struct OutlierWorker {
    pub worker_id: String,
    pub feature: LikertFeature,
    pub z: f64,
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn population_std(values: &[f64], mean: f64) -> f64 {
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / values.len() as f64;
    var.sqrt()
}

/// Removes workers whose per-feature mean rating deviates from the
/// across-worker distribution of means by more than `z_threshold` standard
/// deviations on any feature. A degenerate distribution (zero spread) on a
/// feature removes nobody for that feature, and an infinite threshold
/// disables the filter.
pub fn filter_outlier_workers(corpus: &Corpus, z_threshold: f64) -> (Corpus, Vec<OutlierWorker>) {
    let workers = corpus.worker_ids();
    if workers.len() < 2 {
        return (corpus.clone(), Vec::new());
    }
    let mut worker_values: BTreeMap<&str, Vec<&AnnotationRecord>> = BTreeMap::new();
    for record in &corpus.annotations {
        worker_values
            .entry(record.worker_id.as_str())
            .or_default()
            .push(record);
    }

    let mut removed: Vec<OutlierWorker> = Vec::new();
    for feature in LikertFeature::ALL {
        let means: Vec<f64> = workers
            .iter()
            .map(|w| {
                let records = &worker_values[w];
                records.iter().map(|r| feature.value(r) as f64).sum::<f64>()
                    / records.len() as f64
            })
            .collect();
        let center = mean(&means);
        let spread = population_std(&means, center);
        if spread == 0.0 {
            continue;
        }
        for (worker, worker_mean) in workers.iter().zip(&means) {
            let z = (worker_mean - center) / spread;
            if z.abs() > z_threshold {
                removed.push(OutlierWorker {
                    worker_id: worker.to_string(),
                    feature,
                    z,
                });
            }
        }
    }
    removed.sort_by(|a, b| a.worker_id.cmp(&b.worker_id).then(a.feature.cmp(&b.feature)));

    let removed_ids: std::collections::BTreeSet<&str> =
        removed.iter().map(|o| o.worker_id.as_str()).collect();
    let filtered = Corpus {
        sounds: corpus.sounds.clone(),
        annotations: corpus
            .annotations
            .iter()
            .filter(|a| !removed_ids.contains(a.worker_id.as_str()))
            .cloned()
            .collect(),
        scale: corpus.scale,
    };
    (filtered, removed)
}

/// Column order of a [`FeatureMatrix`].
pub const FEATURE_COLUMNS: [&str; 15] = [
    "familiarity",
    "imageability",
    "arousal",
    "valence",
    "time_to_first_letter_ms",
    "response_time_ms",
    "num_plays",
    "num_words",
    "hcu_bits",
    "centroid_mean",
    "centroid_std",
    "knn_mean",
    "knn_std",
    "weighted_subgroup",
    "colocation_radius",
];

/// Per-stimulus mean annotated features, metadata aggregates, and
/// uncertainty metrics. Rows are sorted by sound id; cells are absent where
/// no value exists.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub sound_ids: Vec<String>,
    pub columns: Vec<String>,
    values: Vec<Option<f64>>,
}

impl FeatureMatrix {
    pub fn get(&self, row: usize, column: &str) -> Option<f64> {
        let c = self.columns.iter().position(|n| n == column)?;
        self.values[row * self.columns.len() + c]
    }

    /// One column as (sound_id index, value) pairs for present cells.
    pub fn column_present(&self, column: &str) -> Vec<(usize, f64)> {
        let Some(c) = self.columns.iter().position(|n| n == column) else {
            return Vec::new();
        };
        (0..self.sound_ids.len())
            .filter_map(|r| self.values[r * self.columns.len() + c].map(|v| (r, v)))
            .collect()
    }

    /// The matrix restricted to the given sound ids, in their given order.
    /// Unknown ids are skipped.
    pub fn restrict(&self, ids: &[String]) -> FeatureMatrix {
        let width = self.columns.len();
        let mut sound_ids = Vec::new();
        let mut values = Vec::new();
        for id in ids {
            if let Some(r) = self.sound_ids.iter().position(|s| s == id) {
                sound_ids.push(id.clone());
                values.extend_from_slice(&self.values[r * width..(r + 1) * width]);
            }
        }
        FeatureMatrix {
            sound_ids,
            columns: self.columns.clone(),
            values,
        }
    }

    /// CSV export with a `sound_id` key column; absent cells are empty.
    pub fn write_csv<W: Write>(&self, writer: &mut W) -> io::Result<()> {
        writeln!(writer, "sound_id,{}", self.columns.join(","))?;
        for (r, sound_id) in self.sound_ids.iter().enumerate() {
            let cells: Vec<String> = (0..self.columns.len())
                .map(|c| {
                    self.values[r * self.columns.len() + c]
                        .map(|v| v.to_string())
                        .unwrap_or_default()
                })
                .collect();
            writeln!(writer, "{sound_id},{}", cells.join(","))?;
        }
        Ok(())
    }
}

/// Builds the per-stimulus feature matrix from a (filtered) corpus and the
/// uncertainty scores keyed by sound id. Means are over present values only;
/// a column with no values for a stimulus stays absent.
pub fn mean_features(
    corpus: &Corpus,
    scores: &BTreeMap<String, UncertaintyScores>,
) -> FeatureMatrix {
    let sound_ids: Vec<String> = corpus.sound_ids().iter().map(|s| s.to_string()).collect();
    let mut grouped: BTreeMap<&str, Vec<&AnnotationRecord>> = BTreeMap::new();
    for record in &corpus.annotations {
        grouped
            .entry(record.sound_id.as_str())
            .or_default()
            .push(record);
    }

    let mut values = Vec::with_capacity(sound_ids.len() * FEATURE_COLUMNS.len());
    for sound_id in &sound_ids {
        let records = grouped.get(sound_id.as_str()).cloned().unwrap_or_default();
        let mean_of = |xs: Vec<f64>| -> Option<f64> {
            if xs.is_empty() {
                None
            } else {
                Some(mean(&xs))
            }
        };
        for feature in LikertFeature::ALL {
            values.push(mean_of(
                records.iter().map(|r| feature.value(r) as f64).collect(),
            ));
        }
        values.push(mean_of(
            records
                .iter()
                .filter_map(|r| r.time_to_first_letter_ms.map(|v| v as f64))
                .collect(),
        ));
        values.push(mean_of(
            records
                .iter()
                .filter_map(|r| r.response_time_ms.map(|v| v as f64))
                .collect(),
        ));
        values.push(mean_of(
            records
                .iter()
                .filter_map(|r| r.num_plays.map(|v| v as f64))
                .collect(),
        ));
        values.push(mean_of(
            records.iter().map(|r| r.num_words as f64).collect(),
        ));
        let s = scores.get(sound_id);
        values.push(s.map(|s| s.hcu_bits));
        values.push(s.and_then(|s| s.centroid_mean));
        values.push(s.and_then(|s| s.centroid_std));
        values.push(s.and_then(|s| s.knn_mean));
        values.push(s.and_then(|s| s.knn_std));
        values.push(s.and_then(|s| s.weighted_subgroup));
        values.push(s.and_then(|s| s.colocation_radius));
    }
    FeatureMatrix {
        sound_ids,
        columns: FEATURE_COLUMNS.iter().map(|c| c.to_string()).collect(),
        values,
    }
}

/// Average ranks (1-based); ties share the mean of the ranks they span.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|a, b| values[*a].partial_cmp(&values[*b]).expect("finite values"));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let shared = (i + j + 2) as f64 / 2.0; // mean of ranks i+1..=j+1
        for k in i..=j {
            ranks[order[k]] = shared;
        }
        i = j + 1;
    }
    ranks
}

/// Pearson product-moment correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(StatsError::TooShort {
            need: 2,
            got: x.len(),
        });
    }
    let mx = mean(x);
    let my = mean(y);
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (a, b) in x.iter().zip(y) {
        cov += (a - mx) * (b - my);
        vx += (a - mx) * (a - mx);
        vy += (b - my) * (b - my);
    }
    if vx == 0.0 || vy == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    Ok(cov / (vx.sqrt() * vy.sqrt()))
}

/// Spearman rank correlation: Pearson over average ranks. Identical rank
/// vectors short-circuit to exactly 1.0.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 3 {
        return Err(StatsError::TooShort {
            need: 3,
            got: x.len(),
        });
    }
    let rx = average_ranks(x);
    let ry = average_ranks(y);
    if rx == ry {
        return Ok(1.0);
    }
    pearson(&rx, &ry)
}

/// Symmetric matrix of |Pearson r| with unit diagonal. Cells without at
/// least three pairwise-complete rows are absent.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    pub names: Vec<String>,
    values: Vec<Option<f64>>,
}

impl CorrelationMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.names.iter().position(|n| n == a)?;
        let j = self.names.iter().position(|n| n == b)?;
        self.values[i * self.names.len() + j]
    }

    /// CSV export with feature names as both header row and key column.
    pub fn write_csv<W: Write>(&self, writer: &mut W) -> io::Result<()> {
        writeln!(writer, ",{}", self.names.join(","))?;
        for (i, name) in self.names.iter().enumerate() {
            let cells: Vec<String> = (0..self.names.len())
                .map(|j| {
                    self.values[i * self.names.len() + j]
                        .map(|v| v.to_string())
                        .unwrap_or_default()
                })
                .collect();
            writeln!(writer, "{name},{}", cells.join(","))?;
        }
        Ok(())
    }
}

/// |Pearson r| between every pair of feature-matrix columns over rows where
/// both are present.
pub fn pearson_matrix(matrix: &FeatureMatrix) -> CorrelationMatrix {
    let n = matrix.columns.len();
    let mut values = vec![None; n * n];
    let columns: Vec<Vec<Option<f64>>> = (0..n)
        .map(|c| {
            (0..matrix.sound_ids.len())
                .map(|r| matrix.values[r * n + c])
                .collect()
        })
        .collect();
    for i in 0..n {
        values[i * n + i] = Some(1.0);
        for j in (i + 1)..n {
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            for (a, b) in columns[i].iter().zip(&columns[j]) {
                if let (Some(a), Some(b)) = (a, b) {
                    xs.push(*a);
                    ys.push(*b);
                }
            }
            let cell = if xs.len() >= 3 {
                pearson(&xs, &ys).ok().map(f64::abs)
            } else {
                None
            };
            values[i * n + j] = cell;
            values[j * n + i] = cell;
        }
    }
    CorrelationMatrix {
        names: matrix.columns.clone(),
        values,
    }
}

/// Split-half reliability of one likert feature.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitReliability {
    pub feature: LikertFeature,
    /// Spearman coefficient per split.
    pub coefficients: Vec<f64>,
    pub mean: f64,
    pub n_splits: usize,
    pub seed: u64,
    /// Stimuli excluded per split for lacking raters in both halves.
    pub excluded_per_split: Vec<usize>,
}

/// Randomly halves the worker pool `n_splits` times, computes per-stimulus
/// mean ratings within each half, and reports the Spearman correlation of
/// the two mean vectors per split. Stimuli not rated by both halves of a
/// split are excluded from that split and tallied.
pub fn split_half_reliability(
    corpus: &Corpus,
    feature: LikertFeature,
    n_splits: usize,
    seed: u64,
) -> Result<SplitReliability, StatsError> {
    let workers: Vec<&str> = corpus.worker_ids();
    if workers.len() < 4 {
        return Err(StatsError::TooFewWorkers {
            need: 4,
            got: workers.len(),
        });
    }
    // (sound, worker) → ratings
    let mut ratings: BTreeMap<&str, BTreeMap<&str, Vec<f64>>> = BTreeMap::new();
    for record in &corpus.annotations {
        ratings
            .entry(record.sound_id.as_str())
            .or_default()
            .entry(record.worker_id.as_str())
            .or_default()
            .push(feature.value(record) as f64);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coefficients = Vec::with_capacity(n_splits);
    let mut excluded_per_split = Vec::with_capacity(n_splits);
    for split in 0..n_splits {
        let mut shuffled = workers.clone();
        shuffled.shuffle(&mut rng);
        let (first, second) = shuffled.split_at(shuffled.len() / 2);
        let first: std::collections::BTreeSet<&str> = first.iter().copied().collect();
        let second: std::collections::BTreeSet<&str> = second.iter().copied().collect();

        let mut left = Vec::new();
        let mut right = Vec::new();
        let mut excluded = 0usize;
        for per_worker in ratings.values() {
            let half_mean = |half: &std::collections::BTreeSet<&str>| -> Option<f64> {
                let values: Vec<f64> = per_worker
                    .iter()
                    .filter(|(w, _)| half.contains(*w))
                    .flat_map(|(_, vs)| vs.iter().copied())
                    .collect();
                if values.is_empty() {
                    None
                } else {
                    Some(mean(&values))
                }
            };
            match (half_mean(&first), half_mean(&second)) {
                (Some(a), Some(b)) => {
                    left.push(a);
                    right.push(b);
                }
                _ => excluded += 1,
            }
        }
        if left.len() < 3 {
            return Err(StatsError::InsufficientCoverage {
                split,
                covered: left.len(),
            });
        }
        coefficients.push(spearman(&left, &right)?);
        excluded_per_split.push(excluded);
    }
    let mean = mean(&coefficients);
    Ok(SplitReliability {
        feature,
        coefficients,
        mean,
        n_splits,
        seed,
        excluded_per_split,
    })
}

/// Linear-interpolation percentile over sorted values; `p` in [0, 100].
pub fn percentile(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "percentile of empty slice");
    let h = (sorted.len() - 1) as f64 * p / 100.0;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
    }
}

/// Distribution summary of one feature within one percentile group.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupSummary {
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

fn summarize(values: &[f64]) -> GroupSummary {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let m = mean(&sorted);
    GroupSummary {
        mean: m,
        std: population_std(&sorted, m),
        min: sorted[0],
        q1: percentile(&sorted, 25.0),
        median: percentile(&sorted, 50.0),
        q3: percentile(&sorted, 75.0),
        max: sorted[sorted.len() - 1],
    }
}

/// Stimuli split by the extremes of one metric column.
#[derive(Debug, Clone, PartialEq)]
pub struct PercentileSplit {
    pub metric: String,
    pub low_percentile: f64,
    pub high_percentile: f64,
    pub low_threshold: f64,
    pub high_threshold: f64,
    /// Stimuli with metric ≤ the low threshold, sorted by sound id.
    pub low_ids: Vec<String>,
    /// Stimuli with metric ≥ the high threshold, sorted by sound id.
    pub high_ids: Vec<String>,
    pub low_summaries: BTreeMap<String, GroupSummary>,
    pub high_summaries: BTreeMap<String, GroupSummary>,
    /// True when the thresholds coincide (zero metric spread).
    pub degenerate: bool,
}

impl PercentileSplit {
    /// Summary CSV: one row per (group, feature).
    pub fn write_summary_csv<W: Write>(&self, writer: &mut W) -> io::Result<()> {
        writeln!(writer, "group,feature,mean,std,min,q1,median,q3,max")?;
        for (group, summaries) in [("low", &self.low_summaries), ("high", &self.high_summaries)] {
            for (feature, s) in summaries {
                writeln!(
                    writer,
                    "{group},{feature},{},{},{},{},{},{},{}",
                    s.mean, s.std, s.min, s.q1, s.median, s.q3, s.max
                )?;
            }
        }
        Ok(())
    }
}

/// Splits stimuli at the `low`/`high` percentiles of `metric` (linear
/// interpolation) and summarizes every feature column within each group.
pub fn percentile_split(
    matrix: &FeatureMatrix,
    metric: &str,
    low: f64,
    high: f64,
) -> Result<PercentileSplit, StatsError> {
    let present = matrix.column_present(metric);
    if present.len() < 10 {
        return Err(StatsError::MetricTooSparse {
            metric: metric.to_string(),
            present: present.len(),
            need: 10,
        });
    }
    let mut sorted: Vec<f64> = present.iter().map(|(_, v)| *v).collect();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let low_threshold = percentile(&sorted, low);
    let high_threshold = percentile(&sorted, high);

    let low_rows: Vec<usize> = present
        .iter()
        .filter(|(_, v)| *v <= low_threshold)
        .map(|(r, _)| *r)
        .collect();
    let high_rows: Vec<usize> = present
        .iter()
        .filter(|(_, v)| *v >= high_threshold)
        .map(|(r, _)| *r)
        .collect();

    let summaries = |rows: &[usize]| -> BTreeMap<String, GroupSummary> {
        let mut out = BTreeMap::new();
        for column in &matrix.columns {
            let values: Vec<f64> = rows
                .iter()
                .filter_map(|r| matrix.get(*r, column))
                .collect();
            if !values.is_empty() {
                out.insert(column.clone(), summarize(&values));
            }
        }
        out
    };

    Ok(PercentileSplit {
        metric: metric.to_string(),
        low_percentile: low,
        high_percentile: high,
        low_threshold,
        high_threshold,
        low_ids: low_rows
            .iter()
            .map(|r| matrix.sound_ids[*r].clone())
            .collect(),
        high_ids: high_rows
            .iter()
            .map(|r| matrix.sound_ids[*r].clone())
            .collect(),
        low_summaries: summaries(&low_rows),
        high_summaries: summaries(&high_rows),
        degenerate: low_threshold == high_threshold,
    })
}

/// 2-D principal-component projection.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection2D {
    pub points: Vec<(f64, f64)>,
    /// True when the centered data had (numerical) rank below 2; the second
    /// coordinate is zero-filled in that case.
    pub rank_deficient: bool,
}

const POWER_TOLERANCE: f64 = 1e-9;
const POWER_MAX_ITERATIONS: usize = 20_000;

fn matrix_vector(matrix: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    matrix
        .iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// Power iteration for the dominant eigenpair of a symmetric PSD matrix.
/// The start vector is drawn from a fixed-seed generator so the result is
/// deterministic across runs and input orderings.
fn dominant_eigenpair(matrix: &[Vec<f64>]) -> (f64, Vec<f64>) {
    let d = matrix.len();
    let mut rng = ChaCha8Rng::seed_from_u64(0x70636131);
    let mut v: Vec<f64> = (0..d)
        .map(|_| rand::Rng::gen_range(&mut rng, -1.0..1.0))
        .collect();
    let n = norm(&v);
    v.iter_mut().for_each(|c| *c /= n);
    let mut eigenvalue = 0.0;
    for _ in 0..POWER_MAX_ITERATIONS {
        let mut w = matrix_vector(matrix, &v);
        let len = norm(&w);
        if len == 0.0 {
            return (0.0, v);
        }
        w.iter_mut().for_each(|c| *c /= len);
        let delta = v
            .iter()
            .zip(&w)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        v = w;
        eigenvalue = len;
        if delta < POWER_TOLERANCE {
            break;
        }
    }
    (eigenvalue, v)
}

/// Flips a direction so its largest-magnitude loading is positive.
fn canonical_sign(v: &mut [f64]) {
    let mut max_idx = 0;
    for (i, c) in v.iter().enumerate() {
        if c.abs() > v[max_idx].abs() {
            max_idx = i;
        }
    }
    if v[max_idx] < 0.0 {
        v.iter_mut().for_each(|c| *c = -*c);
    }
}

/// Centers the vectors and projects them onto the top two principal
/// directions found by power iteration with deflation. Rank-deficient input
/// (all variance on one direction) zero-fills the second coordinate and sets
/// the flag.
pub fn project_2d(vectors: &[Vector]) -> Result<Projection2D, StatsError> {
    if vectors.len() < 3 {
        return Err(StatsError::TooShort {
            need: 3,
            got: vectors.len(),
        });
    }
    let d = vectors[0].dim();
    if vectors.iter().any(|v| v.dim() != d) {
        return Err(StatsError::DimensionMismatch);
    }
    let n = vectors.len();
    let mut center = vec![0.0; d];
    for v in vectors {
        for (c, x) in center.iter_mut().zip(v.components()) {
            *c += x;
        }
    }
    center.iter_mut().for_each(|c| *c /= n as f64);
    let centered: Vec<Vec<f64>> = vectors
        .iter()
        .map(|v| {
            v.components()
                .iter()
                .zip(&center)
                .map(|(x, c)| x - c)
                .collect()
        })
        .collect();

    let mut covariance = vec![vec![0.0; d]; d];
    #[allow(clippy::needless_range_loop)]
    for row in &centered {
        for i in 0..d {
            for j in i..d {
                covariance[i][j] += row[i] * row[j];
            }
        }
    }
    #[allow(clippy::needless_range_loop)]
    for i in 0..d {
        for j in i..d {
            covariance[i][j] /= n as f64;
            covariance[j][i] = covariance[i][j];
        }
    }

    let (lambda1, mut v1) = dominant_eigenpair(&covariance);
    if lambda1 <= 0.0 || !lambda1.is_finite() {
        // no variance at all: every point sits at the centroid
        return Ok(Projection2D {
            points: vec![(0.0, 0.0); n],
            rank_deficient: true,
        });
    }
    canonical_sign(&mut v1);

    let mut deflated = covariance.clone();
    for i in 0..d {
        for j in 0..d {
            deflated[i][j] -= lambda1 * v1[i] * v1[j];
        }
    }
    let (lambda2, mut v2) = dominant_eigenpair(&deflated);
    let rank_deficient = lambda2 <= lambda1 * 1e-12;
    canonical_sign(&mut v2);

    let points = centered
        .iter()
        .map(|row| {
            let x: f64 = row.iter().zip(&v1).map(|(a, b)| a * b).sum();
            let y: f64 = if rank_deficient {
                0.0
            } else {
                row.iter().zip(&v2).map(|(a, b)| a * b).sum()
            };
            (x, y)
        })
        .collect();
    Ok(Projection2D {
        points,
        rank_deficient,
    })
}

/// Reliability report CSV: one row per feature with its per-split
/// coefficients and their mean.
pub fn write_reliability_csv<W: Write>(
    writer: &mut W,
    reports: &[SplitReliability],
) -> io::Result<()> {
    let n = reports.first().map(|r| r.n_splits).unwrap_or(0);
    let split_headers: Vec<String> = (1..=n).map(|i| format!("split_{i}")).collect();
    writeln!(
        writer,
        "feature,seed,n_splits,mean,{}",
        split_headers.join(",")
    )?;
    for report in reports {
        let coeffs: Vec<String> = report.coefficients.iter().map(|c| c.to_string()).collect();
        writeln!(
            writer,
            "{},{},{},{},{}",
            report.feature.name(),
            report.seed,
            report.n_splits,
            report.mean,
            coeffs.join(",")
        )?;
    }
    Ok(())
}
