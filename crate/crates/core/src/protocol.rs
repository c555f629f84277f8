//! Paired evaluation protocol: slicing, repeated splits, fitting both
//! interpolants on identical geometry and recording per-run outcomes.

use std::fmt;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::ExperimentConfig;
use crate::geometry::{GeometryError, Point2, PointSet2};
use crate::interp_cubic::{fit_cubic, CubicError};
use crate::interp_rbf::{fit_rbf, RbfConfig, RbfError};
use crate::metrics::{compute_metrics, MetricSet, MetricsError};
use crate::seed;
use crate::synthdata::{FactorialDataset, N_OUTPUTS};

/// Smallest slice that can be split.
pub const MIN_SLICE_POINTS: usize = 5;
/// Smallest training set.
pub const MIN_TRAIN: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Regime {
    #[serde(rename = "noise-free")]
    NoiseFree,
    #[serde(rename = "noisy")]
    Noisy,
}

impl Regime {
    pub const ALL: [Regime; 2] = [Regime::NoiseFree, Regime::Noisy];

    pub fn label(self) -> &'static str {
        match self {
            Regime::NoiseFree => "noise-free",
            Regime::Noisy => "noisy",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|r| r.label() == s)
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axis {
    X1,
    X2,
    X3,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X1, Axis::X2, Axis::X3];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        ["X1", "X2", "X3"][self.index()]
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.label().eq_ignore_ascii_case(s))
    }

    /// The two remaining axes, in ascending order.
    pub fn free_axes(self) -> [Axis; 2] {
        match self {
            Axis::X1 => [Axis::X2, Axis::X3],
            Axis::X2 => [Axis::X1, Axis::X3],
            Axis::X3 => [Axis::X1, Axis::X2],
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Cubic,
    Rbf,
}

impl Method {
    pub const ALL: [Method; 2] = [Method::Cubic, Method::Rbf];

    pub fn label(self) -> &'static str {
        match self {
            Method::Cubic => "cubic",
            Method::Rbf => "rbf",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.label().eq_ignore_ascii_case(s))
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// One input held at one of its design levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SliceId {
    pub axis: Axis,
    pub level_index: usize,
    pub level: f64,
}

impl fmt::Display for SliceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}", self.axis, self.level)
    }
}

/// A 2-D interpolation problem on one slice for one output and regime.
#[derive(Debug, Clone)]
pub struct SliceTask {
    pub slice: SliceId,
    pub free_axes: [Axis; 2],
    /// 1-based output channel.
    pub output: usize,
    pub regime: Regime,
    pub points: PointSet2,
    pub targets: Vec<f64>,
}

impl SliceTask {
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    fn key(&self) -> [u64; 4] {
        [self.regime as u64, self.output as u64, self.slice.axis as u64, self.slice.level_index as u64]
    }
}

/// Slices of `dataset` at every design level of every axis, for every output.
///
/// Order: output, then fixed axis, then level.
pub fn enumerate_slices(dataset: &FactorialDataset, regime: Regime) -> Vec<SliceTask> {
    let mut tasks = Vec::new();
    for output in 1..=N_OUTPUTS {
        for axis in Axis::ALL {
            let [a, b] = axis.free_axes();
            for (level_index, level) in dataset.spec.axis_levels(axis.index()).into_iter().enumerate() {
                let rows: Vec<_> = dataset.rows.iter().filter(|r| r.x[axis.index()] == level).collect();
                let points = rows.iter().map(|r| Point2::new(r.x[a.index()], r.x[b.index()])).collect();
                let targets = rows
                    .iter()
                    .map(|r| match regime {
                        Regime::NoiseFree => r.y_clean[output - 1],
                        Regime::Noisy => r.y_noisy[output - 1],
                    })
                    .collect();
                tasks.push(SliceTask {
                    slice: SliceId { axis, level_index, level },
                    free_axes: [a, b],
                    output,
                    regime,
                    points: PointSet2::new(points).expect("design points on a slice are distinct"),
                    targets,
                });
            }
        }
    }
    tasks
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub repeat: usize,
    /// Seed the permutation was drawn from.
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProtocolError {
    #[error("slice {slice} has {found} points; at least {required} are needed to split")]
    SliceTooSmall { slice: String, found: usize, required: usize },
    #[error("train fraction must lie in (0, 1), got {0}")]
    BadFraction(f64),
}

/// Training-set size for `n` points: `round(alpha · n)`, at least 3, leaving
/// at least one test point.
pub fn train_size(n: usize, alpha: f64) -> usize {
    ((alpha * n as f64).round() as usize).max(MIN_TRAIN).min(n - 1)
}

/// `repeats` random train/test partitions of `task`, each seeded by the
/// identity `(master_seed, regime, output, slice, repeat)`.
pub fn make_splits(
    task: &SliceTask,
    repeats: usize,
    alpha: f64,
    master_seed: u64,
) -> Result<Vec<SplitPlan>, ProtocolError> {
    let n = task.len();
    if n < MIN_SLICE_POINTS {
        return Err(ProtocolError::SliceTooSmall {
            slice: task.slice.to_string(),
            found: n,
            required: MIN_SLICE_POINTS,
        });
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(ProtocolError::BadFraction(alpha));
    }
    let n_train = train_size(n, alpha);
    let [r, o, ax, lv] = task.key();
    Ok((0..repeats)
        .map(|repeat| {
            let split_seed = seed::derive_seed(master_seed, &[seed::label_key("split"), r, o, ax, lv, repeat as u64]);
            let mut rng = seed::stream(split_seed, &[]);
            let mut idx: Vec<usize> = (0..n).collect();
            idx.shuffle(&mut rng);
            let mut train = idx[..n_train].to_vec();
            let mut test = idx[n_train..].to_vec();
            train.sort_unstable();
            test.sort_unstable();
            SplitPlan { train, test, repeat, seed: split_seed }
        })
        .collect())
}

/// Why a run is (in)valid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunReason {
    Ok,
    /// Valid, but the RBF system exceeded the condition threshold.
    IllConditioned,
    InsufficientNodes,
    DegenerateGeometry,
    SingularSystem,
    FitFailed,
    TooFewFinite,
    ZeroVariance,
}

impl RunReason {
    pub const ALL: [RunReason; 8] = [
        RunReason::Ok,
        RunReason::IllConditioned,
        RunReason::InsufficientNodes,
        RunReason::DegenerateGeometry,
        RunReason::SingularSystem,
        RunReason::FitFailed,
        RunReason::TooFewFinite,
        RunReason::ZeroVariance,
    ];

    pub fn code(self) -> &'static str {
        match self {
            RunReason::Ok => "ok",
            RunReason::IllConditioned => "ill_conditioned",
            RunReason::InsufficientNodes => "insufficient_nodes",
            RunReason::DegenerateGeometry => "degenerate_geometry",
            RunReason::SingularSystem => "singular_system",
            RunReason::FitFailed => "fit_failed",
            RunReason::TooFewFinite => "too_few_finite",
            RunReason::ZeroVariance => "zero_variance",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|r| r.code() == s)
    }

    pub(crate) fn from_cubic(e: &CubicError) -> Self {
        match e {
            CubicError::Geometry(GeometryError::InsufficientNodes { .. }) => RunReason::InsufficientNodes,
            CubicError::Geometry(GeometryError::DegenerateGeometry) => RunReason::DegenerateGeometry,
            _ => RunReason::FitFailed,
        }
    }

    pub(crate) fn from_rbf(e: &RbfError) -> Self {
        match e {
            RbfError::SingularSystem(_) => RunReason::SingularSystem,
            RbfError::InsufficientNodes { .. } => RunReason::InsufficientNodes,
            _ => RunReason::FitFailed,
        }
    }

    fn from_metrics(e: &MetricsError) -> Self {
        match e {
            MetricsError::ZeroVariance => RunReason::ZeroVariance,
            _ => RunReason::TooFewFinite,
        }
    }
}

impl fmt::Display for RunReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// Outcome of one (regime, output, slice, repeat, method) evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub regime: Regime,
    pub output: usize,
    pub slice: SliceId,
    pub repeat: usize,
    pub method: Method,
    pub valid: bool,
    pub reason: RunReason,
    pub metrics: Option<MetricSet>,
    pub n_test: usize,
    pub n_finite: usize,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    /// `(y_true, y_pred)` per test point; undefined predictions are NaN.
    pub predictions: Vec<(f64, f64)>,
}

fn subset(task: &SliceTask, idx: &[usize]) -> (PointSet2, Vec<f64>) {
    let pts = idx.iter().map(|&i| task.points.points()[i]).collect();
    let vals = idx.iter().map(|&i| task.targets[i]).collect();
    (PointSet2::new(pts).expect("subset of distinct points"), vals)
}

/// Fits both methods on `plan.train` and scores them on `plan.test`.
/// Fit failures become invalid records; nothing escapes.
pub fn run_pair(task: &SliceTask, plan: &SplitPlan, rbf_config: &RbfConfig) -> (RunRecord, RunRecord) {
    let (train_pts, train_vals) = subset(task, &plan.train);
    let test_pts: Vec<Point2> = plan.test.iter().map(|&i| task.points.points()[i]).collect();
    let test_vals: Vec<f64> = plan.test.iter().map(|&i| task.targets[i]).collect();

    let cubic = match fit_cubic(&train_pts, &train_vals) {
        Ok(s) => Ok((test_pts.iter().map(|&q| s.eval(q).unwrap_or(f64::NAN)).collect::<Vec<_>>(), RunReason::Ok)),
        Err(e) => Err(RunReason::from_cubic(&e)),
    };
    let rbf = match fit_rbf(&train_pts, &train_vals, rbf_config) {
        Ok(s) => {
            let note = if s.is_ill_conditioned() { RunReason::IllConditioned } else { RunReason::Ok };
            Ok((test_pts.iter().map(|&q| s.eval(q)).collect::<Vec<_>>(), note))
        }
        Err(e) => Err(RunReason::from_rbf(&e)),
    };

    let record = |method: Method, outcome: Result<(Vec<f64>, RunReason), RunReason>| {
        let mut rec = RunRecord {
            regime: task.regime,
            output: task.output,
            slice: task.slice,
            repeat: plan.repeat,
            method,
            valid: false,
            reason: RunReason::FitFailed,
            metrics: None,
            n_test: plan.test.len(),
            n_finite: 0,
            train: plan.train.clone(),
            test: plan.test.clone(),
            predictions: Vec::new(),
        };
        match outcome {
            Err(reason) => rec.reason = reason,
            Ok((pred, note)) => {
                rec.n_finite = pred.iter().filter(|p| p.is_finite()).count();
                match compute_metrics(&test_vals, &pred) {
                    Ok(m) => {
                        rec.valid = true;
                        rec.reason = note;
                        rec.metrics = Some(m);
                    }
                    Err(e) => rec.reason = RunReason::from_metrics(&e),
                }
                rec.predictions = test_vals.iter().copied().zip(pred).collect();
            }
        }
        rec
    };
    (record(Method::Cubic, cubic), record(Method::Rbf, rbf))
}

/// Which metric a contrast compares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Rmse,
    Mae,
    R2,
}

impl MetricKind {
    pub fn select(self, m: &MetricSet) -> f64 {
        match self {
            MetricKind::Rmse => m.rmse,
            MetricKind::Mae => m.mae,
            MetricKind::R2 => m.r2,
        }
    }
}

/// `metric(rbf) − metric(cubic)` on a shared split; `None` unless both
/// records are valid and scored on the same test set.
pub fn method_contrast(cubic: &RunRecord, rbf: &RunRecord, metric: MetricKind) -> Option<f64> {
    if cubic.test != rbf.test || cubic.train != rbf.train {
        return None;
    }
    let (c, r) = (cubic.metrics.as_ref()?, rbf.metrics.as_ref()?);
    if !(cubic.valid && rbf.valid) {
        return None;
    }
    Some(metric.select(r) - metric.select(c))
}

/// Runs every regime, slice task and repeat with both methods.
///
/// Runs execute in parallel; the returned table is ordered by regime, output,
/// fixed axis, level, repeat and method regardless of scheduling.
pub fn execute_experiment(dataset: &FactorialDataset, config: &ExperimentConfig) -> Vec<RunRecord> {
    let rbf_config = config.rbf();
    let mut jobs: Vec<(SliceTask, SplitPlan)> = Vec::new();
    for regime in Regime::ALL {
        for task in enumerate_slices(dataset, regime) {
            match make_splits(&task, config.repeats_per_slice, config.train_fraction, config.random_seed) {
                Ok(plans) => jobs.extend(plans.into_iter().map(|p| (task.clone(), p))),
                Err(e) => log::warn!("skipping slice: {e}"),
            }
        }
    }
    let mut records: Vec<RunRecord> = jobs
        .par_iter()
        .flat_map_iter(|(task, plan)| {
            let (c, r) = run_pair(task, plan, &rbf_config);
            [c, r]
        })
        .collect();
    records.sort_by(|a, b| {
        (a.regime, a.output, a.slice.axis, a.slice.level_index, a.repeat, a.method).cmp(&(
            b.regime,
            b.output,
            b.slice.axis,
            b.slice.level_index,
            b.repeat,
            b.method,
        ))
    });
    records
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthdata::{generate, DesignSpec, NoiseSpec};

    fn dataset() -> FactorialDataset {
        generate(&DesignSpec::default(), &NoiseSpec::default()).unwrap()
    }

    #[test]
    fn slice_counts() {
        let tasks = enumerate_slices(&dataset(), Regime::Noisy);
        assert_eq!(tasks.len(), 33);
        assert_eq!(tasks.iter().filter(|t| t.output == 1).count(), 11);
        let x3_2 = tasks.iter().find(|t| t.slice.axis == Axis::X3 && t.slice.level == 2.0).unwrap();
        assert_eq!(x3_2.len(), 16);
        assert_eq!(x3_2.free_axes, [Axis::X1, Axis::X2]);
        let x1_1 = tasks.iter().find(|t| t.slice.axis == Axis::X1 && t.slice.level == 1.0).unwrap();
        assert_eq!(x1_1.len(), 12);
    }

    #[test]
    fn regimes_read_their_channel() {
        let ds = dataset();
        let clean = enumerate_slices(&ds, Regime::NoiseFree);
        let noisy = enumerate_slices(&ds, Regime::Noisy);
        let row = ds.rows.iter().find(|r| r.x[0] == 1.0 && r.x[1] == 0.5 && r.x[2] == 2.0).unwrap();
        // slice X1=1, output 2: first point is (x2, x3) = (0.5, 2)
        let t =
            clean.iter().position(|t| t.output == 2 && t.slice.axis == Axis::X1 && t.slice.level_index == 0).unwrap();
        assert_eq!(clean[t].points.points()[0], Point2::new(0.5, 2.0));
        assert_eq!(clean[t].targets[0], row.y_clean[1]);
        assert_eq!(noisy[t].targets[0], row.y_noisy[1]);
    }

    #[test]
    fn split_sizes_and_determinism() {
        assert_eq!(train_size(12, 0.7), 8);
        assert_eq!(train_size(16, 0.7), 11);
        assert_eq!(train_size(5, 0.1), 3);
        let tasks = enumerate_slices(&dataset(), Regime::NoiseFree);
        for task in &tasks[..4] {
            let a = make_splits(task, 40, 0.7, 42).unwrap();
            let b = make_splits(task, 40, 0.7, 42).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.len(), 40);
            for plan in &a {
                let mut all: Vec<usize> = plan.train.iter().chain(&plan.test).copied().collect();
                all.sort_unstable();
                assert_eq!(all, (0..task.len()).collect::<Vec<_>>());
                assert_eq!(plan.train.len(), train_size(task.len(), 0.7));
            }
            assert!(a.windows(2).any(|w| w[0].train != w[1].train));
        }
    }

    #[test]
    fn tiny_slices_are_rejected() {
        let mut task = enumerate_slices(&dataset(), Regime::NoiseFree).remove(0);
        task.points = PointSet2::new(task.points.points()[..4].to_vec()).unwrap();
        task.targets.truncate(4);
        assert!(matches!(make_splits(&task, 3, 0.7, 1), Err(ProtocolError::SliceTooSmall { found: 4, .. })));
    }

    fn custom_task(points: Vec<(f64, f64)>, targets: Vec<f64>) -> SliceTask {
        SliceTask {
            slice: SliceId { axis: Axis::X3, level_index: 0, level: 2.0 },
            free_axes: [Axis::X1, Axis::X2],
            output: 1,
            regime: Regime::NoiseFree,
            points: PointSet2::new(points.into_iter().map(Point2::from).collect()).unwrap(),
            targets,
        }
    }

    #[test]
    fn outside_hull_invalidates_cubic_only() {
        let pts = vec![(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0), (3.0, 3.0), (4.0, 2.0)];
        let vals: Vec<f64> = pts.iter().map(|(u, v)| u * u + v).collect();
        let task = custom_task(pts, vals);
        let plan = SplitPlan { train: vec![0, 1, 2, 3], test: vec![4, 5], repeat: 0, seed: 0 };
        let (c, r) = run_pair(&task, &plan, &RbfConfig::default());
        assert!(!c.valid);
        assert_eq!(c.reason, RunReason::TooFewFinite);
        assert_eq!(c.n_finite, 0);
        assert!(r.valid);
        assert_eq!(r.n_finite, 2);
        assert_eq!(method_contrast(&c, &r, MetricKind::Rmse), None);
    }

    #[test]
    fn collinear_training_set_invalidates_both() {
        let pts = vec![(0.0, 0.0), (1.0, 1.0), (2.0, 2.0), (0.0, 1.0), (1.0, 0.0)];
        let task = custom_task(pts, vec![0.0, 1.0, 2.0, 3.0, 4.0]);
        let plan = SplitPlan { train: vec![0, 1, 2], test: vec![3, 4], repeat: 0, seed: 0 };
        let (c, r) = run_pair(&task, &plan, &RbfConfig::default());
        assert_eq!((c.valid, c.reason), (false, RunReason::DegenerateGeometry));
        assert_eq!((r.valid, r.reason), (false, RunReason::SingularSystem));
    }

    #[test]
    fn contrast_of_identical_predictions_is_zero() {
        let pts = vec![(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0), (0.5, 0.5), (0.25, 0.6)];
        let vals: Vec<f64> = pts.iter().map(|(u, v)| 2.0 - u + 3.0 * v).collect();
        let task = custom_task(pts, vals);
        let plan = SplitPlan { train: vec![0, 1, 2, 3], test: vec![4, 5], repeat: 0, seed: 0 };
        let (c, mut r) = run_pair(&task, &plan, &RbfConfig::default());
        assert!(c.valid && r.valid);
        r.metrics = c.metrics;
        assert_eq!(method_contrast(&c, &r, MetricKind::Rmse), Some(0.0));
        let mut rbf = r.clone();
        rbf.metrics.as_mut().unwrap().rmse = 0.194;
        let mut cubic = c.clone();
        cubic.metrics.as_mut().unwrap().rmse = 0.097;
        assert!((method_contrast(&cubic, &rbf, MetricKind::Rmse).unwrap() - 0.097).abs() < 1e-15);
    }
}
