//! Regression error metrics and percentile bootstrap intervals.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::seed;

/// Reasons a metric set is undefined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricsError {
    #[error("prediction and target lengths differ ({targets} vs {predictions})")]
    LengthMismatch { targets: usize, predictions: usize },
    #[error("fewer than two finite prediction pairs ({found})")]
    TooFewFinite { found: usize },
    #[error("targets have zero variance")]
    ZeroVariance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSet {
    pub rmse: f64,
    pub mae: f64,
    pub r2: f64,
    /// Finite prediction pairs the metrics were computed over.
    pub n_points: usize,
}

/// RMSE, MAE and R² over the pairs whose target and prediction are both
/// finite. R² uses the mean of the retained targets.
pub fn compute_metrics(y_true: &[f64], y_pred: &[f64]) -> Result<MetricSet, MetricsError> {
    if y_true.len() != y_pred.len() {
        return Err(MetricsError::LengthMismatch { targets: y_true.len(), predictions: y_pred.len() });
    }
    let pairs: Vec<(f64, f64)> =
        y_true.iter().zip(y_pred).filter(|(t, p)| t.is_finite() && p.is_finite()).map(|(&t, &p)| (t, p)).collect();
    let n = pairs.len();
    if n < 2 {
        return Err(MetricsError::TooFewFinite { found: n });
    }
    let nf = n as f64;
    let mean = pairs.iter().map(|(t, _)| t).sum::<f64>() / nf;
    let ss_tot: f64 = pairs.iter().map(|(t, _)| (t - mean).powi(2)).sum();
    if ss_tot == 0.0 {
        return Err(MetricsError::ZeroVariance);
    }
    let ss_res: f64 = pairs.iter().map(|(t, p)| (t - p).powi(2)).sum();
    let abs: f64 = pairs.iter().map(|(t, p)| (t - p).abs()).sum();
    Ok(MetricSet { rmse: (ss_res / nf).sqrt(), mae: abs / nf, r2: 1.0 - ss_res / ss_tot, n_points: n })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapCI {
    /// Mean of the original samples.
    pub point_estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub resamples: usize,
    pub level: f64,
}

/// Empirical quantile with linear interpolation between order statistics
/// of an ascending slice.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let pos = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}

/// Resample means of `samples` (with replacement), in resample order.
pub fn bootstrap_means(samples: &[f64], resamples: usize, seed: u64) -> Vec<f64> {
    let mut rng = seed::stream(seed, &[seed::label_key("bootstrap")]);
    let n = samples.len();
    (0..resamples).map(|_| (0..n).map(|_| samples[rng.random_range(0..n)]).sum::<f64>() / n as f64).collect()
}

/// Percentile bootstrap interval for the mean of `samples`.
///
/// Returns `None` for an empty sample or zero resamples.
pub fn bootstrap_ci(samples: &[f64], resamples: usize, level: f64, seed: u64) -> Option<BootstrapCI> {
    if samples.is_empty() || resamples == 0 || !(0.0..=1.0).contains(&level) {
        return None;
    }
    let mut means = bootstrap_means(samples, resamples, seed);
    means.sort_by(f64::total_cmp);
    let alpha = (1.0 - level) / 2.0;
    Some(BootstrapCI {
        point_estimate: samples.iter().sum::<f64>() / samples.len() as f64,
        lower: quantile_sorted(&means, alpha),
        upper: quantile_sorted(&means, 1.0 - alpha),
        resamples,
        level,
    })
}
