//! Factorial input design, ground-truth responses and seeded measurement noise.

use std::io::Write;

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::seed;

/// Number of response channels.
pub const N_OUTPUTS: usize = 3;

#[derive(Debug, Error, PartialEq)]
pub enum DesignError {
    #[error("axis {axis}: at least 2 levels required, got {levels}")]
    TooFewLevels { axis: usize, levels: usize },
    #[error("axis {axis}: empty range [{lo}, {hi}]")]
    EmptyRange { axis: usize, lo: f64, hi: f64 },
    #[error("output {output}: noise standard deviation must be finite and non-negative, got {sigma}")]
    InvalidSigma { output: usize, sigma: f64 },
}

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    /// `levels` evenly spaced values with both endpoints included.
    pub fn levels(&self, levels: usize) -> Vec<f64> {
        let step = (self.hi - self.lo) / (levels - 1) as f64;
        (0..levels).map(|i| if i + 1 == levels { self.hi } else { self.lo + step * i as f64 }).collect()
    }
}

/// Ranges and level counts of the three input axes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignSpec {
    pub ranges: [Interval; 3],
    pub levels: [usize; 3],
}

impl Default for DesignSpec {
    fn default() -> Self {
        Self { ranges: [Interval::new(1.0, 2.0), Interval::new(0.5, 1.5), Interval::new(2.0, 4.0)], levels: [4, 4, 3] }
    }
}

impl DesignSpec {
    pub fn validate(&self) -> Result<(), DesignError> {
        for axis in 0..3 {
            let levels = self.levels[axis];
            if levels < 2 {
                return Err(DesignError::TooFewLevels { axis: axis + 1, levels });
            }
            let Interval { lo, hi } = self.ranges[axis];
            if !lo.is_finite() || !hi.is_finite() || lo >= hi {
                return Err(DesignError::EmptyRange { axis: axis + 1, lo, hi });
            }
        }
        Ok(())
    }

    pub fn size(&self) -> usize {
        self.levels.iter().product()
    }

    /// Level values of one axis (0-based).
    pub fn axis_levels(&self, axis: usize) -> Vec<f64> {
        self.ranges[axis].levels(self.levels[axis])
    }
}

/// Per-output noise standard deviations and the master seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub sigma: [f64; N_OUTPUTS],
    pub master_seed: u64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self { sigma: [0.1, 1.0, 2.0], master_seed: 42 }
    }
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<(), DesignError> {
        for (k, &sigma) in self.sigma.iter().enumerate() {
            if !sigma.is_finite() || sigma < 0.0 {
                return Err(DesignError::InvalidSigma { output: k + 1, sigma });
            }
        }
        Ok(())
    }
}

/// One design point with both response channels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignRow {
    pub x: [f64; 3],
    pub y_clean: [f64; N_OUTPUTS],
    pub y_noisy: [f64; N_OUTPUTS],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorialDataset {
    pub rows: Vec<DesignRow>,
    pub spec: DesignSpec,
    pub noise: NoiseSpec,
}

/// Full Cartesian product of the axis levels, x1 outermost and x3 innermost.
pub fn build_design(spec: &DesignSpec) -> Result<Vec<[f64; 3]>, DesignError> {
    spec.validate()?;
    let l1 = spec.axis_levels(0);
    let l2 = spec.axis_levels(1);
    let l3 = spec.axis_levels(2);
    let mut out = Vec::with_capacity(spec.size());
    for &a in &l1 {
        for &b in &l2 {
            for &c in &l3 {
                out.push([a, b, c]);
            }
        }
    }
    Ok(out)
}

/// Noise-free responses `(y1, y2, y3)`.
pub fn eval_truth(x1: f64, x2: f64, x3: f64) -> [f64; N_OUTPUTS] {
    [x1 * x1 + x2 + x3.sin(), x1 * x2 + x3 * x3, x1.cos() + x2 * x3]
}

/// Standard-normal draw for `(master_seed, row_index, output_index)`.
///
/// Each draw comes from its own ChaCha8 stream keyed by the triple and is
/// transformed with the ziggurat method of `rand_distr::StandardNormal`.
pub fn standard_normal_draw(master_seed: u64, row_index: u64, output_index: u64) -> f64 {
    let mut rng = seed::stream(master_seed, &[seed::label_key("noise"), row_index, output_index]);
    StandardNormal.sample(&mut rng)
}

pub fn add_noise(clean: &[f64; N_OUTPUTS], noise: &NoiseSpec, row_index: usize) -> [f64; N_OUTPUTS] {
    let mut noisy = *clean;
    for (k, y) in noisy.iter_mut().enumerate() {
        let sigma = noise.sigma[k];
        if sigma > 0.0 {
            *y += sigma * standard_normal_draw(noise.master_seed, row_index as u64, k as u64);
        }
    }
    noisy
}

pub fn generate(spec: &DesignSpec, noise: &NoiseSpec) -> Result<FactorialDataset, DesignError> {
    noise.validate()?;
    let rows = build_design(spec)?
        .into_iter()
        .enumerate()
        .map(|(i, x)| {
            let y_clean = eval_truth(x[0], x[1], x[2]);
            DesignRow { x, y_clean, y_noisy: add_noise(&y_clean, noise, i) }
        })
        .collect();
    Ok(FactorialDataset { rows, spec: spec.clone(), noise: noise.clone() })
}

pub const DATASET_CSV_HEADER: &str = "x1,x2,x3,y1_clean,y2_clean,y3_clean,y1_noisy,y2_noisy,y3_noisy";

impl FactorialDataset {
    /// Writes the dataset as CSV with 17 significant digits per value.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{DATASET_CSV_HEADER}")?;
        for row in &self.rows {
            let fields: Vec<String> =
                row.x.iter().chain(&row.y_clean).chain(&row.y_noisy).map(|v| format!("{v:.16e}")).collect();
            writeln!(w, "{}", fields.join(","))?;
        }
        Ok(())
    }
}
