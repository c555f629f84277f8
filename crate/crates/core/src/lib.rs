//! Paired benchmark of scattered-data surface interpolants.
//!
//! A 4×4×3 factorial design over three inputs is evaluated on three smooth
//! response functions, with and without seeded Gaussian noise. Every 2-D
//! slice of the design (one input held at one level) is split repeatedly into
//! training and test nodes; a C¹ Clough–Tocher cubic and a multiquadric RBF
//! interpolant are fitted on the same training nodes and scored on the same
//! test nodes. Run-level RMSE, MAE and R² are aggregated with percentile
//! bootstrap intervals.
//!
//! Module map:
//! - [`synthdata`]: design, response functions, noise
//! - [`geometry`]: Delaunay triangulation, point location, fill/separation distance
//! - [`interp_cubic`], [`interp_rbf`]: the two interpolants
//! - [`metrics`]: RMSE/MAE/R², bootstrap intervals
//! - [`protocol`]: slicing, splits, paired runs
//! - [`report`]: summary tables and CSV/JSON artifacts
//! - [`cli`]: the `surfcmp` command line

pub mod cli;
pub mod config;
pub mod geometry;
pub mod interp_cubic;
pub mod interp_rbf;
pub mod linalg;
pub mod metrics;
pub mod protocol;
pub mod report;
pub mod seed;
pub mod synthdata;

pub use config::ExperimentConfig;
pub use geometry::{Point2, PointSet2, Triangulation};
pub use interp_cubic::{fit_cubic, CubicSurface};
pub use interp_rbf::{fit_rbf, RbfConfig, RbfSurface};
pub use metrics::{bootstrap_ci, compute_metrics, BootstrapCI, MetricSet};
pub use protocol::{execute_experiment, Method, Regime, RunRecord};
pub use synthdata::{generate, DesignSpec, FactorialDataset, NoiseSpec};
