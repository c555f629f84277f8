//! Multiquadric radial basis function interpolation with a low-degree
//! polynomial tail and optional ridge smoothing.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{orient, Point2, PointSet2};
use crate::linalg::{dot2, LinalgError, Lu, Matrix};

/// Condition estimate above which a fit is flagged ill-conditioned.
pub const ILL_CONDITIONED: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RbfError {
    #[error("invalid RBF configuration: {0}")]
    InvalidConfig(String),
    #[error("expected {expected} node values, got {found}")]
    ValueCount { expected: usize, found: usize },
    #[error("insufficient nodes: polynomial tail needs at least {required}, got {found}")]
    InsufficientNodes { required: usize, found: usize },
    #[error("singular interpolation system: {0}")]
    SingularSystem(String),
}

impl From<LinalgError> for RbfError {
    fn from(e: LinalgError) -> Self {
        RbfError::SingularSystem(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kernel {
    /// `sqrt(1 + (εr)²)`
    #[default]
    Multiquadric,
    /// `-sqrt(1 + (εr)²)`, the sign convention some libraries use.
    NegatedMultiquadric,
}

impl Kernel {
    pub fn eval(self, r: f64, epsilon: f64) -> f64 {
        match self {
            Kernel::Multiquadric => kernel_mq(r, epsilon),
            Kernel::NegatedMultiquadric => -kernel_mq(r, epsilon),
        }
    }
}

pub fn kernel_mq(r: f64, epsilon: f64) -> f64 {
    (epsilon * r).hypot(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RbfConfig {
    pub kernel: Kernel,
    pub epsilon: f64,
    /// Ridge term λ added to the kernel diagonal.
    pub smoothing: f64,
    /// Polynomial tail degree: -1 (none), 0 or 1.
    pub tail_degree: i32,
}

impl Default for RbfConfig {
    fn default() -> Self {
        Self { kernel: Kernel::Multiquadric, epsilon: 1.0, smoothing: 0.0, tail_degree: 1 }
    }
}

impl RbfConfig {
    pub fn validate(&self) -> Result<(), RbfError> {
        if !self.epsilon.is_finite() || self.epsilon <= 0.0 {
            return Err(RbfError::InvalidConfig(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if !self.smoothing.is_finite() || self.smoothing < 0.0 {
            return Err(RbfError::InvalidConfig(format!("smoothing must be non-negative, got {}", self.smoothing)));
        }
        if !(-1..=1).contains(&self.tail_degree) {
            return Err(RbfError::InvalidConfig(format!("tail degree must be -1, 0 or 1, got {}", self.tail_degree)));
        }
        Ok(())
    }

    /// Number of tail monomials.
    pub fn tail_len(&self) -> usize {
        match self.tail_degree {
            1 => 3,
            0 => 1,
            _ => 0,
        }
    }
}

/// Tail monomials `1, u, v` truncated to `len`.
fn monomials(p: Point2, len: usize) -> [f64; 3] {
    let all = [1.0, p.u, p.v];
    let mut out = [0.0; 3];
    out[..len].copy_from_slice(&all[..len]);
    out
}

#[derive(Debug, Clone)]
pub struct RbfSurface {
    centers: PointSet2,
    weights: Vec<f64>,
    tail: Vec<f64>,
    config: RbfConfig,
    condition_estimate: f64,
}

/// Symmetric kernel block, one kernel evaluation per unordered pair.
pub fn kernel_matrix(points: &[Point2], config: &RbfConfig) -> Matrix {
    let n = points.len();
    let mut phi = Matrix::zeros(n);
    for i in 0..n {
        phi[(i, i)] = config.kernel.eval(0.0, config.epsilon);
        for j in 0..i {
            let k = config.kernel.eval(points[i].dist(points[j]), config.epsilon);
            phi[(i, j)] = k;
            phi[(j, i)] = k;
        }
    }
    phi
}

/// Solves `[Φ + λI, P; Pᵀ, 0] [w; c] = [y; 0]` by LU with partial pivoting
/// and two rounds of iterative refinement.
pub fn fit_rbf(points: &PointSet2, values: &[f64], config: &RbfConfig) -> Result<RbfSurface, RbfError> {
    config.validate()?;
    let pts = points.points();
    let n = pts.len();
    if values.len() != n {
        return Err(RbfError::ValueCount { expected: n, found: values.len() });
    }
    let m = config.tail_len();
    if n < m.max(1) {
        return Err(RbfError::InsufficientNodes { required: m.max(1), found: n });
    }
    if config.tail_degree == 1 && pts.iter().skip(2).all(|&p| orient(pts[0], pts[1], p) == 0.0) {
        return Err(RbfError::SingularSystem("collinear nodes with a linear tail".into()));
    }

    let phi = kernel_matrix(pts, config);
    let mut a = Matrix::zeros(n + m);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] = phi[(i, j)];
        }
        a[(i, i)] += config.smoothing;
        let q = monomials(pts[i], m);
        for k in 0..m {
            a[(i, n + k)] = q[k];
            a[(n + k, i)] = q[k];
        }
    }
    let mut rhs = values.to_vec();
    rhs.resize(n + m, 0.0);

    let lu = Lu::factor(&a)?;
    let sol = lu.solve_refined(&a, &rhs, 2)?;
    let condition_estimate = lu.condition_1norm();
    if !condition_estimate.is_finite() || sol.iter().any(|v| !v.is_finite()) {
        return Err(RbfError::SingularSystem("non-finite solution".into()));
    }
    if condition_estimate > ILL_CONDITIONED {
        log::warn!("RBF system ill-conditioned: condition estimate {condition_estimate:.3e}");
    }
    Ok(RbfSurface {
        centers: points.clone(),
        weights: sol[..n].to_vec(),
        tail: sol[n..].to_vec(),
        config: config.clone(),
        condition_estimate,
    })
}

/// Squared data misfit and kernel energy of a (possibly smoothed) fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothingResidual {
    /// `Σ (y_i − s(x_i))²`
    pub data_residual: f64,
    /// `wᵀ Φ w` over the kernel block without the ridge term.
    pub kernel_energy: f64,
}

impl RbfSurface {
    /// Weights are typically large and of mixed sign, so the expansion is
    /// summed in compensated arithmetic.
    pub fn eval(&self, q: Point2) -> f64 {
        let (kernel, eps) = (self.config.kernel, self.config.epsilon);
        let radial = self.centers.points().iter().zip(&self.weights).map(|(c, &w)| (w, kernel.eval(c.dist(q), eps)));
        let mono = monomials(q, self.tail.len());
        dot2(radial.chain(self.tail.iter().copied().zip(mono)))
    }

    pub fn centers(&self) -> &PointSet2 {
        &self.centers
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Tail coefficients in monomial order `1, u, v`.
    pub fn tail_coeffs(&self) -> &[f64] {
        &self.tail
    }

    pub fn config(&self) -> &RbfConfig {
        &self.config
    }

    pub fn condition_estimate(&self) -> f64 {
        self.condition_estimate
    }

    pub fn is_ill_conditioned(&self) -> bool {
        self.condition_estimate > ILL_CONDITIONED
    }

    pub fn smoothing_residual(&self, points: &[Point2], values: &[f64]) -> SmoothingResidual {
        let data_residual = points.iter().zip(values).map(|(&p, &y)| (y - self.eval(p)).powi(2)).sum();
        let phi = kernel_matrix(self.centers.points(), &self.config);
        let pw = phi.mul_vec(&self.weights);
        let kernel_energy = self.weights.iter().zip(pw).map(|(a, b)| a * b).sum();
        SmoothingResidual { data_residual, kernel_energy }
    }
}
