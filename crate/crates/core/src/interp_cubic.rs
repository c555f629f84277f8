//! C¹ piecewise-cubic interpolation on a Delaunay triangulation
//! (Clough–Tocher split).
//!
//! Each triangle is split at its centroid into three sub-triangles carrying
//! cubic Bézier patches. Vertex control points come from node values and
//! estimated gradients; the remaining points are fixed by requiring C¹ across
//! the inner edges and a linear normal derivative along every outer edge,
//! which makes neighbouring macro-triangles join with C¹ continuity.

use thiserror::Error;

use crate::geometry::{GeometryError, Location, Point2, PointSet2, Triangulation};
use crate::linalg::{Lu, Matrix};

/// Condition number above which the local quadratic gradient fit is
/// abandoned for the affine fit.
const QUADRATIC_COND_LIMIT: f64 = 1e10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CubicError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("expected {expected} node values, got {found}")]
    ValueCount { expected: usize, found: usize },
    #[error("non-finite value at node {0}")]
    NonFiniteValue(usize),
}

/// Cubic Bézier ordinates of one sub-triangle `(A, B, C)` with `C` the split
/// point, in the order b300 b030 b003 b210 b120 b201 b102 b021 b012 b111.
type SubPatch = [f64; 10];

#[derive(Debug, Clone)]
pub struct CubicSurface {
    tri: Triangulation,
    values: Vec<f64>,
    gradients: Vec<[f64; 2]>,
    /// Three sub-patches per macro-triangle; sub-patch `i` lies opposite vertex `i`.
    patches: Vec<[SubPatch; 3]>,
}

/// Per-vertex gradients from a weighted least-squares fit over edge-connected
/// neighbours.
///
/// A quadratic through the vertex value is fitted when at least five
/// neighbours exist and the local system is well conditioned; otherwise an
/// affine fit is used. Weights are inverse squared distances. Both fits
/// reproduce affine data exactly.
pub fn estimate_gradients(tri: &Triangulation, values: &[f64]) -> Vec<[f64; 2]> {
    (0..tri.points().len())
        .map(|v| {
            let nbrs = tri.vertex_neighbors(v);
            let quad = if nbrs.len() >= 5 { local_fit(tri, values, v, &nbrs, 5) } else { None };
            quad.or_else(|| local_fit(tri, values, v, &nbrs, 2)).unwrap_or([0.0, 0.0])
        })
        .collect()
}

/// Weighted least squares for `z - z_v` on the first `terms` of
/// `[du, dv, du², du·dv, dv²]` in coordinates scaled by the mean neighbour distance.
fn local_fit(tri: &Triangulation, values: &[f64], v: usize, nbrs: &[usize], terms: usize) -> Option<[f64; 2]> {
    let pv = tri.vertex(v);
    let scale = nbrs.iter().map(|&w| tri.vertex(w).dist(pv)).sum::<f64>() / nbrs.len() as f64;
    let mut ata = Matrix::zeros(terms);
    let mut atb = vec![0.0; terms];
    for &w in nbrs {
        let pw = tri.vertex(w);
        let du = (pw.u - pv.u) / scale;
        let dv = (pw.v - pv.v) / scale;
        let weight = 1.0 / (du * du + dv * dv);
        let row = [du, dv, du * du, du * dv, dv * dv];
        let dz = values[w] - values[v];
        for i in 0..terms {
            atb[i] += weight * row[i] * dz;
            for j in 0..terms {
                ata[(i, j)] += weight * row[i] * row[j];
            }
        }
    }
    let lu = Lu::factor(&ata).ok()?;
    if terms > 2 && lu.condition_1norm() > QUADRATIC_COND_LIMIT {
        return None;
    }
    let coef = lu.solve(&atb).ok()?;
    Some([coef[0] / scale, coef[1] / scale])
}

fn dot(g: [f64; 2], a: Point2, b: Point2) -> f64 {
    g[0] * (b.u - a.u) + g[1] * (b.v - a.v)
}

/// Clough–Tocher control net of one macro-triangle.
fn build_patch(p: [Point2; 3], f: [f64; 3], g: [[f64; 2]; 3]) -> [SubPatch; 3] {
    let c = Point2::new((p[0].u + p[1].u + p[2].u) / 3.0, (p[0].v + p[1].v + p[2].v) / 3.0);
    // first interior ring next to each vertex, pointing at the split point
    let toward_c: [f64; 3] = std::array::from_fn(|k| f[k] + dot(g[k], p[k], c) / 3.0);
    let toward = |k: usize, m: usize| f[k] + dot(g[k], p[k], p[m]) / 3.0;

    // edge-adjacent interior ordinate of each sub-triangle
    let mut edge_mid = [0.0; 3];
    #[allow(clippy::needless_range_loop)]
    for i in 0..3 {
        let (a, b) = ((i + 1) % 3, (i + 2) % 3);
        let e = Point2::new(p[b].u - p[a].u, p[b].v - p[a].v);
        let m = p[a].lerp(p[b], 0.5);
        let s = ((c.u - m.u) * e.u + (c.v - m.v) * e.v) / (e.u * e.u + e.v * e.v);
        // barycentric direction of the edge normal pointing into the sub-triangle
        let (ua, ub) = (-0.5 + s, -0.5 - s);
        let d0 = ua * f[a] + ub * toward(a, b) + toward_c[a];
        let d2 = ua * toward(b, a) + ub * f[b] + toward_c[b];
        edge_mid[i] = 0.5 * (d0 + d2) - ua * toward(a, b) - ub * toward(b, a);
    }
    let inner: [f64; 3] = std::array::from_fn(|k| (toward_c[k] + edge_mid[(k + 1) % 3] + edge_mid[(k + 2) % 3]) / 3.0);
    let center = (inner[0] + inner[1] + inner[2]) / 3.0;

    std::array::from_fn(|i| {
        let (a, b) = ((i + 1) % 3, (i + 2) % 3);
        [f[a], f[b], center, toward(a, b), toward(b, a), toward_c[a], inner[a], toward_c[b], inner[b], edge_mid[i]]
    })
}

fn eval_patch(patches: &[SubPatch; 3], bary: [f64; 3]) -> f64 {
    let i = if bary[0] <= bary[1] && bary[0] <= bary[2] {
        0
    } else if bary[1] <= bary[2] {
        1
    } else {
        2
    };
    let la = bary[(i + 1) % 3] - bary[i];
    let lb = bary[(i + 2) % 3] - bary[i];
    let lc = 3.0 * bary[i];
    let b = &patches[i];
    b[0] * la * la * la
        + b[1] * lb * lb * lb
        + b[2] * lc * lc * lc
        + 3.0
            * (b[3] * la * la * lb
                + b[4] * la * lb * lb
                + b[5] * la * la * lc
                + b[6] * la * lc * lc
                + b[7] * lb * lb * lc
                + b[8] * lb * lc * lc)
        + 6.0 * b[9] * la * lb * lc
}

/// Fits the piecewise-cubic interpolant of `values` at `points`.
pub fn fit_cubic(points: &PointSet2, values: &[f64]) -> Result<CubicSurface, CubicError> {
    if values.len() != points.len() {
        return Err(CubicError::ValueCount { expected: points.len(), found: values.len() });
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(CubicError::NonFiniteValue(i));
    }
    let tri = Triangulation::new(points)?;
    let gradients = estimate_gradients(&tri, values);
    Ok(CubicSurface::from_parts(tri, values.to_vec(), gradients))
}

impl CubicSurface {
    /// Assembles a surface from a triangulation, node values and node gradients.
    pub fn from_parts(tri: Triangulation, values: Vec<f64>, gradients: Vec<[f64; 2]>) -> Self {
        let patches = tri
            .triangles()
            .iter()
            .map(|t| build_patch(t.map(|i| tri.vertex(i)), t.map(|i| values[i]), t.map(|i| gradients[i])))
            .collect();
        Self { tri, values, gradients, patches }
    }

    pub fn triangulation(&self) -> &Triangulation {
        &self.tri
    }

    pub fn node_values(&self) -> &[f64] {
        &self.values
    }

    pub fn node_gradients(&self) -> &[[f64; 2]] {
        &self.gradients
    }

    /// Interpolated value, or `None` outside the convex hull of the nodes.
    pub fn eval(&self, q: Point2) -> Option<f64> {
        match self.tri.locate(q) {
            Location::Inside { triangle, bary } => Some(eval_patch(&self.patches[triangle], bary)),
            Location::Outside => None,
        }
    }

    /// Evaluates the polynomial pieces of macro-triangle `t` at `q`, whether
    /// or not `q` lies inside it.
    pub fn eval_in_triangle(&self, t: usize, q: Point2) -> f64 {
        eval_patch(&self.patches[t], self.tri.barycentric(t, q))
    }
}
