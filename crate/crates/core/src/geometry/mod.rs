//! Planar geometry: point sets, convex hulls, Delaunay triangulation, point
//! location and sampling-density descriptors.

mod descriptors;
mod triangulation;

pub use descriptors::{fill_distance, mesh_ratio, separation_distance, DomainKind, GeometryReport, DEFAULT_FILL_GRID};
pub use triangulation::{Location, Triangulation};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default absolute tolerance below which two nodes count as duplicates.
pub const DUPLICATE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("insufficient nodes: need at least {required}, got {found}")]
    InsufficientNodes { required: usize, found: usize },
    #[error("degenerate geometry: all nodes are collinear")]
    DegenerateGeometry,
    #[error("nodes {first} and {second} coincide within {tol:e}")]
    DuplicatePoint { first: usize, second: usize, tol: f64 },
    #[error("non-finite coordinate at node {0}")]
    NonFinite(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub u: f64,
    pub v: f64,
}

impl Point2 {
    pub const fn new(u: f64, v: f64) -> Self {
        Self { u, v }
    }

    pub fn dist(self, other: Point2) -> f64 {
        (self.u - other.u).hypot(self.v - other.v)
    }

    pub fn dist2(self, other: Point2) -> f64 {
        let du = self.u - other.u;
        let dv = self.v - other.v;
        du * du + dv * dv
    }

    pub fn lerp(self, other: Point2, t: f64) -> Point2 {
        Point2::new(self.u + t * (other.u - self.u), self.v + t * (other.v - self.v))
    }

    fn coord(self) -> robust::Coord<f64> {
        robust::Coord { x: self.u, y: self.v }
    }
}

impl From<(f64, f64)> for Point2 {
    fn from((u, v): (f64, f64)) -> Self {
        Self::new(u, v)
    }
}

/// Exact sign of the orientation determinant: positive when `a, b, c` turn
/// counterclockwise.
pub fn orient(a: Point2, b: Point2, c: Point2) -> f64 {
    robust::orient2d(a.coord(), b.coord(), c.coord())
}

/// Exact sign of the in-circle determinant: positive when `d` lies strictly
/// inside the circle through the counterclockwise triangle `a, b, c`.
pub fn in_circle(a: Point2, b: Point2, c: Point2, d: Point2) -> f64 {
    robust::incircle(a.coord(), b.coord(), c.coord(), d.coord())
}

/// A set of planar nodes with no two closer than the duplicate tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSet2 {
    points: Vec<Point2>,
}

impl PointSet2 {
    pub fn new(points: Vec<Point2>) -> Result<Self, GeometryError> {
        Self::with_tolerance(points, DUPLICATE_TOL)
    }

    pub fn with_tolerance(points: Vec<Point2>, tol: f64) -> Result<Self, GeometryError> {
        for (i, p) in points.iter().enumerate() {
            if !p.u.is_finite() || !p.v.is_finite() {
                return Err(GeometryError::NonFinite(i));
            }
        }
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                if points[i].dist(points[j]) <= tol {
                    return Err(GeometryError::DuplicatePoint { first: i, second: j, tol });
                }
            }
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// A convex polygon with counterclockwise vertices. One or two vertices
/// describe a degenerate (point or segment) domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexPolygon {
    vertices: Vec<Point2>,
}

impl ConvexPolygon {
    /// Strict convex hull of `points` (collinear boundary points dropped).
    pub fn hull_of(points: &[Point2]) -> Result<Self, GeometryError> {
        if points.is_empty() {
            return Err(GeometryError::InsufficientNodes { required: 1, found: 0 });
        }
        let mut sorted: Vec<Point2> = points.to_vec();
        sorted.sort_by(|a, b| a.u.total_cmp(&b.u).then(a.v.total_cmp(&b.v)));
        sorted.dedup();
        if sorted.len() < 3 {
            return Ok(Self { vertices: sorted });
        }
        // Andrew's monotone chain
        let mut lower: Vec<Point2> = Vec::new();
        for &p in &sorted {
            while lower.len() >= 2 && orient(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
                lower.pop();
            }
            lower.push(p);
        }
        let mut upper: Vec<Point2> = Vec::new();
        for &p in sorted.iter().rev() {
            while upper.len() >= 2 && orient(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
                upper.pop();
            }
            upper.push(p);
        }
        lower.pop();
        upper.pop();
        lower.extend(upper);
        Ok(Self { vertices: lower })
    }

    /// Axis-aligned bounding box of `points` as a polygon.
    pub fn bounding_box_of(points: &[Point2]) -> Result<Self, GeometryError> {
        if points.is_empty() {
            return Err(GeometryError::InsufficientNodes { required: 1, found: 0 });
        }
        let (lo, hi) = bounds(points);
        let corners = vec![lo, Point2::new(hi.u, lo.v), hi, Point2::new(lo.u, hi.v)];
        // Collapses to a segment or point when the box is flat.
        Self::hull_of(&corners)
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn area(&self) -> f64 {
        let n = self.vertices.len();
        if n < 3 {
            return 0.0;
        }
        let mut twice = 0.0;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            twice += a.u * b.v - b.u * a.v;
        }
        0.5 * twice
    }

    /// Point-in-polygon test with an absolute slack `tol` on edge distances.
    pub fn contains(&self, p: Point2, tol: f64) -> bool {
        match self.vertices.len() {
            0 => false,
            1 => self.vertices[0].dist(p) <= tol,
            2 => segment_distance(self.vertices[0], self.vertices[1], p) <= tol,
            n => (0..n).all(|i| {
                let a = self.vertices[i];
                let b = self.vertices[(i + 1) % n];
                let len = a.dist(b);
                // signed distance of p to the left of a->b
                ((b.u - a.u) * (p.v - a.v) - (b.v - a.v) * (p.u - a.u)) / len >= -tol
            }),
        }
    }

    pub fn bounds(&self) -> (Point2, Point2) {
        bounds(&self.vertices)
    }

    pub fn diameter(&self) -> f64 {
        let (lo, hi) = self.bounds();
        lo.dist(hi)
    }
}

pub(crate) fn bounds(points: &[Point2]) -> (Point2, Point2) {
    let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in points {
        lo.u = lo.u.min(p.u);
        lo.v = lo.v.min(p.v);
        hi.u = hi.u.max(p.u);
        hi.v = hi.v.max(p.v);
    }
    (lo, hi)
}

fn segment_distance(a: Point2, b: Point2, p: Point2) -> f64 {
    let len2 = a.dist2(b);
    if len2 == 0.0 {
        return a.dist(p);
    }
    let t = (((p.u - a.u) * (b.u - a.u) + (p.v - a.v) * (b.v - a.v)) / len2).clamp(0.0, 1.0);
    a.lerp(b, t).dist(p)
}
