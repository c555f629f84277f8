use serde::{Deserialize, Serialize};

use super::{ConvexPolygon, GeometryError, Point2, PointSet2};

/// Default per-axis resolution of the fill-distance search grid.
pub const DEFAULT_FILL_GRID: usize = 200;

/// Which region the fill distance is measured over.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainKind {
    #[default]
    ConvexHull,
    BoundingBox,
}

impl DomainKind {
    pub fn polygon(self, points: &[Point2]) -> Result<ConvexPolygon, GeometryError> {
        match self {
            DomainKind::ConvexHull => ConvexPolygon::hull_of(points),
            DomainKind::BoundingBox => ConvexPolygon::bounding_box_of(points),
        }
    }
}

fn nearest_node_distance(points: &[Point2], q: Point2) -> f64 {
    points.iter().map(|p| p.dist2(q)).fold(f64::INFINITY, f64::min).sqrt()
}

/// Largest distance from a domain point to its nearest node.
///
/// The supremum is approximated by a `grid_resolution × grid_resolution`
/// lattice over the domain's bounding box (endpoints included), clipped to
/// the domain, together with the domain's own vertices. Segment domains are
/// sampled at `grid_resolution` points along the segment.
pub fn fill_distance(points: &PointSet2, domain: &ConvexPolygon, grid_resolution: usize) -> Result<f64, GeometryError> {
    let pts = points.points();
    if pts.is_empty() {
        return Err(GeometryError::InsufficientNodes { required: 1, found: 0 });
    }
    let verts = domain.vertices();
    if verts.is_empty() {
        return Err(GeometryError::DegenerateGeometry);
    }
    let res = grid_resolution.max(2);
    let mut best = verts.iter().map(|&q| nearest_node_distance(pts, q)).fold(0.0, f64::max);
    match verts.len() {
        1 => {}
        2 => {
            for i in 0..res {
                let q = verts[0].lerp(verts[1], i as f64 / (res - 1) as f64);
                best = best.max(nearest_node_distance(pts, q));
            }
        }
        _ => {
            let (lo, hi) = domain.bounds();
            let tol = 1e-12 * domain.diameter();
            for i in 0..res {
                let u = lo.u + (hi.u - lo.u) * i as f64 / (res - 1) as f64;
                for j in 0..res {
                    let v = lo.v + (hi.v - lo.v) * j as f64 / (res - 1) as f64;
                    let q = Point2::new(u, v);
                    if domain.contains(q, tol) {
                        best = best.max(nearest_node_distance(pts, q));
                    }
                }
            }
        }
    }
    Ok(best)
}

/// Half the smallest pairwise node distance.
pub fn separation_distance(points: &PointSet2) -> Result<f64, GeometryError> {
    let pts = points.points();
    if pts.len() < 2 {
        return Err(GeometryError::InsufficientNodes { required: 2, found: pts.len() });
    }
    let mut min2 = f64::INFINITY;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            min2 = min2.min(pts[i].dist2(pts[j]));
        }
    }
    Ok(0.5 * min2.sqrt())
}

/// Fill distance divided by separation distance.
pub fn mesh_ratio(points: &PointSet2, domain: &ConvexPolygon, grid_resolution: usize) -> Result<f64, GeometryError> {
    let q = separation_distance(points)?;
    Ok(fill_distance(points, domain, grid_resolution)? / q)
}

/// Sampling-density summary of a node set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryReport {
    pub fill_distance: f64,
    pub separation_distance: f64,
    pub mesh_ratio: f64,
    pub n_nodes: usize,
    /// Vertices of the strict convex hull.
    pub n_hull: usize,
}

impl GeometryReport {
    pub fn compute(points: &PointSet2, domain: DomainKind, grid_resolution: usize) -> Result<Self, GeometryError> {
        let polygon = domain.polygon(points.points())?;
        let hull = ConvexPolygon::hull_of(points.points())?;
        let fill = fill_distance(points, &polygon, grid_resolution)?;
        let sep = separation_distance(points)?;
        Ok(Self {
            fill_distance: fill,
            separation_distance: sep,
            mesh_ratio: fill / sep,
            n_nodes: points.len(),
            n_hull: hull.vertices().len(),
        })
    }
}
