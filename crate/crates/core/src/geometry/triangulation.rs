use std::collections::HashMap;

use super::{in_circle, orient, GeometryError, Point2, PointSet2};

/// Barycentric slack accepted by [`Triangulation::locate`].
pub const LOCATE_TOL: f64 = 1e-12;

/// Result of a point-location query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Location {
    Inside { triangle: usize, bary: [f64; 3] },
    Outside,
}

/// Delaunay triangulation of a planar point set.
///
/// Triangles are counterclockwise vertex-index triples into the original
/// node order. `neighbors[t][i]` is the triangle across the edge opposite
/// vertex `i` of triangle `t`. `hull` lists every boundary vertex (including
/// collinear ones) counterclockwise.
#[derive(Debug, Clone)]
pub struct Triangulation {
    points: Vec<Point2>,
    triangles: Vec<[usize; 3]>,
    neighbors: Vec<[Option<usize>; 3]>,
    hull: Vec<usize>,
}

impl Triangulation {
    /// Builds the Delaunay triangulation.
    ///
    /// Nodes are inserted in lexicographic order by a sweep that only ever
    /// attaches the new node to the visible part of the current hull; the
    /// result is then made Delaunay by Lawson edge flips driven by exact
    /// orientation and in-circle predicates. On cocircular quadrilaterals the
    /// diagonal whose (sorted) vertex-index pair is lexicographically smaller
    /// wins, so grid-like inputs triangulate deterministically.
    pub fn new(points: &PointSet2) -> Result<Self, GeometryError> {
        let pts = points.points().to_vec();
        let n = pts.len();
        if n < 3 {
            return Err(GeometryError::InsufficientNodes { required: 3, found: n });
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| pts[a].u.total_cmp(&pts[b].u).then(pts[a].v.total_cmp(&pts[b].v)));

        let first_off_line = (2..n)
            .find(|&j| orient(pts[order[0]], pts[order[1]], pts[order[j]]) != 0.0)
            .ok_or(GeometryError::DegenerateGeometry)?;
        let apex = order[first_off_line];
        let ccw = orient(pts[order[0]], pts[order[1]], pts[apex]) > 0.0;

        let mut triangles: Vec<[usize; 3]> = Vec::with_capacity(2 * n);
        let chain = &order[..first_off_line];
        for w in chain.windows(2) {
            triangles.push(if ccw { [w[0], w[1], apex] } else { [w[1], w[0], apex] });
        }
        let mut hull: Vec<usize> = if ccw { chain.to_vec() } else { chain.iter().rev().copied().collect() };
        hull.push(apex);

        for &p in &order[first_off_line + 1..] {
            let m = hull.len();
            let visible: Vec<bool> =
                (0..m).map(|i| orient(pts[hull[i]], pts[hull[(i + 1) % m]], pts[p]) < 0.0).collect();
            // Start of the (cyclically contiguous) visible chain.
            let start = (0..m)
                .find(|&i| visible[i] && !visible[(i + m - 1) % m])
                .expect("a lexicographically maximal node is strictly outside the hull");
            let mut end = start;
            while visible[(end + 1) % m] {
                end = (end + 1) % m;
            }
            let mut i = start;
            loop {
                let a = hull[i];
                let b = hull[(i + 1) % m];
                triangles.push([b, a, p]);
                if i == end {
                    break;
                }
                i = (i + 1) % m;
            }
            let mut next = Vec::with_capacity(m + 1);
            let mut k = (end + 1) % m;
            loop {
                next.push(hull[k]);
                if k == start {
                    break;
                }
                k = (k + 1) % m;
            }
            next.push(p);
            hull = next;
        }

        legalize(&pts, &mut triangles);
        let neighbors = build_neighbors(&triangles);
        let hull = canonical_hull(hull);
        Ok(Self { points: pts, triangles, neighbors, hull })
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn neighbors(&self) -> &[[Option<usize>; 3]] {
        &self.neighbors
    }

    pub fn hull(&self) -> &[usize] {
        &self.hull
    }

    pub fn vertex(&self, i: usize) -> Point2 {
        self.points[i]
    }

    pub fn corners(&self, t: usize) -> [Point2; 3] {
        self.triangles[t].map(|i| self.points[i])
    }

    /// Signed area of triangle `t` (positive for every triangle).
    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.corners(t);
        0.5 * ((b.u - a.u) * (c.v - a.v) - (b.v - a.v) * (c.u - a.u))
    }

    /// Barycentric coordinates of `q` with respect to triangle `t`.
    pub fn barycentric(&self, t: usize, q: Point2) -> [f64; 3] {
        let [a, b, c] = self.corners(t);
        let det = (b.u - a.u) * (c.v - a.v) - (b.v - a.v) * (c.u - a.u);
        let l1 = ((q.u - a.u) * (c.v - a.v) - (q.v - a.v) * (c.u - a.u)) / det;
        let l2 = ((b.u - a.u) * (q.v - a.v) - (b.v - a.v) * (q.u - a.u)) / det;
        [1.0 - l1 - l2, l1, l2]
    }

    /// Finds the triangle containing `q`. When `q` lies on a shared edge the
    /// triangle with the largest minimum barycentric coordinate wins, ties to
    /// the lowest index.
    pub fn locate(&self, q: Point2) -> Location {
        let mut best: Option<(usize, [f64; 3], f64)> = None;
        for t in 0..self.triangles.len() {
            let bary = self.barycentric(t, q);
            let worst = bary[0].min(bary[1]).min(bary[2]);
            if worst >= -LOCATE_TOL && best.is_none_or(|(_, _, w)| worst > w) {
                best = Some((t, bary, worst));
            }
        }
        match best {
            Some((triangle, bary, _)) => Location::Inside { triangle, bary },
            None => Location::Outside,
        }
    }

    /// Distinct vertices sharing an edge with vertex `v`, in ascending order.
    pub fn vertex_neighbors(&self, v: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .triangles
            .iter()
            .filter(|t| t.contains(&v))
            .flat_map(|t| t.iter().copied())
            .filter(|&w| w != v)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Lawson flips until every interior edge is locally Delaunay.
fn legalize(pts: &[Point2], triangles: &mut [[usize; 3]]) {
    let mut edges: HashMap<(usize, usize), usize> = HashMap::with_capacity(3 * triangles.len());
    for (t, tri) in triangles.iter().enumerate() {
        for k in 0..3 {
            edges.insert((tri[k], tri[(k + 1) % 3]), t);
        }
    }
    let mut stack: Vec<(usize, usize)> = Vec::with_capacity(3 * triangles.len());
    for tri in triangles.iter().rev() {
        for k in (0..3).rev() {
            stack.push((tri[k], tri[(k + 1) % 3]));
        }
    }

    while let Some((u, v)) = stack.pop() {
        let (Some(&t1), Some(&t2)) = (edges.get(&(u, v)), edges.get(&(v, u))) else {
            continue;
        };
        let p = third(triangles[t1], u, v);
        let q = third(triangles[t2], v, u);
        let ic = in_circle(pts[u], pts[v], pts[p], pts[q]);
        let flip = ic > 0.0 || (ic == 0.0 && sorted_pair(p, q) < sorted_pair(u, v));
        if !flip {
            continue;
        }
        // Quadrilateral u, q, v, p (ccw) gets the diagonal p-q.
        triangles[t1] = [p, u, q];
        triangles[t2] = [q, v, p];
        edges.remove(&(u, v));
        edges.remove(&(v, u));
        edges.insert((p, u), t1);
        edges.insert((u, q), t1);
        edges.insert((q, p), t1);
        edges.insert((q, v), t2);
        edges.insert((v, p), t2);
        edges.insert((p, q), t2);
        stack.extend([(p, u), (u, q), (q, v), (v, p)]);
    }
}

/// Vertex of `tri` that follows the directed edge `a -> b`.
fn third(tri: [usize; 3], a: usize, b: usize) -> usize {
    (0..3)
        .find(|&k| tri[k] == a && tri[(k + 1) % 3] == b)
        .map(|k| tri[(k + 2) % 3])
        .expect("directed edge belongs to triangle")
}

fn sorted_pair(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

fn build_neighbors(triangles: &[[usize; 3]]) -> Vec<[Option<usize>; 3]> {
    let mut edges: HashMap<(usize, usize), usize> = HashMap::with_capacity(3 * triangles.len());
    for (t, tri) in triangles.iter().enumerate() {
        for k in 0..3 {
            edges.insert((tri[k], tri[(k + 1) % 3]), t);
        }
    }
    triangles
        .iter()
        .map(|tri| {
            // edge opposite vertex k runs tri[k+1] -> tri[k+2]; its twin is reversed
            std::array::from_fn(|k| edges.get(&(tri[(k + 2) % 3], tri[(k + 1) % 3])).copied())
        })
        .collect()
}

/// Rotates the hull cycle so it starts at its smallest vertex index.
fn canonical_hull(mut hull: Vec<usize>) -> Vec<usize> {
    if let Some(pos) = hull.iter().enumerate().min_by_key(|(_, &v)| v).map(|(i, _)| i) {
        hull.rotate_left(pos);
    }
    hull
}
