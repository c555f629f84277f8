//! Brute-force reference implementations used as test oracles. Nothing here
//! calls into the library's numerics.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type P = (f64, f64);

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` distinct points in the unit square with pairwise distance ≥ `min_gap`.
pub fn scattered(rng: &mut ChaCha8Rng, n: usize, min_gap: f64) -> Vec<P> {
    let mut pts: Vec<P> = Vec::with_capacity(n);
    while pts.len() < n {
        let p = (rng.random::<f64>(), rng.random::<f64>());
        if pts.iter().all(|q| dist(p, *q) >= min_gap) {
            pts.push(p);
        }
    }
    pts
}

pub fn dist(a: P, b: P) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

pub fn cross(o: P, a: P, b: P) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Directed hull edges `(i, j)`: every other point is left of or on the line
/// `i → j` and the segment is maximal (no other point beyond its ends).
pub fn hull_edges(pts: &[P]) -> Vec<(usize, usize)> {
    let scale = pts.iter().map(|p| p.0.abs().max(p.1.abs())).fold(1.0, f64::max);
    let tol = 1e-12 * scale * scale;
    let mut edges = Vec::new();
    for i in 0..pts.len() {
        for j in 0..pts.len() {
            if i == j {
                continue;
            }
            let left = (0..pts.len()).all(|k| cross(pts[i], pts[j], pts[k]) >= -tol);
            // reject if another collinear point extends the segment
            let maximal = (0..pts.len()).all(|k| {
                if k == i || k == j || cross(pts[i], pts[j], pts[k]).abs() > tol {
                    return true;
                }
                let (dx, dy) = (pts[j].0 - pts[i].0, pts[j].1 - pts[i].1);
                let t = ((pts[k].0 - pts[i].0) * dx + (pts[k].1 - pts[i].1) * dy) / (dx * dx + dy * dy);
                (0.0..=1.0).contains(&t)
            });
            if left && maximal {
                edges.push((i, j));
            }
        }
    }
    edges
}

/// Number of input points lying on the hull boundary.
pub fn boundary_count(pts: &[P]) -> usize {
    let edges = hull_edges(pts);
    (0..pts.len())
        .filter(|&k| {
            edges.iter().any(|&(i, j)| {
                let (a, b, p) = (pts[i], pts[j], pts[k]);
                let len = dist(a, b);
                cross(a, b, p).abs() <= 1e-12 * len.max(1.0)
                    && (p.0 - a.0) * (b.0 - a.0) + (p.1 - a.1) * (b.1 - a.1) >= -1e-15
                    && (p.0 - b.0) * (a.0 - b.0) + (p.1 - b.1) * (a.1 - b.1) >= -1e-15
            })
        })
        .count()
}

pub fn in_hull(pts: &[P], q: P, tol: f64) -> bool {
    hull_edges(pts).iter().all(|&(i, j)| cross(pts[i], pts[j], q) >= -tol)
}

/// Shoelace area of the hull, from the brute-force edge set.
pub fn hull_area(pts: &[P]) -> f64 {
    let c = centroid(pts);
    hull_edges(pts).iter().map(|&(i, j)| 0.5 * cross(c, pts[i], pts[j])).sum()
}

pub fn centroid(pts: &[P]) -> P {
    let n = pts.len() as f64;
    (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n)
}

pub fn circumcircle(a: P, b: P, c: P) -> Option<(P, f64)> {
    let d = 2.0 * (a.0 * (b.1 - c.1) + b.0 * (c.1 - a.1) + c.0 * (a.1 - b.1));
    if d.abs() < 1e-300 {
        return None;
    }
    let (a2, b2, c2) = (a.0 * a.0 + a.1 * a.1, b.0 * b.0 + b.1 * b.1, c.0 * c.0 + c.1 * c.1);
    let ux = (a2 * (b.1 - c.1) + b2 * (c.1 - a.1) + c2 * (a.1 - b.1)) / d;
    let uy = (a2 * (c.0 - b.0) + b2 * (a.0 - c.0) + c2 * (b.0 - a.0)) / d;
    Some(((ux, uy), dist((ux, uy), a)))
}

/// Indices of points strictly inside the circumcircle of `tri`
/// (relative slack `rel`).
pub fn circumcircle_violators(pts: &[P], tri: [usize; 3], rel: f64) -> Vec<usize> {
    let Some((c, r)) = circumcircle(pts[tri[0]], pts[tri[1]], pts[tri[2]]) else {
        return vec![];
    };
    (0..pts.len()).filter(|k| !tri.contains(k) && dist(pts[*k], c) < r * (1.0 - rel)).collect()
}

fn nearest(pts: &[P], q: P) -> f64 {
    pts.iter().map(|p| dist(*p, q)).fold(f64::INFINITY, f64::min)
}

/// Exact fill distance over the convex hull: the supremum is attained at a
/// Voronoi vertex inside the hull, where a Voronoi edge meets the hull
/// boundary, or at a hull corner. All candidates are enumerated.
pub fn exact_fill_distance(pts: &[P]) -> f64 {
    let edges = hull_edges(pts);
    let tol = 1e-12;
    let mut best: f64 = 0.0;
    for &(i, _) in &edges {
        best = best.max(nearest(pts, pts[i]));
    }
    let n = pts.len();
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                if let Some((cc, _)) = circumcircle(pts[a], pts[b], pts[c]) {
                    if in_hull(pts, cc, tol) {
                        best = best.max(nearest(pts, cc));
                    }
                }
            }
            // bisector of (a, b) against every hull edge
            let m = ((pts[a].0 + pts[b].0) / 2.0, (pts[a].1 + pts[b].1) / 2.0);
            let dir = (-(pts[b].1 - pts[a].1), pts[b].0 - pts[a].0);
            for &(i, j) in &edges {
                let (p, q) = (pts[i], pts[j]);
                let e = (q.0 - p.0, q.1 - p.1);
                let den = dir.0 * e.1 - dir.1 * e.0;
                if den.abs() < 1e-300 {
                    continue;
                }
                let s = ((p.0 - m.0) * e.1 - (p.1 - m.1) * e.0) / den;
                let t = ((p.0 - m.0) * dir.1 - (p.1 - m.1) * dir.0) / den;
                if (0.0..=1.0).contains(&t) {
                    best = best.max(nearest(pts, (m.0 + s * dir.0, m.1 + s * dir.1)));
                }
            }
        }
    }
    best
}

/// Rounded the same way as the library kernel: with weights of order 1e5,
/// a one-ulp kernel difference alone would shift values by ~1e-10.
pub fn multiquadric(a: P, b: P, eps: f64) -> f64 {
    (eps * (a.0 - b.0).hypot(a.1 - b.1)).hypot(1.0)
}

/// Solves `a x = b` by Gauss–Jordan elimination with full pivoting.
pub fn gauss_jordan(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    let mut col_of: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let (mut pr, mut pc, mut big) = (k, k, 0.0);
        for (i, row) in a.iter().enumerate().skip(k) {
            for (j, v) in row.iter().enumerate().skip(k) {
                if v.abs() > big {
                    (pr, pc, big) = (i, j, v.abs());
                }
            }
        }
        assert!(big > 0.0, "singular oracle system");
        a.swap(k, pr);
        b.swap(k, pr);
        for row in a.iter_mut() {
            row.swap(k, pc);
        }
        col_of.swap(k, pc);
        let piv = a[k][k];
        for v in a[k].iter_mut() {
            *v /= piv;
        }
        b[k] /= piv;
        for i in 0..n {
            if i != k {
                let f = a[i][k];
                if f != 0.0 {
                    let pivot_row = a[k].clone();
                    for (aij, akj) in a[i].iter_mut().zip(&pivot_row) {
                        *aij -= f * akj;
                    }
                    b[i] -= f * b[k];
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    for k in 0..n {
        x[col_of[k]] = b[k];
    }
    x
}

/// `b − A x` in double-double arithmetic.
fn dd_residual(a: &[Vec<f64>], x: &[f64], b: &[f64]) -> Vec<f64> {
    fn two_sum(a: f64, b: f64) -> (f64, f64) {
        let s = a + b;
        let bb = s - a;
        (s, (a - (s - bb)) + (b - bb))
    }
    a.iter()
        .zip(b)
        .map(|(row, &bi)| {
            let (mut s, mut e) = (bi, 0.0);
            for (aij, xj) in row.iter().zip(x) {
                let p = -aij * xj;
                let pe = (-aij).mul_add(*xj, -p);
                let (t, te) = two_sum(s, p);
                s = t;
                e += te + pe;
            }
            s + e
        })
        .collect()
}

/// Gauss–Jordan solve followed by three refinement sweeps.
pub fn refined_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let mut x = gauss_jordan(a.to_vec(), b.to_vec());
    for _ in 0..3 {
        let r = dd_residual(a, &x, b);
        let dx = gauss_jordan(a.to_vec(), r);
        x.iter_mut().zip(dx).for_each(|(xi, d)| *xi += d);
    }
    x
}

/// Interpolating multiquadric RBF with an affine tail, solved from the
/// explicit saddle system. Returns an evaluator.
pub fn naive_rbf(pts: &[P], vals: &[f64], eps: f64) -> impl Fn(P) -> f64 {
    let n = pts.len();
    let m = n + 3;
    let mut a = vec![vec![0.0; m]; m];
    for i in 0..n {
        for j in 0..n {
            a[i][j] = multiquadric(pts[i], pts[j], eps);
        }
        let tail = [1.0, pts[i].0, pts[i].1];
        for k in 0..3 {
            a[i][n + k] = tail[k];
            a[n + k][i] = tail[k];
        }
    }
    let mut b = vals.to_vec();
    b.extend([0.0; 3]);
    let x = refined_solve(&a, &b);
    let centers = pts.to_vec();
    move |q: P| {
        let mut row: Vec<f64> = centers.iter().map(|c| multiquadric(*c, q, eps)).collect();
        row.extend([1.0, q.0, q.1]);
        -dd_residual(&[row], &x, &[0.0])[0]
    }
}

/// Textbook metrics with the mean taken over all targets.
pub fn naive_metrics(t: &[f64], p: &[f64]) -> (f64, f64, f64) {
    let n = t.len() as f64;
    let mean = t.iter().sum::<f64>() / n;
    let mut sse = 0.0;
    let mut sae = 0.0;
    let mut sst = 0.0;
    for i in 0..t.len() {
        sse += (t[i] - p[i]) * (t[i] - p[i]);
        sae += (t[i] - p[i]).abs();
        sst += (t[i] - mean) * (t[i] - mean);
    }
    ((sse / n).sqrt(), sae / n, 1.0 - sse / sst)
}
