//! Small dense linear algebra: row-major matrices and LU with partial pivoting.

use std::ops::{Index, IndexMut};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix is singular to working precision (pivot {pivot:e} at column {column})")]
    Singular { column: usize, pivot: f64 },
    #[error("dimension mismatch: expected {expected}, got {found}")]
    Dimension { expected: usize, found: usize },
}

/// Dense square matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> f64 {
        (0..self.n).map(|j| (0..self.n).map(|i| self[(i, j)].abs()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| self.data[i * self.n..(i + 1) * self.n].iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// `P A = L U` with unit lower-triangular `L`, stored packed.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: Matrix,
    perm: Vec<usize>,
    norm1: f64,
}

impl Lu {
    /// Factorizes `a`; a pivot below `n · eps · ‖A‖₁` counts as singular.
    pub fn factor(a: &Matrix) -> Result<Self, LinalgError> {
        let n = a.dim();
        let norm1 = a.norm1();
        let tiny = (n as f64) * f64::EPSILON * norm1;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pivot) =
                (k..n)
                    .map(|i| (i, lu[(i, k)].abs()))
                    .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot.is_nan() || pivot <= tiny {
                return Err(LinalgError::Singular { column: k, pivot });
            }
            if p != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let d = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / d;
                lu[(i, k)] = f;
                if f != 0.0 {
                    for j in k + 1..n {
                        lu[(i, j)] -= f * lu[(k, j)];
                    }
                }
            }
        }
        Ok(Self { lu, perm, norm1 })
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
        let n = self.lu.dim();
        if b.len() != n {
            return Err(LinalgError::Dimension { expected: n, found: b.len() });
        }
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let s: f64 = (0..i).map(|j| self.lu[(i, j)] * x[j]).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| self.lu[(i, j)] * x[j]).sum();
            x[i] = (x[i] - s) / self.lu[(i, i)];
        }
        Ok(x)
    }

    /// Solves `a x = b` and then applies `steps` rounds of iterative
    /// refinement with residuals accumulated in compensated arithmetic.
    /// `a` must be the matrix this factorization was built from.
    pub fn solve_refined(&self, a: &Matrix, b: &[f64], steps: usize) -> Result<Vec<f64>, LinalgError> {
        let mut x = self.solve(b)?;
        for _ in 0..steps {
            let r = residual(a, &x, b);
            let dx = self.solve(&r)?;
            x.iter_mut().zip(dx).for_each(|(xi, d)| *xi += d);
        }
        Ok(x)
    }

    /// 1-norm condition number `‖A‖₁ ‖A⁻¹‖₁`, with the inverse formed
    /// column by column (affordable for the tens-of-unknowns systems here).
    pub fn condition_1norm(&self) -> f64 {
        let n = self.lu.dim();
        let mut inv_norm: f64 = 0.0;
        let mut e = vec![0.0; n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = 1.0;
            let col = self.solve(&e).expect("dimension matches");
            inv_norm = inv_norm.max(col.iter().map(|v| v.abs()).sum());
        }
        self.norm1 * inv_norm
    }
}

/// `Σ xᵢ yᵢ` with error-free transformations (twice the working precision,
/// rounded once at the end).
pub fn dot2(pairs: impl IntoIterator<Item = (f64, f64)>) -> f64 {
    let (mut hi, mut lo) = (0.0f64, 0.0f64);
    for (x, y) in pairs {
        let p = x * y;
        let p_err = x.mul_add(y, -p);
        let t = hi + p;
        let z = t - hi;
        lo += (hi - (t - z)) + (p - z) + p_err;
        hi = t;
    }
    hi + lo
}

/// `b − A x`, each component accumulated with [`dot2`].
pub fn residual(a: &Matrix, x: &[f64], b: &[f64]) -> Vec<f64> {
    (0..a.dim())
        .map(|i| dot2(std::iter::once((b[i], 1.0)).chain(x.iter().enumerate().map(|(j, &xj)| (-a[(i, j)], xj)))))
        .collect()
}

/// Solves `A x = b` in one call.
pub fn solve(a: &Matrix, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
    Lu::factor(a)?.solve(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_residual_is_exact_on_cancellation() {
        // 1e16 + 1 - 1e16 loses the 1 in naive summation
        let a = Matrix::from_fn(1, |_, _| 1.0);
        let m = Matrix::from_fn(3, |i, j| if i == 0 { [1e16, 1.0, -1e16][j] } else { (i == j) as u8 as f64 });
        assert_eq!(residual(&m, &[1.0, 1.0, 1.0], &[0.0, 1.0, 1.0])[0], -1.0);
        assert_eq!(residual(&a, &[2.0], &[2.0]), vec![0.0]);
    }

    #[test]
    fn refinement_reduces_residual() {
        // Hilbert matrix, condition ≈ 1e10 at n = 8
        let n = 8;
        let a = Matrix::from_fn(n, |i, j| 1.0 / (i + j + 1) as f64);
        let x_true: Vec<f64> = (0..n).map(|i| 1.0 + i as f64).collect();
        let b = a.mul_vec(&x_true);
        let lu = Lu::factor(&a).unwrap();
        let norm = |v: &[f64]| v.iter().map(|x| x.abs()).fold(0.0, f64::max);
        let plain = norm(&residual(&a, &lu.solve(&b).unwrap(), &b));
        let refined = norm(&residual(&a, &lu.solve_refined(&a, &b, 2).unwrap(), &b));
        assert!(refined <= plain, "{refined} vs {plain}");
    }

    #[test]
    fn solves_with_pivoting() {
        // zero leading entry forces a row swap
        let a = Matrix::from_fn(3, |i, j| [[0.0, 2.0, 1.0], [1.0, 1.0, 0.0], [3.0, 0.0, 1.0]][i][j]);
        let x_true = [1.0, -2.0, 0.5];
        let b = a.mul_vec(&x_true);
        let x = solve(&a, &b).unwrap();
        for (u, v) in x.iter().zip(x_true) {
            assert!((u - v).abs() < 1e-14);
        }
    }

    #[test]
    fn singular_detected() {
        let a = Matrix::from_fn(2, |i, j| [[1.0, 2.0], [2.0, 4.0]][i][j]);
        assert!(matches!(Lu::factor(&a), Err(LinalgError::Singular { .. })));
    }

    #[test]
    fn condition_of_diagonal() {
        let a = Matrix::from_fn(3, |i, j| if i == j { [1.0, 10.0, 0.01][i] } else { 0.0 });
        let c = Lu::factor(&a).unwrap().condition_1norm();
        assert!((c - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn dimension_mismatch() {
        let lu = Lu::factor(&Matrix::from_fn(2, |i, j| (i == j) as u8 as f64)).unwrap();
        assert!(matches!(lu.solve(&[1.0]), Err(LinalgError::Dimension { expected: 2, found: 1 })));
    }
}
