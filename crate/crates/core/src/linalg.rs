//! Small dense linear algebra.
//!
//! The matrices handled here are tiny (a few dozen rows at most), so
//! everything is written for clarity and reproducibility: row-major storage,
//! partial/full pivoting elimination, and a one-sided Jacobi SVD for null
//! directions.

use std::ops::{Index, IndexMut};

use crate::scalar::Real;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    /// Builds a matrix whose columns are the given vectors.
    ///
    /// Panics if the columns do not all share one length.
    pub fn from_columns<V: AsRef<[T]>>(columns: &[V]) -> Self {
        let cols = columns.len();
        let rows = columns.first().map_or(0, |c| c.as_ref().len());
        let mut m = Self::zeros(rows, cols);
        for (j, c) in columns.iter().enumerate() {
            let c = c.as_ref();
            assert_eq!(c.len(), rows, "ragged columns");
            for (i, &x) in c.iter().enumerate() {
                m[(i, j)] = x;
            }
        }
        m
    }

    pub fn from_rows<V: AsRef<[T]>>(rows: &[V]) -> Self {
        Self::from_columns(rows).transpose()
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] = out[(i, j)] + a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len(), "vector length differs from column count");
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    pub fn scaled(&self, s: T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| x * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| a + b)
                .collect(),
        }
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
    }

    /// Frobenius norm of `self - other`.
    pub fn distance(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| (a - b) * (a - b))
            .sum::<T>()
            .sqrt()
    }

    /// Determinant by LU with partial pivoting. Square matrices only.
    pub fn determinant(&self) -> T {
        assert_eq!(self.rows, self.cols, "determinant of non-square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut det = T::one();
        for k in 0..n {
            let (p, pivot) = (k..n)
                .map(|i| (i, a[(i, k)].abs()))
                .fold((k, T::zero()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot == T::zero() {
                return T::zero();
            }
            if p != k {
                a.swap_rows(p, k);
                det = -det;
            }
            let akk = a[(k, k)];
            det = det * akk;
            for i in k + 1..n {
                let factor = a[(i, k)] / akk;
                if factor == T::zero() {
                    continue;
                }
                for j in k + 1..n {
                    a[(i, j)] = a[(i, j)] - factor * a[(k, j)];
                }
            }
        }
        det
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Numerical rank by full-pivot elimination; pivots at or below
    /// `threshold * max|a_ij|` count as zero.
    pub fn rank(&self, threshold: T) -> usize {
        let mut a = self.clone();
        let scale = a.max_abs();
        if scale == T::zero() {
            return 0;
        }
        let cutoff = threshold * scale;
        let (m, n) = (a.rows, a.cols);
        let mut rank = 0;
        let mut col_perm: Vec<usize> = (0..n).collect();
        for k in 0..m.min(n) {
            let mut best = (k, k, T::zero());
            for i in k..m {
                for j in k..n {
                    let v = a[(i, col_perm[j])].abs();
                    if v > best.2 {
                        best = (i, j, v);
                    }
                }
            }
            if best.2 <= cutoff {
                break;
            }
            a.swap_rows(k, best.0);
            col_perm.swap(k, best.1);
            let pc = col_perm[k];
            let pivot = a[(k, pc)];
            for i in k + 1..m {
                let factor = a[(i, pc)] / pivot;
                for &c in &col_perm[k..] {
                    a[(i, c)] = a[(i, c)] - factor * a[(k, c)];
                }
            }
            rank += 1;
        }
        rank
    }

    /// Solves `self * x = b` for square `self` with partial pivoting.
    /// Returns `None` when a pivot vanishes.
    pub fn solve(&self, b: &[T]) -> Option<Vec<T>> {
        assert_eq!(self.rows, self.cols);
        assert_eq!(self.rows, b.len());
        let n = self.rows;
        let mut a = self.clone();
        let mut x = b.to_vec();
        for k in 0..n {
            let (p, pivot) = (k..n)
                .map(|i| (i, a[(i, k)].abs()))
                .fold((k, T::zero()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot == T::zero() || !pivot.is_finite() {
                return None;
            }
            a.swap_rows(p, k);
            x.swap(p, k);
            let akk = a[(k, k)];
            for i in k + 1..n {
                let factor = a[(i, k)] / akk;
                for j in k..n {
                    a[(i, j)] = a[(i, j)] - factor * a[(k, j)];
                }
                x[i] = x[i] - factor * x[k];
            }
        }
        for k in (0..n).rev() {
            let mut s = x[k];
            for j in k + 1..n {
                s = s - a[(k, j)] * x[j];
            }
            x[k] = s / a[(k, k)];
        }
        x.iter().all(|v| v.is_finite()).then_some(x)
    }

    /// One-sided Jacobi SVD.
    ///
    /// Returns the singular values (one per column, unsorted, so columns
    /// beyond the rank carry zeros) and the right singular vectors as the
    /// columns of `v`.
    pub fn svd_jacobi(&self) -> Svd<T> {
        let (m, n) = (self.rows, self.cols);
        // Columns of `u` are stored contiguously.
        let mut u: Vec<Vec<T>> = (0..n).map(|j| self.column(j)).collect();
        let mut v: Vec<Vec<T>> = (0..n)
            .map(|j| {
                let mut e = vec![T::zero(); n];
                e[j] = T::one();
                e
            })
            .collect();
        let eps = T::epsilon();
        for _sweep in 0..80 {
            let mut rotated = false;
            for p in 0..n {
                for q in p + 1..n {
                    let alpha = dot(&u[p], &u[p]);
                    let beta = dot(&u[q], &u[q]);
                    let gamma = dot(&u[p], &u[q]);
                    if gamma == T::zero() || gamma.abs() <= eps * (alpha * beta).sqrt() {
                        continue;
                    }
                    rotated = true;
                    let zeta = (beta - alpha) / (T::lit(2.0) * gamma);
                    let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                    let c = T::one() / (T::one() + t * t).sqrt();
                    let s = c * t;
                    for i in 0..m {
                        let (up, uq) = (u[p][i], u[q][i]);
                        u[p][i] = c * up - s * uq;
                        u[q][i] = s * up + c * uq;
                    }
                    for i in 0..n {
                        let (vp, vq) = (v[p][i], v[q][i]);
                        v[p][i] = c * vp - s * vq;
                        v[q][i] = s * vp + c * vq;
                    }
                }
            }
            if !rotated {
                break;
            }
        }
        let singular = u.iter().map(|c| norm(c)).collect();
        Svd {
            singular,
            v: Matrix::from_columns(&v),
        }
    }

    /// Matrix exponential by scaling and squaring with a Taylor core.
    pub fn expm(&self) -> Self {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let norm1 = (0..n)
            .map(|j| (0..n).map(|i| self[(i, j)].abs()).sum::<T>())
            .fold(T::zero(), T::max);
        let mut squarings = 0u32;
        let mut scale = T::one();
        while norm1 * scale > T::lit(0.25) {
            scale = scale * T::lit(0.5);
            squarings += 1;
        }
        let a = self.scaled(scale);
        let mut result = Self::identity(n);
        let mut term = Self::identity(n);
        for k in 1..=24 {
            term = term.matmul(&a).scaled(T::one() / T::from_count(k));
            result = result.add(&term);
            if term.max_abs() <= T::epsilon() * T::lit(1e-2) {
                break;
            }
        }
        for _ in 0..squarings {
            result = result.matmul(&result);
        }
        result
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// Result of [`Matrix::svd_jacobi`].
#[derive(Debug, Clone)]
pub struct Svd<T> {
    pub singular: Vec<T>,
    pub v: Matrix<T>,
}

impl<T: Real> Svd<T> {
    /// Column indices ordered by ascending singular value.
    pub fn ascending(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.singular.len()).collect();
        idx.sort_by(|&a, &b| {
            self.singular[a]
                .partial_cmp(&self.singular[b])
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        idx
    }

    /// Right singular vector for the smallest singular value, with that value.
    pub fn smallest(&self) -> (Vec<T>, T) {
        let j = self.ascending()[0];
        (self.v.column(j), self.singular[j])
    }
}

#[inline]
pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

#[inline]
pub fn norm<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

pub fn sub<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

pub fn scale<T: Real>(a: &[T], s: T) -> Vec<T> {
    a.iter().map(|&x| x * s).collect()
}

/// `y += a * x`
pub fn axpy<T: Real>(a: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi = *yi + a * xi;
    }
}

/// Weighted sum `sum_i w_i * v_i` of equally sized vectors.
pub fn combine<T: Real, V: AsRef<[T]>>(weights: &[T], vectors: &[V]) -> Vec<T> {
    let d = vectors.first().map_or(0, |v| v.as_ref().len());
    let mut out = vec![T::zero(); d];
    for (&w, v) in weights.iter().zip(vectors) {
        axpy(w, v.as_ref(), &mut out);
    }
    out
}

/// Modified Gram-Schmidt with one re-orthogonalization pass.
///
/// Vectors whose residual norm falls to `tol` times their original norm are
/// treated as dependent and dropped.
pub fn gram_schmidt<T: Real>(vectors: &[Vec<T>], tol: T) -> Vec<Vec<T>> {
    let mut basis: Vec<Vec<T>> = Vec::new();
    for v in vectors {
        let original = norm(v);
        if original == T::zero() {
            continue;
        }
        let mut w = v.clone();
        for _pass in 0..2 {
            for b in &basis {
                let c = dot(&w, b);
                axpy(-c, b, &mut w);
            }
        }
        let n = norm(&w);
        if n > tol * original {
            basis.push(scale(&w, T::one() / n));
        }
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn determinant_matches_cofactor_expansion() {
        let m = Matrix::from_rows(&[[2.0, -1.0, 0.5], [1.0, 3.0, -2.0], [0.0, 4.0, 1.0]]);
        let cofactor = 2.0 * (3.0 * 1.0 - (-2.0) * 4.0) - -(1.0 * 1.0 - 0.0)
            + 0.5 * (1.0 * 4.0 - 0.0);
        assert_relative_eq!(m.determinant(), cofactor, epsilon = 1e-14);
    }

    #[test]
    fn svd_finds_exact_kernel() {
        let a: Matrix<f64> =
            Matrix::from_columns(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [-1.0, -1.0, 0.0]]);
        let svd = a.svd_jacobi();
        let (v, s) = svd.smallest();
        assert!(s < 1e-15);
        let av = a.mul_vec(&v);
        assert!(norm(&av) < 1e-15);
        assert_relative_eq!(v[0] / v[2], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn svd_singular_values_of_diagonal() {
        let a = Matrix::from_rows(&[[3.0f64, 0.0], [0.0, -2.0]]);
        let mut s = a.svd_jacobi().singular;
        s.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_relative_eq!(s[0], 2.0);
        assert_relative_eq!(s[1], 3.0);
    }

    #[test]
    fn rank_detects_dependence() {
        let a = Matrix::from_rows(&[[1.0f64, 2.0, 3.0], [2.0, 4.0, 6.0], [1.0, 0.0, 1.0]]);
        assert_eq!(a.rank(1e-10), 2);
        assert_eq!(Matrix::<f64>::identity(4).rank(1e-10), 4);
        assert_eq!(Matrix::<f64>::zeros(2, 3).rank(1e-10), 0);
    }

    #[test]
    fn solve_roundtrip() {
        let a = Matrix::from_rows(&[[4.0f64, 1.0], [2.0, 3.0]]);
        let x = a.solve(&[1.0, 2.0]).unwrap();
        let b = a.mul_vec(&x);
        assert_relative_eq!(b[0], 1.0, epsilon = 1e-14);
        assert_relative_eq!(b[1], 2.0, epsilon = 1e-14);
        assert!(Matrix::from_rows(&[[1.0f64, 2.0], [2.0, 4.0]])
            .solve(&[1.0, 1.0])
            .is_none());
    }

    #[test]
    fn expm_of_planar_skew_is_rotation() {
        let t = 2.3f64;
        let a = Matrix::from_rows(&[[0.0, -t], [t, 0.0]]);
        let e = a.expm();
        assert_relative_eq!(e[(0, 0)], t.cos(), epsilon = 1e-13);
        assert_relative_eq!(e[(1, 0)], t.sin(), epsilon = 1e-13);
    }

    #[test]
    fn gram_schmidt_drops_dependent() {
        let basis = gram_schmidt(
            &[vec![1.0f64, 1.0, 0.0], vec![2.0, 2.0, 0.0], vec![0.0, 1.0, 0.0]],
            1e-10,
        );
        assert_eq!(basis.len(), 2);
        assert!(dot(&basis[0], &basis[1]).abs() < 1e-15);
    }

    #[test]
    fn works_in_single_precision() {
        let m = Matrix::from_rows(&[[1.0f32, 2.0], [3.0, 4.0]]);
        assert!((m.determinant() + 2.0).abs() < 1e-5);
    }
}
