//! The involution of the regular simplex and the subgroup it fixes.

use crate::error::{Error, Result};
use crate::geometry::{regular_simplex, SpherePoint};
use crate::linalg::{dot, gram_schmidt, Matrix};

/// Regular `n`-simplex in `S(R^n)` with `n = 2^r + s`, the involution `tau`
/// swapping `v_i` and `v_{i+s}` for `i < s`, and orthonormal bases of its
/// `+1` and `-1` eigenspaces.
#[derive(Debug, Clone)]
pub struct SimplexProblem {
    pub n: usize,
    pub r: usize,
    pub s: usize,
    pub vertices: Vec<SpherePoint<f64>>,
    /// `tau` as a permutation of vertex indices.
    pub tau: Vec<usize>,
    /// Orthonormal basis of `V_+`, `2^r` vectors.
    pub plus: Vec<Vec<f64>>,
    /// Orthonormal basis of `V_-`, `s` vectors.
    pub minus: Vec<Vec<f64>>,
}

pub fn build_simplex_problem(n: usize) -> Result<SimplexProblem> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("simplex problem needs n >= 2, got {n}")));
    }
    let r = usize::BITS as usize - 1 - n.leading_zeros() as usize;
    let s = n - (1 << r);
    let vertices = regular_simplex::<f64>(n)?;
    let v = |i: usize| vertices[i].coords();

    let tau: Vec<usize> = (0..=n)
        .map(|i| if i < s { i + s } else if i < 2 * s { i - s } else { i })
        .collect();
    let mut span_plus: Vec<Vec<f64>> = (0..s)
        .map(|i| v(i).iter().zip(v(i + s)).map(|(a, b)| a + b).collect())
        .collect();
    span_plus.extend((2 * s..=n).map(|i| v(i).to_vec()));
    let plus = gram_schmidt(&span_plus, 1e-10);
    let span_minus: Vec<Vec<f64>> = (0..s)
        .map(|i| v(i).iter().zip(v(i + s)).map(|(a, b)| a - b).collect())
        .collect();
    let minus = gram_schmidt(&span_minus, 1e-10);
    if plus.len() != 1 << r || minus.len() != s {
        return Err(Error::Numerical(format!(
            "eigenspace dimensions {} and {} (expected {} and {s})",
            plus.len(),
            minus.len(),
            1 << r
        )));
    }
    Ok(SimplexProblem {
        n,
        r,
        s,
        vertices,
        tau,
        plus,
        minus,
    })
}

impl SimplexProblem {
    /// `(g, 1)` on `R^n = V_+ + V_-` for `g` in `SO(V_+)` given in the
    /// `plus` basis.
    pub fn embed(&self, g: &Matrix<f64>) -> Matrix<f64> {
        let n = self.n;
        let mut out = Matrix::zeros(n, n);
        let m = self.plus.len();
        for row in 0..n {
            for col in 0..n {
                let mut acc = 0.0;
                for a in 0..m {
                    for b in 0..m {
                        acc += self.plus[a][row] * g[(a, b)] * self.plus[b][col];
                    }
                }
                for u in &self.minus {
                    acc += u[row] * u[col];
                }
                out[(row, col)] = acc;
            }
        }
        out
    }

    /// `tau` as an orthogonal matrix of `R^n`: `I - 2 P_-`.
    pub fn tau_matrix(&self) -> Matrix<f64> {
        Matrix::identity(self.n).add(&self.minus_projector().scaled(-2.0))
    }

    fn minus_projector(&self) -> Matrix<f64> {
        let n = self.n;
        let mut p = Matrix::zeros(n, n);
        for u in &self.minus {
            for i in 0..n {
                for j in 0..n {
                    p[(i, j)] += u[i] * u[j];
                }
            }
        }
        p
    }

    /// `(T mu)_i = mu_{tau(i)}`.
    pub fn t_permute(&self, mu: &[f64]) -> Vec<f64> {
        self.tau.iter().map(|&j| mu[j]).collect()
    }

    pub fn moved_vertices(&self, g: &Matrix<f64>) -> Vec<Vec<f64>> {
        let full = self.embed(g);
        self.vertices.iter().map(|v| full.mul_vec(v.coords())).collect()
    }

    /// Largest `|<u, w>|` between the two eigenspace bases.
    pub fn eigenspace_overlap(&self) -> f64 {
        self.plus
            .iter()
            .flat_map(|u| self.minus.iter().map(move |w| dot(u, w).abs()))
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_of_two() {
        let p = build_simplex_problem(4).unwrap();
        assert_eq!((p.r, p.s), (2, 0));
        assert_eq!(p.tau, vec![0, 1, 2, 3, 4]);
        assert_eq!(p.plus.len(), 4);
        assert!(p.minus.is_empty());
    }

    #[test]
    fn three_and_five() {
        let p = build_simplex_problem(3).unwrap();
        assert_eq!((p.r, p.s, p.plus.len(), p.minus.len()), (1, 1, 2, 1));
        assert_eq!(p.tau, vec![1, 0, 2, 3]);
        let d: Vec<f64> = p.vertices[0].coords().iter().zip(p.vertices[1].coords()).map(|(a, b)| a - b).collect();
        let c = dot(&d, &p.minus[0]).abs() / crate::linalg::norm(&d);
        assert!((c - 1.0).abs() < 1e-12);
        assert!(p.eigenspace_overlap() < 1e-12);
        let q = build_simplex_problem(5).unwrap();
        assert_eq!((q.r, q.s, q.plus.len()), (2, 1, 4));
    }

    #[test]
    fn tau_is_involution_on_vertices() {
        for n in 2..=9 {
            let p = build_simplex_problem(n).unwrap();
            for i in 0..=n {
                assert_eq!(p.tau[p.tau[i]], i);
            }
            let t = p.tau_matrix();
            for i in 0..=n {
                let img = t.mul_vec(p.vertices[i].coords());
                let target = p.vertices[p.tau[i]].coords();
                let err: f64 = img.iter().zip(target).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                assert!(err < 1e-12, "n={n} i={i}");
            }
        }
    }
}
