//! Charts on `SO(2^r)` and the subgroups used by the solvers.

use crate::circle::GroupBase;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub enum Chart {
    /// `SO(1)`, the trivial group.
    Identity,
    /// Rotation of the plane by an angle.
    Angle(f64),
    /// Left multiplication by the unit quaternion `exp(p)` for a pure
    /// quaternion `p = (p1, p2, p3)`.
    Quaternion([f64; 3]),
    /// `exp(A)` for the skew matrix with the given strictly upper entries,
    /// row by row.
    SkewExp(Vec<f64>),
}

/// An element of `SO(2^r)` with its cached matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    r: usize,
    chart: Chart,
    matrix: Matrix<f64>,
}

/// `N (N - 1) / 2` for `N = 2^r`.
pub fn skew_dim(r: usize) -> usize {
    let n = 1usize << r;
    n * (n - 1) / 2
}

impl GroupElement {
    pub fn identity(r: usize) -> Self {
        let chart = match r {
            0 => Chart::Identity,
            1 => Chart::Angle(0.0),
            _ => Chart::SkewExp(vec![0.0; skew_dim(r)]),
        };
        Self {
            r,
            chart,
            matrix: Matrix::identity(1 << r),
        }
    }

    pub fn from_angle(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self {
            r: 1,
            chart: Chart::Angle(theta),
            matrix: Matrix::from_rows(&[[c, -s], [s, c]]),
        }
    }

    /// Unit quaternion `exp(p) = (cos|p|, sin|p| p/|p|)`.
    pub fn from_quaternion_log(p: [f64; 3]) -> Self {
        let q = quaternion_exp(p);
        Self {
            r: 2,
            chart: Chart::Quaternion(p),
            matrix: left_multiplication(q),
        }
    }

    pub fn from_skew(r: usize, upper: &[f64]) -> Result<Self> {
        if upper.len() != skew_dim(r) {
            return Err(Error::DimensionMismatch {
                expected: skew_dim(r),
                found: upper.len(),
            });
        }
        Ok(Self {
            r,
            chart: Chart::SkewExp(upper.to_vec()),
            matrix: skew_matrix(r, upper).expm(),
        })
    }

    /// Rebuilds an element from the chart name and parameters.
    pub fn from_parts(r: usize, chart: &str, params: &[f64]) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("chart {chart} does not fit r={r} with {} parameters", params.len()));
        match (chart, r) {
            ("identity", _) if params.is_empty() => Ok(Self::identity(r)),
            ("angle", 1) if params.len() == 1 => Ok(Self::from_angle(params[0])),
            ("quaternion", 2) if params.len() == 3 => Ok(Self::from_quaternion_log([params[0], params[1], params[2]])),
            ("skew-exp", _) => Self::from_skew(r, params),
            _ => Err(bad()),
        }
    }

    pub fn from_base(base: &GroupBase) -> Result<Self> {
        Self::from_parts(base.r, &base.chart, &base.params)
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn matrix(&self) -> &Matrix<f64> {
        &self.matrix
    }

    pub fn chart_name(&self) -> &'static str {
        match self.chart {
            Chart::Identity => "identity",
            Chart::Angle(_) => "angle",
            Chart::Quaternion(_) => "quaternion",
            Chart::SkewExp(_) => "skew-exp",
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match &self.chart {
            Chart::Identity => Vec::new(),
            Chart::Angle(t) => vec![*t],
            Chart::Quaternion(p) => p.to_vec(),
            Chart::SkewExp(v) => v.clone(),
        }
    }

    /// The unit quaternion, for quaternion charts.
    pub fn quaternion(&self) -> Option<[f64; 4]> {
        match self.chart {
            Chart::Quaternion(p) => Some(quaternion_exp(p)),
            _ => None,
        }
    }

    /// `||g^T g - I||_F`.
    pub fn orthogonality_defect(&self) -> f64 {
        let n = self.matrix.rows();
        self.matrix
            .transpose()
            .matmul(&self.matrix)
            .distance(&Matrix::identity(n))
    }

    pub fn to_base(&self) -> GroupBase {
        let n = self.matrix.rows();
        GroupBase {
            r: self.r,
            chart: self.chart_name().into(),
            params: self.params(),
            matrix: (0..n).flat_map(|i| self.matrix.row(i).to_vec()).collect(),
        }
    }
}

fn quaternion_exp(p: [f64; 3]) -> [f64; 4] {
    let t = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
    if t == 0.0 {
        return [1.0, 0.0, 0.0, 0.0];
    }
    let s = t.sin() / t;
    [t.cos(), s * p[0], s * p[1], s * p[2]]
}

/// Matrix of `x -> q x` on `H = R^4` with basis `1, i, j, k`.
pub fn left_multiplication(q: [f64; 4]) -> Matrix<f64> {
    let [a, b, c, d] = q;
    Matrix::from_rows(&[
        [a, -b, -c, -d],
        [b, a, -d, c],
        [c, d, a, -b],
        [d, -c, b, a],
    ])
}

fn skew_matrix(r: usize, upper: &[f64]) -> Matrix<f64> {
    let n = 1 << r;
    let mut a = Matrix::zeros(n, n);
    let mut idx = 0;
    for i in 0..n {
        for j in i + 1..n {
            a[(i, j)] = upper[idx];
            a[(j, i)] = -upper[idx];
            idx += 1;
        }
    }
    a
}

/// `g` acting on each consecutive block of `g.rows()` coordinates.
pub fn diagonal_action(g: &Matrix<f64>, v: &[f64]) -> Result<Vec<f64>> {
    let b = g.rows();
    if !v.len().is_multiple_of(b) {
        return Err(Error::DimensionMismatch {
            expected: b * (v.len() / b + 1),
            found: v.len(),
        });
    }
    Ok(v.chunks_exact(b).flat_map(|c| g.mul_vec(c)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn charts_are_special_orthogonal() {
        let elems = [
            GroupElement::identity(0),
            GroupElement::from_angle(0.7),
            GroupElement::from_quaternion_log([0.3, -1.2, 0.5]),
            GroupElement::from_skew(2, &[0.1, 0.2, -0.3, 0.4, 0.5, -0.6]).unwrap(),
            GroupElement::from_skew(3, &(0..28).map(|i| (i as f64 * 0.37).sin()).collect::<Vec<_>>()).unwrap(),
        ];
        for g in &elems {
            assert!(g.orthogonality_defect() < 1e-10, "{:?}", g.chart());
            assert!((g.matrix().determinant() - 1.0).abs() < 1e-10);
            let back = GroupElement::from_base(&g.to_base()).unwrap();
            assert!(back.matrix().distance(g.matrix()) < 1e-14);
        }
    }

    #[test]
    fn unit_quaternion() {
        let g = GroupElement::from_quaternion_log([0.2, 0.4, -0.1]);
        let q = g.quaternion().unwrap();
        let n: f64 = q.iter().map(|x| x * x).sum();
        assert!((n - 1.0).abs() < 1e-15);
    }

    #[test]
    fn angle_matches_skew() {
        let a = GroupElement::from_angle(0.4);
        let b = GroupElement::from_skew(1, &[-0.4]).unwrap();
        assert!(a.matrix().distance(b.matrix()) < 1e-14);
    }
}
