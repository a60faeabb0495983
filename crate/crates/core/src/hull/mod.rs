//! Origin-in-convex-hull decisions with certificates.
//!
//! [`contains_origin`] runs Wolfe's min-norm-point procedure. An inside
//! verdict carries convex weights whose combination is (numerically) zero;
//! an outside verdict carries a unit separator `s` with `<s, p_i> >= margin > 0`
//! for every point.

mod search;

pub use search::{min_diameter_search, DiameterSearch, DiameterSearchOptions};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{combine, dot, norm, Matrix};
use crate::scalar::Real;

/// Default relative tolerance; the absolute threshold is this times the
/// largest point norm.
pub const DEFAULT_HULL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Inside,
    Outside,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HullVerdict<T> {
    pub verdict: Verdict,
    /// Convex weights, one per input point (inside only).
    pub lambdas: Option<Vec<T>>,
    /// Unit separating direction (outside only).
    pub separator: Option<Vec<T>>,
    /// `min_i <separator, p_i>` (outside only).
    pub margin: Option<T>,
    pub min_norm_point: Vec<T>,
    pub iterations: usize,
}

impl<T: Real> HullVerdict<T> {
    pub fn is_inside(&self) -> bool {
        self.verdict == Verdict::Inside
    }

    /// `||sum lambda_i p_i||` for inside verdicts.
    pub fn residual<V: AsRef<[T]>>(&self, points: &[V]) -> Option<T> {
        self.lambdas.as_ref().map(|l| norm(&combine(l, points)))
    }
}

/// Decides whether `0` lies in the convex hull of `points`.
///
/// `tol` is relative to the largest point norm. Returns
/// [`Error::IterationLimit`] if the procedure stalls without a certificate.
pub fn contains_origin<T: Real, V: AsRef<[T]>>(points: &[V], tol: T) -> Result<HullVerdict<T>> {
    let m = points.len();
    if m == 0 {
        return Err(Error::TooFewPoints { needed: 1, got: 0 });
    }
    let d = points[0].as_ref().len();
    let pts: Vec<&[T]> = points.iter().map(|p| p.as_ref()).collect();
    for p in &pts {
        if p.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: p.len(),
            });
        }
        if p.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("non-finite coordinate".into()));
        }
    }
    let norms: Vec<T> = pts.iter().map(|p| norm(p)).collect();
    let scale = norms.iter().copied().fold(T::zero(), T::max);
    let start = (0..m)
        .min_by(|&a, &b| norms[a].partial_cmp(&norms[b]).unwrap().then(a.cmp(&b)))
        .unwrap();
    if scale == T::zero() {
        let mut lambdas = vec![T::zero(); m];
        lambdas[start] = T::one();
        return Ok(inside(lambdas, vec![T::zero(); d], 0));
    }
    let tol_abs = tol * scale;
    let opt_eps = T::lit(1e-12).max(T::epsilon() * T::lit(16.0));

    let mut corral: Vec<usize> = vec![start];
    let mut weights: Vec<T> = vec![T::one()];
    let mut x: Vec<T> = pts[start].to_vec();
    let max_major = 50 * (m + d) + 100;
    let mut iterations = 0;

    for _major in 0..max_major {
        iterations += 1;
        let xn = norm(&x);
        if xn <= tol_abs {
            return Ok(inside(scatter(m, &corral, &weights), x, iterations));
        }
        let (j, best) = (0..m)
            .map(|i| (i, dot(&x, pts[i])))
            .fold((0, T::infinity()), |acc, cur| if cur.1 < acc.1 { cur } else { acc });
        let gap = xn * xn - best;
        if gap <= opt_eps * xn * scale || corral.contains(&j) {
            return outside(&pts, x, iterations, gap);
        }
        corral.push(j);
        weights.push(T::zero());

        // Minor cycle: move to the affine minimizer of the corral, clipping
        // at the boundary of the simplex of weights.
        for _minor in 0..(2 * m + 10) {
            let alpha = match affine_minimizer(&pts, &corral) {
                Some(a) => a,
                None => {
                    // Affinely dependent corral: drop the lightest old point.
                    let drop = (0..corral.len() - 1)
                        .min_by(|&a, &b| weights[a].partial_cmp(&weights[b]).unwrap())
                        .unwrap_or(0);
                    corral.remove(drop);
                    weights.remove(drop);
                    renormalize(&mut weights);
                    continue;
                }
            };
            if alpha.iter().all(|&a| a > T::zero()) {
                weights = alpha;
                break;
            }
            let mut theta = T::one();
            for (w, a) in weights.iter().zip(&alpha) {
                if *a <= T::zero() {
                    let denom = *w - *a;
                    if denom > T::zero() {
                        theta = theta.min(*w / denom);
                    } else {
                        theta = T::zero();
                    }
                }
            }
            for (w, a) in weights.iter_mut().zip(&alpha) {
                *w = theta * *a + (T::one() - theta) * *w;
            }
            // Remove the blocking points.
            let mut keep_c = Vec::with_capacity(corral.len());
            let mut keep_w = Vec::with_capacity(corral.len());
            let floor = T::epsilon() * T::lit(4.0);
            for (&c, &w) in corral.iter().zip(&weights) {
                if w > floor {
                    keep_c.push(c);
                    keep_w.push(w);
                }
            }
            if keep_c.is_empty() {
                // Cannot happen for a convex combination; keep the heaviest.
                let idx = argmax(&weights);
                keep_c.push(corral[idx]);
                keep_w.push(T::one());
            }
            corral = keep_c;
            weights = keep_w;
            renormalize(&mut weights);
        }
        let sel: Vec<&[T]> = corral.iter().map(|&i| pts[i]).collect();
        x = combine(&weights, &sel);
    }
    let xn = norm(&x);
    if xn <= tol_abs {
        return Ok(inside(scatter(m, &corral, &weights), x, iterations));
    }
    outside(&pts, x, iterations, xn)
}

fn inside<T: Real>(lambdas: Vec<T>, x: Vec<T>, iterations: usize) -> HullVerdict<T> {
    HullVerdict {
        verdict: Verdict::Inside,
        lambdas: Some(lambdas),
        separator: None,
        margin: None,
        min_norm_point: x,
        iterations,
    }
}

fn outside<T: Real>(pts: &[&[T]], x: Vec<T>, iterations: usize, gap: T) -> Result<HullVerdict<T>> {
    let xn = norm(&x);
    let s: Vec<T> = x.iter().map(|&v| v / xn).collect();
    let margin = pts
        .iter()
        .map(|p| dot(&s, p))
        .fold(T::infinity(), T::min);
    if !(margin > T::zero()) {
        return Err(Error::IterationLimit {
            gap: gap.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(HullVerdict {
        verdict: Verdict::Outside,
        lambdas: None,
        separator: Some(s),
        margin: Some(margin),
        min_norm_point: x,
        iterations,
    })
}

fn scatter<T: Real>(m: usize, corral: &[usize], weights: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); m];
    for (&c, &w) in corral.iter().zip(weights) {
        out[c] = w;
    }
    let total: T = out.iter().copied().sum();
    out.iter_mut().for_each(|w| *w = *w / total);
    out
}

fn renormalize<T: Real>(w: &mut [T]) {
    let total: T = w.iter().copied().sum();
    if total > T::zero() {
        w.iter_mut().for_each(|x| *x = *x / total);
    }
}

fn argmax<T: Real>(w: &[T]) -> usize {
    (0..w.len())
        .max_by(|&a, &b| w[a].partial_cmp(&w[b]).unwrap())
        .unwrap_or(0)
}

/// Weights `alpha` (summing to one) of the point of minimum norm in the
/// affine hull of the selected points, from the bordered Gram system.
fn affine_minimizer<T: Real>(pts: &[&[T]], corral: &[usize]) -> Option<Vec<T>> {
    let k = corral.len();
    if k == 1 {
        return Some(vec![T::one()]);
    }
    let mut a = Matrix::zeros(k + 1, k + 1);
    for i in 0..k {
        for j in 0..k {
            a[(i, j)] = dot(pts[corral[i]], pts[corral[j]]);
        }
        a[(i, k)] = T::one();
        a[(k, i)] = T::one();
    }
    let mut rhs = vec![T::zero(); k + 1];
    rhs[k] = T::one();
    let sol = a.solve(&rhs)?;
    let alpha = sol[..k].to_vec();
    let sum: T = alpha.iter().copied().sum();
    if !sum.is_finite() || (sum - T::one()).abs() > T::lit(1e-6) {
        return None;
    }
    Some(alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn triangle_inside() {
        let pts = [[1.0, 0.0], [0.0, 1.0], [-1.0, -1.0]];
        let v = contains_origin(&pts, 1e-9).unwrap();
        assert!(v.is_inside());
        let l = v.lambdas.clone().unwrap();
        for w in &l {
            assert_relative_eq!(*w, 1.0 / 3.0, epsilon = 1e-12);
        }
        assert!(v.residual(&pts).unwrap() <= 1e-12);
    }

    #[test]
    fn orthant_outside() {
        let pts = [[1.0, 0.0], [0.0, 1.0]];
        let v = contains_origin(&pts, 1e-9).unwrap();
        assert_eq!(v.verdict, Verdict::Outside);
        let s = v.separator.unwrap();
        let r = 1.0 / 2f64.sqrt();
        assert_relative_eq!(s[0], r, epsilon = 1e-12);
        assert_relative_eq!(s[1], r, epsilon = 1e-12);
        assert_relative_eq!(v.margin.unwrap(), r, epsilon = 1e-12);
    }

    #[test]
    fn antipodal_pair_inside() {
        let pts = [[0.3, -0.4, 0.5], [-0.3, 0.4, -0.5]];
        let v = contains_origin(&pts, 1e-9).unwrap();
        assert!(v.is_inside());
        let l = v.lambdas.unwrap();
        assert_relative_eq!(l[0], 0.5, epsilon = 1e-12);
        assert_relative_eq!(l[1], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn single_point() {
        let v = contains_origin(&[[2.0, 0.0]], 1e-9).unwrap();
        assert_eq!(v.verdict, Verdict::Outside);
        let z = contains_origin(&[[0.0, 0.0]], 1e-9).unwrap();
        assert!(z.is_inside());
    }

    #[test]
    fn offset_triangle_outside_segment_inside() {
        let pts = [[1.0, 1.0], [-1.0, 1.0], [0.0, 3.0]];
        let v = contains_origin(&pts, 1e-9).unwrap();
        assert_eq!(v.verdict, Verdict::Outside);
        let seg = [[1.0, 0.0], [-2.0, 0.0], [0.0, 1.0]];
        assert!(contains_origin(&seg, 1e-9).unwrap().is_inside());
    }

    #[test]
    fn errors() {
        let empty: [[f64; 2]; 0] = [];
        assert!(contains_origin(&empty, 1e-9).is_err());
        assert!(matches!(
            contains_origin(&[vec![1.0, 0.0], vec![1.0]], 1e-9),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn single_precision() {
        let pts = [[1.0f32, 0.0], [0.0, 1.0], [-1.0, -1.0]];
        assert!(contains_origin(&pts, 1e-5).unwrap().is_inside());
    }
}
