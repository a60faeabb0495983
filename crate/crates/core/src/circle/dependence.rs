//! Linear dependences, sign splitting, and Carathéodory pruning.

use crate::error::{Error, Result};
use crate::geometry::Sign;
use crate::linalg::{combine, norm, Matrix};
use crate::scalar::Real;

/// Relative level below which a singular value counts as an exact zero.
const NULL_LEVEL: f64 = 1e-10;

/// Coefficients `mu` with `sum_i mu_i c_i ~ 0` and `sum |mu_i| = 1`.
///
/// The direction is the right singular vector of the smallest singular
/// value of the column matrix. Fails with [`Error::IllConditioned`] when the
/// two smallest singular values are within `gap_tol * sigma_max` of each
/// other but the second is not itself negligible; a kernel of dimension two
/// or more (all such values below `1e-10 * sigma_max`) is not ambiguous for
/// our purposes and yields a deterministic member of the kernel.
///
/// The sign is fixed so that the entry of largest magnitude (lowest index on
/// ties) is positive.
pub fn dependence_coefficients<T: Real, V: AsRef<[T]>>(columns: &[V], gap_tol: T) -> Result<Vec<T>> {
    if columns.is_empty() {
        return Err(Error::TooFewPoints { needed: 1, got: 0 });
    }
    let d = columns[0].as_ref().len();
    for c in columns {
        if c.as_ref().len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: c.as_ref().len(),
            });
        }
    }
    let a = Matrix::from_columns(columns);
    let svd = a.svd_jacobi();
    let order = svd.ascending();
    let smax = svd.singular[*order.last().unwrap()];
    if order.len() >= 2 {
        let s0 = svd.singular[order[0]];
        let s1 = svd.singular[order[1]];
        if s1 > T::lit(NULL_LEVEL) * smax && s1 - s0 <= gap_tol * smax {
            return Err(Error::IllConditioned {
                s0: s0.to_f64().unwrap_or(f64::NAN),
                s1: s1.to_f64().unwrap_or(f64::NAN),
            });
        }
    }
    let (mut mu, _) = svd.smallest();
    normalize_l1(&mut mu)?;
    Ok(mu)
}

fn normalize_l1<T: Real>(mu: &mut [T]) -> Result<()> {
    let l1: T = mu.iter().map(|x| x.abs()).sum();
    if !(l1 > T::zero()) || !l1.is_finite() {
        return Err(Error::Numerical("null vector vanished".into()));
    }
    let lead = (0..mu.len())
        .fold(0, |best, i| if mu[i].abs() > mu[best].abs() { i } else { best });
    let s = if mu[lead] < T::zero() { -l1 } else { l1 };
    mu.iter_mut().for_each(|x| *x = *x / s);
    Ok(())
}

/// Splits `mu` into weights `|mu_i|` and signs, with `+1` at zero entries.
pub fn split_signs<T: Real>(mu: &[T]) -> (Vec<T>, Vec<Sign>) {
    mu.iter().map(|&m| (m.abs(), Sign::of(m))).unzip()
}

/// Output of [`caratheodory_reduce`].
#[derive(Debug, Clone, PartialEq)]
pub struct Reduced<T> {
    /// Indices into the input, ascending.
    pub indices: Vec<usize>,
    /// Convex weights for the kept points, strictly positive.
    pub lambdas: Vec<T>,
}

/// Prunes a zero convex combination to an affinely independent support.
///
/// Repeatedly finds an affine dependence `sum mu_y y = 0, sum mu_y = 0` of the
/// current support and moves the weights along it until one vanishes. The
/// result has at most `d + 1` points and its augmented matrix `[y; 1]` has
/// full column rank at pivot threshold `1e-10`.
pub fn caratheodory_reduce<T: Real, V: AsRef<[T]>>(
    points: &[V],
    lambdas: &[T],
    tol: T,
) -> Result<Reduced<T>> {
    if points.len() != lambdas.len() {
        return Err(Error::DimensionMismatch {
            expected: points.len(),
            found: lambdas.len(),
        });
    }
    if points.is_empty() {
        return Err(Error::TooFewPoints { needed: 1, got: 0 });
    }
    let scale = points
        .iter()
        .map(|p| norm(p.as_ref()))
        .fold(T::zero(), T::max)
        .max(T::min_positive_value());
    let sum: T = lambdas.iter().copied().sum();
    if lambdas.iter().any(|&l| l < T::zero()) || (sum - T::one()).abs() > T::lit(1e-9) {
        return Err(Error::Numerical("weights are not a convex combination".into()));
    }
    let residual = norm(&combine(lambdas, points));
    if residual > tol * scale {
        return Err(Error::ResidualExceeded {
            residual: residual.to_f64().unwrap_or(f64::NAN),
            tol: (tol * scale).to_f64().unwrap_or(f64::NAN),
        });
    }

    let mut support: Vec<usize> = (0..points.len()).filter(|&i| lambdas[i] > T::zero()).collect();
    let mut weights: Vec<T> = support.iter().map(|&i| lambdas[i]).collect();
    let augment = |idx: &[usize]| -> Vec<Vec<T>> {
        idx.iter()
            .map(|&i| {
                let mut c = points[i].as_ref().to_vec();
                c.push(T::one());
                c
            })
            .collect()
    };

    while support.len() > 1 {
        let cols = augment(&support);
        let m = Matrix::from_columns(&cols);
        if m.rank(T::lit(1e-10)) == support.len() {
            break;
        }
        let (mut mu, _) = m.svd_jacobi().smallest();
        if !mu.iter().any(|&x| x > T::zero()) {
            mu.iter_mut().for_each(|x| *x = -*x);
        }
        let (drop, t) = mu
            .iter()
            .zip(&weights)
            .enumerate()
            .filter(|(_, (&m, _))| m > T::zero())
            .map(|(i, (&m, &w))| (i, w / m))
            .fold((usize::MAX, T::infinity()), |acc, cur| if cur.1 < acc.1 { cur } else { acc });
        if drop == usize::MAX {
            return Err(Error::Numerical("affine dependence has no positive entry".into()));
        }
        for (w, &m) in weights.iter_mut().zip(&mu) {
            *w = (*w - t * m).max(T::zero());
        }
        weights[drop] = T::zero();
        let floor = T::epsilon() * T::lit(16.0);
        let mut keep_s = Vec::with_capacity(support.len());
        let mut keep_w = Vec::with_capacity(support.len());
        for (&s, &w) in support.iter().zip(&weights) {
            if w > floor {
                keep_s.push(s);
                keep_w.push(w);
            }
        }
        support = keep_s;
        weights = keep_w;
        let total: T = weights.iter().copied().sum();
        weights.iter_mut().for_each(|w| *w = *w / total);
    }

    // Barycentric weights are unique on an affinely independent support;
    // re-solve them to shed drift from the elimination steps.
    if let Some(clean) = barycentric(&augment(&support)) {
        let sel: Vec<&[T]> = support.iter().map(|&i| points[i].as_ref()).collect();
        if clean.iter().all(|&w| w > T::zero())
            && norm(&combine(&clean, &sel)) <= norm(&combine(&weights, &sel))
        {
            weights = clean;
        }
    }
    Ok(Reduced {
        indices: support,
        lambdas: weights,
    })
}

/// Least-squares solution of `[y; 1] lambda = [0; 1]` via normal equations.
fn barycentric<T: Real>(aug_cols: &[Vec<T>]) -> Option<Vec<T>> {
    let a = Matrix::from_columns(aug_cols);
    let mut rhs = vec![T::zero(); a.rows()];
    *rhs.last_mut()? = T::one();
    let at = a.transpose();
    let x = at.matmul(&a).solve(&at.mul_vec(&rhs))?;
    let total: T = x.iter().copied().sum();
    Some(x.into_iter().map(|v| v / total).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exact_kernels() {
        let mu = dependence_coefficients(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [-1.0, -1.0, 0.0]], 1e-12)
            .unwrap();
        for m in &mu {
            assert_relative_eq!(*m, 1.0 / 3.0, epsilon = 1e-14);
        }
        let mu = dependence_coefficients(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [-0.5, -0.5, 0.0]], 1e-12)
            .unwrap();
        assert_relative_eq!(mu[0], 0.25, epsilon = 1e-14);
        assert_relative_eq!(mu[1], 0.25, epsilon = 1e-14);
        assert_relative_eq!(mu[2], 0.5, epsilon = 1e-14);
    }

    #[test]
    fn ambiguous_direction_rejected() {
        // singular values 1, 1e-3, 1e-3: two equal small ones
        let cols = [[1.0, 0.0, 0.0], [0.0, 1e-3, 0.0], [0.0, 0.0, 1e-3]];
        assert!(matches!(
            dependence_coefficients(&cols, 1e-12),
            Err(Error::IllConditioned { .. })
        ));
    }

    #[test]
    fn split_examples() {
        let (l, e) = split_signs(&[0.5, -0.5]);
        assert_eq!(l, vec![0.5, 0.5]);
        assert_eq!(e, vec![Sign::Plus, Sign::Minus]);
        let (l, e) = split_signs(&[1.0, 0.0, 0.0]);
        assert_eq!(l, vec![1.0, 0.0, 0.0]);
        assert_eq!(e, vec![Sign::Plus; 3]);
    }

    #[test]
    fn cross_polytope_reduces_to_pair() {
        let pts = [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]];
        let r = caratheodory_reduce(&pts, &[0.25; 4], 1e-9).unwrap();
        assert_eq!(r.indices.len(), 2);
        let (a, b) = (pts[r.indices[0]], pts[r.indices[1]]);
        assert_eq!(a[0] + b[0], 0.0);
        assert_eq!(a[1] + b[1], 0.0);
        assert_relative_eq!(r.lambdas[0], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn independent_support_unchanged() {
        let pts = [[1.0, 0.0], [0.0, 1.0], [-1.0, -1.0]];
        let third = 1.0 / 3.0;
        let r = caratheodory_reduce(&pts, &[third; 3], 1e-9).unwrap();
        assert_eq!(r.indices, vec![0, 1, 2]);
        for l in &r.lambdas {
            assert_relative_eq!(*l, third, epsilon = 1e-14);
        }
    }

    #[test]
    fn bad_input_rejected() {
        let pts = [[1.0, 0.0], [0.0, 1.0]];
        assert!(caratheodory_reduce(&pts, &[0.5, 0.5], 1e-9).is_err());
    }
}
