use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::SpherePoint;

/// Checks the rigidity relation `lambda_i delta_i = c` for a zero
/// combination of `w -> (w, w^3, ..., w^{2k-1})` at points of the circle,
/// where `delta_i = prod_{j != i} (w_i / w_j - w_j / w_i)`.
///
/// Returns `max_i |lambda_i delta_i - mean| / |mean|`. Fails with
/// [`Error::DegenerateSquares`] when two squares `w_i^2` nearly coincide.
pub fn delta_invariant_check(w: &[SpherePoint<f64>], lambdas: &[f64]) -> Result<f64> {
    if w.len() != lambdas.len() {
        return Err(Error::DimensionMismatch {
            expected: w.len(),
            found: lambdas.len(),
        });
    }
    let z: Vec<Complex64> = w
        .iter()
        .map(|p| {
            if p.dim() != 2 {
                Err(Error::DimensionMismatch {
                    expected: 2,
                    found: p.dim(),
                })
            } else {
                Ok(Complex64::new(p.coords()[0], p.coords()[1]))
            }
        })
        .collect::<Result<_>>()?;
    let mut min_sep = f64::INFINITY;
    for i in 0..z.len() {
        for j in i + 1..z.len() {
            min_sep = min_sep.min((z[i] * z[i] - z[j] * z[j]).norm());
        }
    }
    if min_sep < 1e-8 {
        return Err(Error::DegenerateSquares { min_sep });
    }
    let products: Vec<f64> = (0..z.len())
        .map(|i| {
            // On the unit circle w^{-1} is the conjugate.
            let delta: Complex64 = (0..z.len())
                .filter(|&j| j != i)
                .map(|j| z[i] * z[j].conj() - z[i].conj() * z[j])
                .product();
            if delta.im.abs() > 1e-10 * delta.norm().max(1.0) {
                return Err(Error::Numerical(format!(
                    "delta_{i} is not real (imaginary part {:e})",
                    delta.im
                )));
            }
            Ok(lambdas[i] * delta.re)
        })
        .collect::<Result<_>>()?;
    let mean = products.iter().sum::<f64>() / products.len() as f64;
    if mean == 0.0 {
        return Err(Error::Numerical("mean of lambda_i delta_i vanishes".into()));
    }
    Ok(products
        .iter()
        .map(|p| (p - mean).abs() / mean.abs())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::roots_of_unity_points;

    #[test]
    fn cube_roots_symmetric() {
        let w = roots_of_unity_points(1, &SpherePoint::basis(2, 0)).unwrap();
        let dev = delta_invariant_check(&w, &[1.0 / 3.0; 3]).unwrap();
        assert!(dev <= 1e-9);
        let mut l = [1.1 / 3.0, 1.0 / 3.0, 1.0 / 3.0];
        let s: f64 = l.iter().sum();
        l.iter_mut().for_each(|x| *x /= s);
        assert!(delta_invariant_check(&w, &l).unwrap() > 1e-3);
    }

    #[test]
    fn coincident_squares_rejected() {
        let w = vec![
            SpherePoint::basis(2, 0),
            SpherePoint::basis(2, 0).neg(),
            SpherePoint::basis(2, 1),
        ];
        assert!(matches!(
            delta_invariant_check(&w, &[0.3, 0.3, 0.4]),
            Err(Error::DegenerateSquares { .. })
        ));
    }
}
