//! Constructive zero of the determinant map on the circle.
//!
//! For an odd map `f` into `R^{2k+1}` and points `w_0..w_2k` of a domain
//! carrying the diagonal circle action, `phi(theta) = det[f(e^{i theta} w_j)]`
//! is odd under `theta -> theta + pi`, so it changes sign on `[0, pi]`. At a
//! zero the columns are dependent and the dependence, split into signs and
//! weights, is a convex certificate.

mod certificate;
mod dependence;
mod invariant;

pub use certificate::{
    cross_check_hull, verify_certificate, Check, ConvexCertificate, GroupBase, Tolerances,
    VerificationReport,
};
pub use dependence::{caratheodory_reduce, dependence_coefficients, split_signs, Reduced};
pub use invariant::delta_invariant_check;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{roots_of_unity_points, SpherePoint};
use crate::linalg::{norm, Matrix};
use crate::odd_map::OddMap;

/// Options shared by the circle solvers.
#[derive(Debug, Clone, Default)]
pub struct CircleOptions {
    /// Grid size; defaults to `max(64, 16 (2k+1))`.
    pub grid: Option<usize>,
    pub tolerances: Tolerances,
    /// Seed of the oddness audit.
    pub seed: u64,
}

/// Result of the zero search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleZero {
    pub theta: f64,
    /// `phi` vanished identically on the grid; `theta` is then `0`.
    pub degenerate: bool,
    pub value: f64,
    /// Largest `|phi|` seen on the grid.
    pub scale: f64,
    pub grid: usize,
    /// The zero came from the minimum-`|phi|` fallback, not a sign change.
    pub probe: bool,
}

/// Default grid for `2k+1` columns.
pub fn default_grid(columns: usize) -> usize {
    64.max(16 * columns)
}

fn check_circle_inputs(map: &OddMap, w: &[SpherePoint<f64>]) -> Result<()> {
    let d = map.codomain_dim();
    if d.is_multiple_of(2) || d < 1 {
        return Err(Error::InvalidParameter(format!(
            "determinant formulation needs an odd codomain, got {d}"
        )));
    }
    if w.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: w.len(),
        });
    }
    for p in w {
        if p.dim() != map.domain_dim() {
            return Err(Error::DimensionMismatch {
                expected: map.domain_dim(),
                found: p.dim(),
            });
        }
    }
    if !map.domain_dim().is_multiple_of(2) {
        return Err(Error::InvalidParameter("circle action needs an even-dimensional domain".into()));
    }
    Ok(())
}

fn columns_at(map: &OddMap, w: &[SpherePoint<f64>], theta: f64) -> Result<Vec<Vec<f64>>> {
    w.iter()
        .map(|p| map.evaluate(p.rotate(theta)?.coords()))
        .collect()
}

/// Product of the column norms, an upper bound for `|det|`.
pub fn hadamard(columns: &[Vec<f64>]) -> f64 {
    columns.iter().map(|c| norm(c)).product()
}

/// `det [f(e^{i theta} w_j)]_j`.
pub fn phi(map: &OddMap, w: &[SpherePoint<f64>], theta: f64) -> Result<f64> {
    check_circle_inputs(map, w)?;
    Ok(Matrix::from_columns(&columns_at(map, w, theta)?).determinant())
}

/// Locates the first zero of `phi` on the circle.
pub fn find_circle_zero(
    map: &OddMap,
    w: &[SpherePoint<f64>],
    grid: Option<usize>,
    tol: &Tolerances,
) -> Result<CircleZero> {
    check_circle_inputs(map, w)?;
    let grid = grid.unwrap_or_else(|| default_grid(w.len()));
    find_odd_zero(
        |theta| {
            let cols = columns_at(map, w, theta)?;
            Ok((Matrix::from_columns(&cols).determinant(), hadamard(&cols)))
        },
        |theta| Ok(relative_sigma_min(&columns_at(map, w, theta)?)),
        grid,
        tol,
    )
}

/// Zero search for a function odd under `theta -> theta + pi`.
///
/// `eval` returns `(phi(theta), bound)` with `|phi| <= bound`, e.g. the
/// Hadamard product of the column norms. `phi` is declared identically zero
/// when every grid value is below `tol.degeneracy` times the largest bound
/// and `conditioning` (`sigma_min / sigma_max` of the underlying matrix) is
/// at most `tol.zero` at the angles `0, pi/3, 2pi/3`. The second test keeps
/// badly scaled but regular matrices out of the degenerate branch.
/// The grid on `[0, pi]` is scanned in ascending order and the first sign
/// change is bisected. Without a sign change the grid is doubled up to three
/// times, then the smallest grid value is refined by golden-section search
/// and accepted if `|phi| <= tol.zero * max|phi|`.
pub fn find_odd_zero<F, C>(mut eval: F, mut conditioning: C, grid: usize, tol: &Tolerances) -> Result<CircleZero>
where
    F: FnMut(f64) -> Result<(f64, f64)>,
    C: FnMut(f64) -> Result<f64>,
{
    let grid = grid.max(2);
    let mut g = grid;
    let mut last = Vec::new();
    let mut scale = 0.0f64;
    for _round in 0..4 {
        let thetas: Vec<f64> = (0..=g).map(|j| PI * j as f64 / g as f64).collect();
        let mut values = Vec::with_capacity(g + 1);
        let mut bound = 0.0f64;
        for &t in &thetas {
            let (v, c) = eval(t)?;
            if !v.is_finite() || !c.is_finite() {
                return Err(Error::Numerical(format!("non-finite determinant at angle {t}")));
            }
            values.push(v);
            bound = bound.max(c);
        }
        scale = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if scale <= tol.degeneracy * bound && singular_everywhere(&mut conditioning, tol.zero)? {
            let (v, _) = eval(0.0)?;
            return Ok(CircleZero {
                theta: 0.0,
                degenerate: true,
                value: v,
                scale,
                grid: g,
                probe: false,
            });
        }
        for j in 0..=g {
            if values[j] == 0.0 {
                return Ok(CircleZero {
                    theta: thetas[j],
                    degenerate: false,
                    value: 0.0,
                    scale,
                    grid: g,
                    probe: false,
                });
            }
            if j < g && (values[j] < 0.0) != (values[j + 1] < 0.0) && values[j + 1] != 0.0 {
                let (theta, value) = bisect(&mut eval, thetas[j], thetas[j + 1], values[j], values[j + 1], tol.bisection_width)?;
                return Ok(CircleZero {
                    theta,
                    degenerate: false,
                    value,
                    scale,
                    grid: g,
                    probe: false,
                });
            }
        }
        last = thetas.into_iter().zip(values).collect::<Vec<_>>();
        g *= 2;
    }

    let (jmin, _) = last
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .1.abs().partial_cmp(&b.1 .1.abs()).unwrap())
        .unwrap();
    let step = PI / (last.len() - 1) as f64;
    let (theta, value) = golden_min(&mut eval, last[jmin].0 - step, last[jmin].0 + step)?;
    if value.abs() <= tol.zero * scale {
        return Ok(CircleZero {
            theta: theta.rem_euclid(2.0 * PI),
            degenerate: false,
            value,
            scale,
            grid: g / 2,
            probe: true,
        });
    }
    Err(Error::NoSignChange {
        grid: g / 2,
        max_abs: scale,
    })
}

fn singular_everywhere<C: FnMut(f64) -> Result<f64>>(conditioning: &mut C, tol: f64) -> Result<bool> {
    for t in [0.0, PI / 3.0, 2.0 * PI / 3.0] {
        if conditioning(t)? > tol {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `sigma_min / sigma_max` of the matrix with the given columns.
pub fn relative_sigma_min(columns: &[Vec<f64>]) -> f64 {
    let s = Matrix::from_columns(columns).svd_jacobi().singular;
    let max = s.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return 0.0;
    }
    s.iter().cloned().fold(f64::INFINITY, f64::min) / max
}

fn bisect<F>(eval: &mut F, mut lo: f64, mut hi: f64, mut flo: f64, mut fhi: f64, width: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<(f64, f64)>,
{
    while hi - lo > width {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let (fm, _) = eval(mid)?;
        if fm == 0.0 {
            return Ok((mid, 0.0));
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    Ok(if flo.abs() <= fhi.abs() { (lo, flo) } else { (hi, fhi) })
}

fn golden_min<F>(eval: &mut F, mut a: f64, mut b: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<(f64, f64)>,
{
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = eval(c)?.0.abs();
    let mut fd = eval(d)?.0.abs();
    for _ in 0..200 {
        if b - a < 1e-15 {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = eval(c)?.0.abs();
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = eval(d)?.0.abs();
        }
    }
    let t = if fc < fd { c } else { d };
    Ok((t, eval(t)?.0))
}

fn audit(map: &OddMap, opts: &CircleOptions) -> Result<()> {
    let odd = map.oddness_audit(opts.tolerances.oddness_samples, opts.seed);
    if odd > opts.tolerances.oddness {
        return Err(Error::NotOdd { residual: odd });
    }
    Ok(())
}

/// Convex certificate from the circle zero for arbitrary points `w_j`
/// of a domain `C^n` under the diagonal circle action.
pub fn solve_circle_lemma(map: &OddMap, w: &[SpherePoint<f64>], opts: &CircleOptions) -> Result<ConvexCertificate> {
    check_circle_inputs(map, w)?;
    audit(map, opts)?;
    let tol = &opts.tolerances;
    let zero = find_circle_zero(map, w, opts.grid, tol)?;
    let rotated: Vec<SpherePoint<f64>> = w
        .iter()
        .map(|p| p.rotate(zero.theta))
        .collect::<Result<_>>()?;
    let cols = map.evaluate_all(&rotated)?;
    let mu = dependence_coefficients(&cols, tol.singular_gap)?;
    let mut cert = ConvexCertificate::assemble(map, rotated, &mu, *tol, Some(opts.seed))?;
    cert.theta = Some(zero.theta);
    if zero.degenerate {
        cert.flags.push("degenerate".into());
    }
    if zero.probe {
        cert.flags.push("probe".into());
    }
    if cert.residual > tol.residual {
        return Err(Error::ResidualExceeded {
            residual: cert.residual,
            tol: tol.residual,
        });
    }
    Ok(cert)
}

/// Witness on the circle: `X = {e_i zeta^i z}` with
/// `diameter(X) <= pi - pi/(2k+1)`.
pub fn solve_roots_of_unity(map: &OddMap, opts: &CircleOptions) -> Result<ConvexCertificate> {
    if map.domain_dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: map.domain_dim(),
        });
    }
    let d = map.codomain_dim();
    if d < 3 || d.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "codomain must be 2k+1 with k >= 1, got {d}"
        )));
    }
    let k = (d - 1) / 2;
    let w = roots_of_unity_points(k, &SpherePoint::basis(2, 0))?;
    let mut cert = solve_circle_lemma(map, &w, opts)?;
    cert.diameter_bound = Some(PI - PI / d as f64);
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::odd_map::OddMapDescriptor;

    #[test]
    fn synthetic_sine() {
        let z = find_odd_zero(|t| Ok((t.sin(), 1.0)), |_| Ok(1.0), 64, &Tolerances::default()).unwrap();
        assert!(z.theta.abs() < 1e-12 || (z.theta - PI).abs() < 1e-12);
        assert!(!z.degenerate);
    }

    #[test]
    fn shifted_sine_bisected() {
        let z = find_odd_zero(|t| Ok(((t - 1.0).sin(), 1.0)), |_| Ok(1.0), 64, &Tolerances::default()).unwrap();
        assert!((z.theta - 1.0).abs() < 1e-12);
    }

    #[test]
    fn small_but_regular_determinant_is_not_degenerate() {
        // Strongly correlated columns: |det| is ~1e-12 of the Hadamard bound.
        let map = OddMapDescriptor::random_trig(2, 11, 11, 3).unwrap().compile().unwrap();
        let cert = solve_roots_of_unity(&map, &CircleOptions::default()).unwrap();
        assert!(!cert.flags.iter().any(|f| f == "degenerate"));
        assert!(cert.residual <= 1e-9);
    }

    #[test]
    fn degenerate_inclusion() {
        let map = OddMapDescriptor::inclusion(2, 3).unwrap().compile().unwrap();
        let w = roots_of_unity_points(1, &SpherePoint::basis(2, 0)).unwrap();
        assert!(phi(&map, &w, 0.3).unwrap().abs() < 1e-15);
        let z = find_circle_zero(&map, &w, None, &Tolerances::default()).unwrap();
        assert!(z.degenerate);
        assert_eq!(z.theta, 0.0);
        let cert = solve_roots_of_unity(&map, &CircleOptions::default()).unwrap();
        for l in &cert.lambdas {
            assert!((l - 1.0 / 3.0).abs() < 1e-12);
        }
        assert!(cert.flags.iter().any(|f| f == "degenerate"));
    }

    #[test]
    fn antisymmetry() {
        let map = OddMapDescriptor::random_trig(2, 3, 3, 11).unwrap().compile().unwrap();
        let w = roots_of_unity_points(1, &SpherePoint::basis(2, 0)).unwrap();
        for j in 0..20 {
            let t = 0.31 * j as f64;
            let a = phi(&map, &w, t).unwrap();
            let b = phi(&map, &w, t + PI).unwrap();
            assert!((a + b).abs() <= 1e-9 * a.abs().max(1e-300));
        }
    }

    #[test]
    fn roots_of_unity_small_cases() {
        for k in 1..=3 {
            let map = OddMapDescriptor::random_trig(2, 2 * k + 1, 2 * k + 1, k as u64)
                .unwrap()
                .compile()
                .unwrap();
            let cert = solve_roots_of_unity(&map, &CircleOptions::default()).unwrap();
            let rep = verify_certificate(&cert);
            assert!(rep.passed, "{:?}", rep.failures().collect::<Vec<_>>());
            assert!(cert.diameter <= PI - PI / (2 * k + 1) as f64 + 1e-9);
            assert!(cross_check_hull(&cert).unwrap().is_inside());
        }
    }

    #[test]
    fn tampering_detected() {
        let map = OddMapDescriptor::poly_eval(1).unwrap().padded(3).unwrap().compile().unwrap();
        let cert = solve_roots_of_unity(&map, &CircleOptions::default()).unwrap();
        assert!(verify_certificate(&cert).passed);
        let mut bad = cert.clone();
        bad.lambdas[0] = -1e-3;
        assert!(!verify_certificate(&bad).passed);
        let mut bad = cert.clone();
        bad.diameter += 1e-6;
        let rep = verify_certificate(&bad);
        assert!(rep.failures().any(|c| c.name == "diameter"));
    }
}
