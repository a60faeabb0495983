//! Convex certificates and their independent re-verification.

use serde::{Deserialize, Serialize};

use super::dependence::{caratheodory_reduce, split_signs};
use crate::error::{Error, Result};
use crate::geometry::{set_diameter, Configuration, Sign, SpherePoint};
use crate::hull::{contains_origin, HullVerdict, DEFAULT_HULL_TOL};
use crate::linalg::{combine, norm};
use crate::odd_map::{OddMap, OddMapDescriptor};

/// Tolerances used by a solve, recorded in every certificate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Bound on `||sum lambda_i f(e_i w_i)||`.
    pub residual: f64,
    /// Bound on the sampled `||f(v) + f(-v)||`.
    pub oddness: f64,
    pub oddness_samples: usize,
    /// `phi` counts as identically zero below this times
    /// `(max column norm)^(2k+1)`.
    pub degeneracy: f64,
    /// Final bracket width of the angle bisection.
    pub bisection_width: f64,
    /// Acceptance level `|phi| <= zero * max|phi|` for the fallback probe.
    pub zero: f64,
    /// Relative singular-value gap below which the null direction is ambiguous.
    pub singular_gap: f64,
    /// Relative tolerance of the hull cross-check.
    pub hull: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            residual: 1e-9,
            oddness: 1e-9,
            oddness_samples: 64,
            degeneracy: 1e-12,
            bisection_width: 1e-13,
            zero: 1e-10,
            singular_gap: 1e-12,
            hull: DEFAULT_HULL_TOL,
        }
    }
}

/// Group element at which a manifold solve found its zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupBase {
    pub r: usize,
    /// Parametrization: `"identity"`, `"angle"`, `"quaternion"` or `"skew-exp"`.
    pub chart: String,
    pub params: Vec<f64>,
    /// Row-major `2^r x 2^r` orthogonal matrix.
    pub matrix: Vec<f64>,
}

/// Witness that `0` lies in the convex hull of `f(X)` for
/// `X = {e_i w_i}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexCertificate {
    pub map: OddMapDescriptor,
    /// Circle parameter of the zero, when the base is an angle.
    pub theta: Option<f64>,
    pub base: Option<GroupBase>,
    /// The moved points `w_i` before signs are applied.
    pub points: Vec<SpherePoint<f64>>,
    pub signs: Vec<Sign>,
    pub lambdas: Vec<f64>,
    pub residual: f64,
    /// Diameter of the signed points.
    pub diameter: f64,
    /// Proven upper bound on the diameter, when one applies.
    pub diameter_bound: Option<f64>,
    pub tolerances: Tolerances,
    pub seed: Option<u64>,
    pub flags: Vec<String>,
    /// Independent membership check of `0` in `conv f(X)`.
    pub hull: Option<HullVerdict<f64>>,
}

impl ConvexCertificate {
    /// Builds a certificate from moved points and signed coefficients `mu`.
    pub fn assemble(
        map: &OddMap,
        points: Vec<SpherePoint<f64>>,
        mu: &[f64],
        tolerances: Tolerances,
        seed: Option<u64>,
    ) -> Result<Self> {
        if points.len() != mu.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                found: mu.len(),
            });
        }
        let l1: f64 = mu.iter().map(|x| x.abs()).sum();
        if !(l1 > 0.0) {
            return Err(Error::Numerical("zero coefficient vector".into()));
        }
        let scaled: Vec<f64> = mu.iter().map(|x| x / l1).collect();
        let (lambdas, signs) = split_signs(&scaled);
        let mut cert = Self {
            map: map.descriptor().clone(),
            theta: None,
            base: None,
            points,
            signs,
            lambdas,
            residual: 0.0,
            diameter: 0.0,
            diameter_bound: None,
            tolerances,
            seed,
            flags: Vec::new(),
            hull: None,
        };
        cert.residual = cert.recompute_residual(map)?;
        cert.diameter = cert.recompute_diameter();
        let values = map.evaluate_all(&cert.witness_points())?;
        cert.hull = contains_origin(&values, tolerances.hull).ok();
        Ok(cert)
    }

    pub fn configuration(&self) -> Result<Configuration<f64>> {
        Configuration::new(self.points.clone(), self.signs.clone())
    }

    /// The signed points `e_i w_i`.
    pub fn witness_points(&self) -> Vec<SpherePoint<f64>> {
        self.points
            .iter()
            .zip(&self.signs)
            .map(|(p, &s)| p.signed(s))
            .collect()
    }

    pub fn recompute_residual(&self, map: &OddMap) -> Result<f64> {
        let values = map.evaluate_all(&self.witness_points())?;
        Ok(norm(&combine(&self.lambdas, &values)))
    }

    pub fn recompute_diameter(&self) -> f64 {
        set_diameter(&self.witness_points())
    }

    /// Restricts the certificate to an affinely independent support.
    pub fn reduced(&self) -> Result<Self> {
        let map = self.map.compile()?;
        let values = map.evaluate_all(&self.witness_points())?;
        let scale = values.iter().map(|v| norm(v)).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let tol = (self.tolerances.residual / scale).max(self.tolerances.hull);
        let red = caratheodory_reduce(&values, &self.lambdas, tol)?;
        let points: Vec<SpherePoint<f64>> = red.indices.iter().map(|&i| self.points[i].clone()).collect();
        let mu: Vec<f64> = red
            .indices
            .iter()
            .zip(&red.lambdas)
            .map(|(&i, &l)| self.signs[i].value::<f64>() * l)
            .collect();
        let mut out = Self::assemble(&map, points, &mu, self.tolerances, self.seed)?;
        out.theta = self.theta;
        out.base = self.base.clone();
        out.diameter_bound = self.diameter_bound;
        out.flags = self.flags.clone();
        out.flags.push("reduced".into());
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Numerical(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::InvalidParameter(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    fn push(&mut self, name: &str, passed: bool, detail: String) {
        self.passed &= passed;
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail,
        });
    }
}

/// Recomputes every claim of a certificate from its own fields.
pub fn verify_certificate(cert: &ConvexCertificate) -> VerificationReport {
    let mut rep = VerificationReport {
        passed: true,
        checks: Vec::new(),
    };
    let tol = &cert.tolerances;
    let n = cert.points.len();
    let shapes = n > 0 && cert.signs.len() == n && cert.lambdas.len() == n;
    rep.push(
        "shape",
        shapes,
        format!("{} points, {} signs, {} weights", n, cert.signs.len(), cert.lambdas.len()),
    );
    if !shapes {
        return rep;
    }
    let bad_point = cert
        .points
        .iter()
        .position(|p| p.dim() != cert.map.domain_dim || SpherePoint::new(p.coords().to_vec()).is_err());
    rep.push(
        "points-on-sphere",
        bad_point.is_none(),
        bad_point.map_or("all points unit".into(), |i| format!("point {i} off the domain sphere")),
    );

    let min_l = cert.lambdas.iter().copied().fold(f64::INFINITY, f64::min);
    rep.push("nonnegative-weights", min_l >= 0.0, format!("min weight {min_l:e}"));
    let sum: f64 = cert.lambdas.iter().sum();
    rep.push(
        "weights-sum-to-one",
        (sum - 1.0).abs() <= 1e-12,
        format!("sum of weights {sum:.17}"),
    );

    let map = match cert.map.compile() {
        Ok(m) => m,
        Err(e) => {
            rep.push("map", false, e.to_string());
            return rep;
        }
    };
    let odd = map.oddness_audit(tol.oddness_samples, cert.seed.unwrap_or(0));
    rep.push("oddness", odd <= tol.oddness, format!("audit residual {odd:e}"));

    if bad_point.is_none() {
        match cert.recompute_residual(&map) {
            Ok(r) => {
                rep.push(
                    "residual-recomputed",
                    r <= 2.0 * cert.residual + 1e-15,
                    format!("recomputed {r:e}, stated {:e}", cert.residual),
                );
                rep.push(
                    "residual-within-tolerance",
                    cert.residual <= tol.residual && r <= tol.residual,
                    format!("stated {:e}, tolerance {:e}", cert.residual, tol.residual),
                );
            }
            Err(e) => rep.push("residual-recomputed", false, e.to_string()),
        }
        let d = cert.recompute_diameter();
        rep.push(
            "diameter",
            (d - cert.diameter).abs() <= 1e-12,
            format!("recomputed {d:.17}, stated {:.17}", cert.diameter),
        );
        if let Some(b) = cert.diameter_bound {
            rep.push(
                "diameter-bound",
                cert.diameter <= b + 1e-9,
                format!("diameter {:.12} against bound {b:.12}", cert.diameter),
            );
        }
    }
    rep
}

/// Re-decides `0 in conv f(X)` with the hull certifier.
pub fn cross_check_hull(cert: &ConvexCertificate) -> Result<HullVerdict<f64>> {
    let map = cert.map.compile()?;
    let values = map.evaluate_all(&cert.witness_points())?;
    contains_origin(&values, cert.tolerances.hull)
}
