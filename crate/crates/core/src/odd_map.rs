//! Evaluable odd maps `f: S(R^n) -> R^d` with `f(-v) = -f(v)`.
//!
//! A map is described by an [`OddMapDescriptor`] (serializable, immutable)
//! and compiled into an [`OddMap`] that caches what evaluation needs. Every
//! built-in kind is odd by construction: each output coordinate is a
//! combination of odd-degree monomials. Descriptors whose `codomain_dim`
//! exceeds the kind's natural dimension are zero padded.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::lattice_compositions;

/// Default cap on the codomain dimension of a tensor-power map.
pub const DEFAULT_TENSOR_CAP: u128 = 1_000_000;

/// Matching tolerance for sample-table lookups (max coordinate difference).
pub const TABLE_MATCH_TOL: f64 = 1e-12;

/// Serializable description of an odd map.
///
/// JSON form: `{"kind": ..., "params": {...}, "domain_dim": n, "codomain_dim": d, "seed": s}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OddMapDescriptor {
    #[serde(flatten)]
    pub kind: MapKind,
    pub domain_dim: usize,
    pub codomain_dim: usize,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "kebab-case")]
pub enum MapKind {
    /// `v -> v`.
    Inclusion,
    /// Random combinations of the odd-degree monomials of degree `<= degree`;
    /// row `i` of `coefficients` gives output coordinate `i`.
    RandomTrig {
        degree: usize,
        coefficients: Vec<Vec<f64>>,
    },
    /// `w -> (w, w^3, ..., w^{2k-1})` on the unit circle of `C`, realified.
    PolyEval { k: usize },
    /// Symmetric `(2l+1)`-th tensor power with sqrt-multinomial scaling.
    TensorPower { n: usize, l: usize },
    /// `v -> (v, <u, v>^2 v)`.
    PerturbedInclusion { u: Vec<f64> },
    /// Explicit values on a finite sample set; never extrapolated.
    UserTable { entries: Vec<TableEntry> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    pub point: Vec<f64>,
    pub value: Vec<f64>,
}

impl OddMapDescriptor {
    pub fn inclusion(n: usize, d: usize) -> Result<Self> {
        if n == 0 || d < n {
            return Err(Error::InvalidParameter(format!(
                "inclusion needs 1 <= n <= d (n={n}, d={d})"
            )));
        }
        Ok(Self {
            kind: MapKind::Inclusion,
            domain_dim: n,
            codomain_dim: d,
            seed: None,
        })
    }

    pub fn poly_eval(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("poly-eval needs k >= 1".into()));
        }
        Ok(Self {
            kind: MapKind::PolyEval { k },
            domain_dim: 2,
            codomain_dim: 2 * k,
            seed: None,
        })
    }

    pub fn tensor_power(n: usize, l: usize) -> Result<Self> {
        Self::tensor_power_with_cap(n, l, DEFAULT_TENSOR_CAP)
    }

    pub fn tensor_power_with_cap(n: usize, l: usize, cap: u128) -> Result<Self> {
        if n < 2 || l == 0 {
            return Err(Error::InvalidParameter(format!(
                "tensor power needs n >= 2 and l >= 1 (n={n}, l={l})"
            )));
        }
        let dim = binomial((n + 2 * l) as u128, (n - 1) as u128);
        if dim > cap {
            return Err(Error::CapExceeded { dim, cap });
        }
        Ok(Self {
            kind: MapKind::TensorPower { n, l },
            domain_dim: n,
            codomain_dim: dim as usize,
            seed: None,
        })
    }

    /// Odd polynomial map with standard normal coefficients drawn from a
    /// ChaCha8 stream seeded with `seed`.
    pub fn random_trig(n: usize, d: usize, degree: usize, seed: u64) -> Result<Self> {
        check_degree(n, degree)?;
        let terms = odd_monomials(n, degree).len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coefficients = (0..d)
            .map(|_| (0..terms).map(|_| StandardNormal.sample(&mut rng)).collect())
            .collect();
        let mut desc = Self::random_trig_with_coefficients(n, degree, coefficients)?;
        desc.seed = Some(seed);
        Ok(desc)
    }

    /// Odd polynomial map with explicit coefficients, one row per output
    /// coordinate, columns ordered as [`odd_monomials`].
    pub fn random_trig_with_coefficients(
        n: usize,
        degree: usize,
        coefficients: Vec<Vec<f64>>,
    ) -> Result<Self> {
        check_degree(n, degree)?;
        let terms = odd_monomials(n, degree).len();
        if coefficients.is_empty() {
            return Err(Error::InvalidParameter("codomain must be nonempty".into()));
        }
        for row in &coefficients {
            if row.len() != terms {
                return Err(Error::DimensionMismatch {
                    expected: terms,
                    found: row.len(),
                });
            }
        }
        Ok(Self {
            domain_dim: n,
            codomain_dim: coefficients.len(),
            kind: MapKind::RandomTrig {
                degree,
                coefficients,
            },
            seed: None,
        })
    }

    pub fn perturbed_inclusion(u: Vec<f64>) -> Result<Self> {
        let n = u.len();
        if n == 0 || u.iter().all(|&x| x == 0.0) {
            return Err(Error::InvalidParameter("u must be a nonzero vector".into()));
        }
        Ok(Self {
            kind: MapKind::PerturbedInclusion { u },
            domain_dim: n,
            codomain_dim: 2 * n,
            seed: None,
        })
    }

    pub fn user_table(domain_dim: usize, codomain_dim: usize, entries: Vec<TableEntry>) -> Result<Self> {
        for e in &entries {
            if e.point.len() != domain_dim {
                return Err(Error::DimensionMismatch {
                    expected: domain_dim,
                    found: e.point.len(),
                });
            }
            if e.value.len() != codomain_dim {
                return Err(Error::DimensionMismatch {
                    expected: codomain_dim,
                    found: e.value.len(),
                });
            }
        }
        Ok(Self {
            kind: MapKind::UserTable { entries },
            domain_dim,
            codomain_dim,
            seed: None,
        })
    }

    /// Dimension of the kind's own target before zero padding.
    pub fn natural_codomain(&self) -> usize {
        match &self.kind {
            MapKind::Inclusion => self.domain_dim,
            MapKind::RandomTrig { coefficients, .. } => coefficients.len(),
            MapKind::PolyEval { k } => 2 * k,
            MapKind::TensorPower { n, l } => binomial((n + 2 * l) as u128, (n - 1) as u128) as usize,
            MapKind::PerturbedInclusion { u } => 2 * u.len(),
            MapKind::UserTable { entries } => entries
                .first()
                .map_or(self.codomain_dim, |e| e.value.len()),
        }
    }

    /// Same map followed by the inclusion `R^d -> R^{codomain}`.
    pub fn padded(mut self, codomain: usize) -> Result<Self> {
        let natural = self.natural_codomain();
        if codomain < natural {
            return Err(Error::InvalidParameter(format!(
                "cannot pad a map with natural codomain {natural} down to {codomain}"
            )));
        }
        self.codomain_dim = codomain;
        Ok(self)
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            MapKind::Inclusion => "inclusion",
            MapKind::RandomTrig { .. } => "random-trig",
            MapKind::PolyEval { .. } => "poly-eval",
            MapKind::TensorPower { .. } => "tensor-power",
            MapKind::PerturbedInclusion { .. } => "perturbed-inclusion",
            MapKind::UserTable { .. } => "user-table",
        }
    }

    pub fn compile(&self) -> Result<OddMap> {
        OddMap::new(self.clone())
    }
}

fn check_degree(n: usize, degree: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("domain dimension must be positive".into()));
    }
    if degree.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "degree must be odd, got {degree}"
        )));
    }
    Ok(())
}

/// Exponent vectors of all monomials of odd degree `<= degree` in `n`
/// variables, by increasing degree; within a degree the first exponent
/// descends.
pub fn odd_monomials(n: usize, degree: usize) -> Vec<Vec<usize>> {
    (1..=degree)
        .step_by(2)
        .flat_map(|t| lattice_compositions(n, t))
        .collect()
}

/// Binomial coefficient in `u128`, saturating on overflow.
pub fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul(n - i) {
            Some(v) => v / (i + 1),
            None => return u128::MAX,
        };
    }
    acc
}

fn multinomial(alpha: &[usize]) -> u128 {
    let mut total = 0u128;
    let mut acc = 1u128;
    for &a in alpha {
        total += a as u128;
        acc = acc.saturating_mul(binomial(total, a as u128));
    }
    acc
}

#[derive(Debug, Clone)]
enum Compiled {
    Inclusion,
    Monomial {
        exponents: Vec<Vec<usize>>,
        coefficients: Vec<Vec<f64>>,
        max_degree: usize,
    },
    PolyEval { k: usize },
    Tensor {
        exponents: Vec<Vec<usize>>,
        scales: Vec<f64>,
        degree: usize,
    },
    Perturbed { u: Vec<f64> },
    Table { entries: Vec<TableEntry> },
}

/// A descriptor compiled for repeated evaluation.
#[derive(Debug, Clone)]
pub struct OddMap {
    descriptor: OddMapDescriptor,
    compiled: Compiled,
}

impl OddMap {
    pub fn new(descriptor: OddMapDescriptor) -> Result<Self> {
        let natural = descriptor.natural_codomain();
        if descriptor.codomain_dim < natural {
            return Err(Error::DimensionMismatch {
                expected: natural,
                found: descriptor.codomain_dim,
            });
        }
        let n = descriptor.domain_dim;
        let compiled = match &descriptor.kind {
            MapKind::Inclusion => Compiled::Inclusion,
            MapKind::RandomTrig {
                degree,
                coefficients,
            } => {
                check_degree(n, *degree)?;
                let exponents = odd_monomials(n, *degree);
                if coefficients.iter().any(|r| r.len() != exponents.len()) {
                    return Err(Error::DimensionMismatch {
                        expected: exponents.len(),
                        found: coefficients.iter().map(Vec::len).find(|&l| l != exponents.len()).unwrap_or(0),
                    });
                }
                Compiled::Monomial {
                    exponents,
                    coefficients: coefficients.clone(),
                    max_degree: *degree,
                }
            }
            MapKind::PolyEval { k } => {
                if n != 2 || *k == 0 {
                    return Err(Error::InvalidParameter("poly-eval lives on S^1 with k >= 1".into()));
                }
                Compiled::PolyEval { k: *k }
            }
            MapKind::TensorPower { n: tn, l } => {
                if *tn != n {
                    return Err(Error::DimensionMismatch { expected: *tn, found: n });
                }
                let degree = 2 * l + 1;
                let exponents = lattice_compositions(n, degree);
                let scales = exponents
                    .iter()
                    .map(|a| (multinomial(a) as f64).sqrt())
                    .collect();
                Compiled::Tensor {
                    exponents,
                    scales,
                    degree,
                }
            }
            MapKind::PerturbedInclusion { u } => {
                if u.len() != n {
                    return Err(Error::DimensionMismatch { expected: n, found: u.len() });
                }
                Compiled::Perturbed { u: u.clone() }
            }
            MapKind::UserTable { entries } => Compiled::Table {
                entries: entries.clone(),
            },
        };
        Ok(Self {
            descriptor,
            compiled,
        })
    }

    pub fn descriptor(&self) -> &OddMapDescriptor {
        &self.descriptor
    }

    pub fn domain_dim(&self) -> usize {
        self.descriptor.domain_dim
    }

    pub fn codomain_dim(&self) -> usize {
        self.descriptor.codomain_dim
    }

    /// Evaluates `f(v)`, zero padded to `codomain_dim`.
    pub fn evaluate(&self, v: &[f64]) -> Result<Vec<f64>> {
        let n = self.domain_dim();
        if v.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: v.len(),
            });
        }
        let mut out = Vec::with_capacity(self.codomain_dim());
        match &self.compiled {
            Compiled::Inclusion => out.extend_from_slice(v),
            Compiled::Monomial {
                exponents,
                coefficients,
                max_degree,
            } => {
                let pw = powers(v, *max_degree);
                let mono: Vec<f64> = exponents.iter().map(|a| monomial(&pw, a)).collect();
                out.extend(
                    coefficients
                        .iter()
                        .map(|row| row.iter().zip(&mono).map(|(c, m)| c * m).sum::<f64>()),
                );
            }
            Compiled::PolyEval { k } => {
                let (x, y) = (v[0], v[1]);
                let w2 = (x * x - y * y, 2.0 * x * y);
                let mut p = (x, y);
                for _ in 0..*k {
                    out.push(p.0);
                    out.push(p.1);
                    p = (p.0 * w2.0 - p.1 * w2.1, p.0 * w2.1 + p.1 * w2.0);
                }
            }
            Compiled::Tensor {
                exponents,
                scales,
                degree,
            } => {
                let pw = powers(v, *degree);
                out.extend(
                    exponents
                        .iter()
                        .zip(scales)
                        .map(|(a, s)| s * monomial(&pw, a)),
                );
            }
            Compiled::Perturbed { u } => {
                let c: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
                let c2 = c * c;
                out.extend_from_slice(v);
                out.extend(v.iter().map(|x| c2 * x));
            }
            Compiled::Table { entries } => {
                let hit = entries
                    .iter()
                    .find(|e| {
                        e.point
                            .iter()
                            .zip(v)
                            .all(|(a, b)| (a - b).abs() <= TABLE_MATCH_TOL)
                    })
                    .ok_or(Error::MissingTableEntry)?;
                out.extend_from_slice(&hit.value);
            }
        }
        out.resize(self.codomain_dim(), 0.0);
        Ok(out)
    }

    /// Evaluates at every point, for points already validated to lie in
    /// the domain.
    pub fn evaluate_all<V: AsRef<[f64]>>(&self, points: &[V]) -> Result<Vec<Vec<f64>>> {
        points.iter().map(|p| self.evaluate(p.as_ref())).collect()
    }

    /// Largest `||f(-v) + f(v)||` over `samples` random unit vectors drawn
    /// from a ChaCha8 stream seeded with `seed`. Sample tables are audited
    /// on their own points instead; a point whose antipode is missing counts
    /// as an infinite residual.
    pub fn oddness_audit(&self, samples: usize, seed: u64) -> f64 {
        if let Compiled::Table { entries } = &self.compiled {
            return entries
                .iter()
                .map(|e| {
                    let neg: Vec<f64> = e.point.iter().map(|x| -x).collect();
                    match self.evaluate(&neg) {
                        Ok(val) => antisymmetry_residual(&e.value, &val),
                        Err(_) => f64::INFINITY,
                    }
                })
                .fold(0.0, f64::max);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..samples.max(1) {
            let v = random_unit(self.domain_dim(), &mut rng);
            let neg: Vec<f64> = v.iter().map(|x| -x).collect();
            let r = match (self.evaluate(&v), self.evaluate(&neg)) {
                (Ok(a), Ok(b)) => antisymmetry_residual(&a, &b),
                _ => f64::INFINITY,
            };
            worst = worst.max(r);
        }
        worst
    }
}

fn antisymmetry_residual(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x + y) * (x + y)).sum::<f64>().sqrt()
}

/// Uniform random point of `S(R^n)` (normalized Gaussian).
pub fn random_unit<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

fn powers(v: &[f64], degree: usize) -> Vec<Vec<f64>> {
    v.iter()
        .map(|&x| {
            let mut p = Vec::with_capacity(degree + 1);
            let mut acc = 1.0;
            for _ in 0..=degree {
                p.push(acc);
                acc *= x;
            }
            p
        })
        .collect()
}

fn monomial(pw: &[Vec<f64>], alpha: &[usize]) -> f64 {
    pw.iter().zip(alpha).map(|(p, &a)| p[a]).product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn inclusion_pads() {
        let f = OddMapDescriptor::inclusion(2, 3).unwrap().compile().unwrap();
        assert_eq!(f.evaluate(&[1.0, 0.0]).unwrap(), vec![1.0, 0.0, 0.0]);
        assert_eq!(f.oddness_audit(100, 1), 0.0);
    }

    #[test]
    fn poly_eval_examples() {
        let f = OddMapDescriptor::poly_eval(2).unwrap().compile().unwrap();
        assert_eq!(f.evaluate(&[1.0, 0.0]).unwrap(), vec![1.0, 0.0, 1.0, 0.0]);
        assert_eq!(f.evaluate(&[0.0, 1.0]).unwrap(), vec![0.0, 1.0, 0.0, -1.0]);
        let g = OddMapDescriptor::poly_eval(1).unwrap().compile().unwrap();
        let t = 0.7f64;
        assert_eq!(g.evaluate(&[t.cos(), t.sin()]).unwrap(), vec![t.cos(), t.sin()]);
        assert!(f.oddness_audit(1000, 3) <= 1e-14);
    }

    #[test]
    fn perturbed_inclusion_example() {
        let f = OddMapDescriptor::perturbed_inclusion(vec![1.0, 0.0])
            .unwrap()
            .compile()
            .unwrap();
        let (a, b) = (0.6, 0.8);
        let out = f.evaluate(&[a, b]).unwrap();
        assert_eq!(out[..2], [a, b]);
        assert_relative_eq!(out[2], a * a * a, epsilon = 1e-15);
        assert_relative_eq!(out[3], a * a * b, epsilon = 1e-15);
    }

    #[test]
    fn tensor_power_dimension_and_unit_norm() {
        let d = OddMapDescriptor::tensor_power(2, 1).unwrap();
        assert_eq!(d.codomain_dim, 4);
        let f = d.compile().unwrap();
        let t = 1.1f64;
        let out = f.evaluate(&[t.cos(), t.sin()]).unwrap();
        let n: f64 = out.iter().map(|x| x * x).sum();
        assert_relative_eq!(n, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn tensor_cap() {
        assert!(matches!(
            OddMapDescriptor::tensor_power_with_cap(10, 10, 1000),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn random_trig_identity_is_inclusion() {
        let f = OddMapDescriptor::random_trig_with_coefficients(
            2,
            1,
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        )
        .unwrap()
        .compile()
        .unwrap();
        assert_eq!(f.evaluate(&[0.6, -0.8]).unwrap(), vec![0.6, -0.8]);
    }

    #[test]
    fn random_trig_deterministic() {
        let a = OddMapDescriptor::random_trig(3, 5, 3, 42).unwrap();
        let b = OddMapDescriptor::random_trig(3, 5, 3, 42).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        let c = OddMapDescriptor::random_trig(3, 5, 3, 43).unwrap();
        assert_ne!(a, c);
        assert!(a.compile().unwrap().oddness_audit(100, 0) <= 1e-12);
    }

    #[test]
    fn even_degree_rejected() {
        assert!(OddMapDescriptor::random_trig(2, 3, 2, 0).is_err());
    }

    #[test]
    fn corrupted_table_flagged() {
        let p = vec![0.6, 0.8];
        let q = vec![-0.6, -0.8];
        let good = OddMapDescriptor::user_table(
            2,
            1,
            vec![
                TableEntry { point: p.clone(), value: vec![1.0] },
                TableEntry { point: q.clone(), value: vec![-1.0] },
            ],
        )
        .unwrap()
        .compile()
        .unwrap();
        assert_eq!(good.oddness_audit(1, 0), 0.0);
        let bad = OddMapDescriptor::user_table(
            2,
            1,
            vec![
                TableEntry { point: p, value: vec![1.0] },
                TableEntry { point: q, value: vec![-0.5] },
            ],
        )
        .unwrap()
        .compile()
        .unwrap();
        assert!(bad.oddness_audit(1, 0) > 1e-11);
        assert!(matches!(bad.evaluate(&[1.0, 0.0]), Err(Error::MissingTableEntry)));
    }

    #[test]
    fn descriptor_json_shape() {
        let d = OddMapDescriptor::poly_eval(3).unwrap().padded(7).unwrap();
        let v: serde_json::Value = serde_json::to_value(&d).unwrap();
        assert_eq!(v["kind"], "poly-eval");
        assert_eq!(v["params"]["k"], 3);
        assert_eq!(v["domain_dim"], 2);
        assert_eq!(v["codomain_dim"], 7);
        let back: OddMapDescriptor = serde_json::from_value(v).unwrap();
        assert_eq!(back, d);
        let inc: OddMapDescriptor =
            serde_json::from_str(r#"{"kind":"inclusion","domain_dim":2,"codomain_dim":3}"#).unwrap();
        assert_eq!(inc, OddMapDescriptor::inclusion(2, 3).unwrap());
    }

    #[test]
    fn dimension_mismatch() {
        let f = OddMapDescriptor::inclusion(3, 3).unwrap().compile().unwrap();
        assert!(matches!(f.evaluate(&[1.0, 0.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(4, 1), 4);
        assert_eq!(multinomial(&[1, 2]), 3);
        assert_eq!(multinomial(&[2, 2, 1]), 30);
    }
}
