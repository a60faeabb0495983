//! Points on round spheres, the spherical metric, and the canonical point
//! families used by the solvers.
//!
//! Complex spaces are realified: `C^n` is stored as `R^{2n}` with interleaved
//! `(re, im)` pairs, and multiplication by a unit complex scalar is
//! [`SpherePoint::rotate`].

use std::f64::consts::PI;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{dot, gram_schmidt, norm};
use crate::scalar::Real;

/// A unit vector in `R^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SpherePoint<T> {
    coords: Vec<T>,
}

impl<T: Real> SpherePoint<T> {
    /// Wraps coordinates that already have unit norm.
    pub fn new(coords: Vec<T>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidParameter("empty coordinate vector".into()));
        }
        let n = norm(&coords);
        if !n.is_finite() || (n - T::one()).abs() > T::unit_tolerance() {
            return Err(Error::NotUnit {
                norm: n.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(Self { coords })
    }

    /// Radially projects a nonzero vector onto the sphere.
    pub fn normalized(mut coords: Vec<T>) -> Result<Self> {
        let n = norm(&coords);
        if coords.is_empty() || n == T::zero() || !n.is_finite() {
            return Err(Error::InvalidParameter("cannot normalize zero vector".into()));
        }
        coords.iter_mut().for_each(|x| *x = *x / n);
        Ok(Self { coords })
    }

    /// Standard basis vector `e_i` in `R^dim`.
    pub fn basis(dim: usize, i: usize) -> Self {
        assert!(i < dim);
        let mut coords = vec![T::zero(); dim];
        coords[i] = T::one();
        Self { coords }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    #[inline]
    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<T> {
        self.coords
    }

    pub fn neg(&self) -> Self {
        Self {
            coords: self.coords.iter().map(|&x| -x).collect(),
        }
    }

    pub fn signed(&self, sign: Sign) -> Self {
        match sign {
            Sign::Plus => self.clone(),
            Sign::Minus => self.neg(),
        }
    }

    pub fn inner(&self, other: &Self) -> Result<T> {
        check_dims(self.dim(), other.dim())?;
        Ok(dot(&self.coords, &other.coords))
    }

    /// Multiplies every complex coordinate pair by `e^{i theta}`.
    pub fn rotate(&self, theta: T) -> Result<Self> {
        if !self.dim().is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "circle action needs an even dimension, got {}",
                self.dim()
            )));
        }
        let (s, c) = theta.sin_cos();
        let coords = self
            .coords
            .chunks_exact(2)
            .flat_map(|p| [c * p[0] - s * p[1], s * p[0] + c * p[1]])
            .collect();
        Ok(Self { coords })
    }
}

impl<T> AsRef<[T]> for SpherePoint<T> {
    fn as_ref(&self) -> &[T] {
        &self.coords
    }
}

fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// A sign `e_i` in `{+1, -1}`; serialized as the integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    /// `+1` for nonnegative input (including zero), `-1` otherwise.
    pub fn of<T: Real>(x: T) -> Self {
        if x < T::zero() {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn value<T: Real>(self) -> T {
        match self {
            Sign::Plus => T::one(),
            Sign::Minus => -T::one(),
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

impl Serialize for Sign {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_i8(self.as_i8())
    }
}

impl<'de> Deserialize<'de> for Sign {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match i8::deserialize(d)? {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            other => Err(serde::de::Error::custom(format!("sign must be 1 or -1, got {other}"))),
        }
    }
}

/// Candidate witness set: points `w_i` with signs `e_i`. Downstream code
/// consumes the signed points `e_i * w_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration<T> {
    points: Vec<SpherePoint<T>>,
    signs: Vec<Sign>,
}

impl<T: Real> Configuration<T> {
    pub fn new(points: Vec<SpherePoint<T>>, signs: Vec<Sign>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::TooFewPoints { needed: 1, got: 0 });
        }
        check_dims(points.len(), signs.len())?;
        let dim = points[0].dim();
        for p in &points {
            check_dims(dim, p.dim())?;
        }
        Ok(Self { points, signs })
    }

    /// All signs `+1`.
    pub fn unsigned(points: Vec<SpherePoint<T>>) -> Result<Self> {
        let signs = vec![Sign::Plus; points.len()];
        Self::new(points, signs)
    }

    pub fn points(&self) -> &[SpherePoint<T>] {
        &self.points
    }

    pub fn signs(&self) -> &[Sign] {
        &self.signs
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    pub fn signed_points(&self) -> Vec<SpherePoint<T>> {
        self.points
            .iter()
            .zip(&self.signs)
            .map(|(p, &s)| p.signed(s))
            .collect()
    }

    pub fn diameter(&self) -> T {
        diameter(self)
    }
}

/// Great-circle distance `arccos <u, v>`, with the inner product clamped
/// to `[-1, 1]`.
pub fn spherical_distance<T: Real>(u: &SpherePoint<T>, v: &SpherePoint<T>) -> Result<T> {
    let c = u.inner(v)?;
    Ok(c.max(-T::one()).min(T::one()).acos())
}

/// Largest pairwise distance between the signed points; `0` for one point.
pub fn diameter<T: Real>(x: &Configuration<T>) -> T {
    set_diameter(&x.signed_points())
}

/// Largest pairwise distance of a point list of common dimension.
pub fn set_diameter<T: Real>(points: &[SpherePoint<T>]) -> T {
    let mut best = T::zero();
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let d = spherical_distance(&points[i], &points[j]).expect("common dimension");
            best = best.max(d);
        }
    }
    best
}

/// `{zeta^i z : i = 0..2k}` with `zeta = e^{2 pi i/(2k+1)}`, for `z` on the
/// unit circle (or any point of `S(C^n)` under the diagonal action).
pub fn roots_of_unity_points<T: Real>(k: usize, z: &SpherePoint<T>) -> Result<Vec<SpherePoint<T>>> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let count = 2 * k + 1;
    (0..count)
        .map(|i| z.rotate(T::lit(2.0 * PI * i as f64 / count as f64)))
        .collect()
}

/// Vertices of a regular simplex inscribed in `S(R^n)`.
///
/// Built by centering the standard basis of `R^{n+1}` and expressing it in
/// an orthonormal basis of the hyperplane it spans. Also accepts `n = 1`,
/// which yields the antipodal pair `{1, -1}`.
pub fn regular_simplex<T: Real>(n: usize) -> Result<Vec<SpherePoint<T>>> {
    if n == 0 {
        return Err(Error::InvalidParameter("simplex dimension must be positive".into()));
    }
    let centroid = T::one() / T::from_count(n + 1);
    let centered: Vec<Vec<T>> = (0..=n)
        .map(|i| {
            (0..=n)
                .map(|j| if i == j { T::one() - centroid } else { -centroid })
                .collect()
        })
        .collect();
    let hyperplane = gram_schmidt(&centered[..n], T::lit(1e-8));
    debug_assert_eq!(hyperplane.len(), n);
    centered
        .iter()
        .map(|c| SpherePoint::normalized(hyperplane.iter().map(|b| dot(c, b)).collect()))
        .collect()
}

fn combinations(n: usize, r: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, r, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, r, &mut Vec::with_capacity(r), &mut out);
    out
}

/// The family `(sum_s eta^{a_s} e_{i_s}) / sqrt(r)` in `S(C^n)`, realified,
/// over `i_1 < ... < i_r` and `a_s in 0..=2l`, with `eta = e^{2 pi i/(2l+1)}`.
///
/// Index tuples come out lexicographically, and for each tuple the
/// exponents run lexicographically with the last one fastest.
pub fn multiindex_points<T: Real>(n: usize, r: usize, l: usize) -> Result<Vec<SpherePoint<T>>> {
    if r == 0 || r > n || l == 0 {
        return Err(Error::InvalidParameter(format!(
            "multiindex family needs 1 <= r <= n and l >= 1 (n={n}, r={r}, l={l})"
        )));
    }
    let order = 2 * l + 1;
    let inv_sqrt_r = T::one() / T::from_count(r).sqrt();
    let mut out = Vec::new();
    for idx in combinations(n, r) {
        let total = order.pow(r as u32);
        for code in 0..total {
            let mut coords = vec![T::zero(); 2 * n];
            let mut rem = code;
            let mut exps = vec![0usize; r];
            for s in (0..r).rev() {
                exps[s] = rem % order;
                rem /= order;
            }
            for (s, &i) in idx.iter().enumerate() {
                let angle = T::lit(2.0 * PI * exps[s] as f64 / order as f64);
                coords[2 * i] = coords[2 * i] + angle.cos() * inv_sqrt_r;
                coords[2 * i + 1] = coords[2 * i + 1] + angle.sin() * inv_sqrt_r;
            }
            out.push(SpherePoint::normalized(coords)?);
        }
    }
    Ok(out)
}

/// The pairwise bound `1 - (1 - cos(pi/(2l+1)))/r` on `|<w_i, w_j>|` for the
/// multi-index family.
pub fn multiindex_bound(r: usize, l: usize) -> f64 {
    1.0 - (1.0 - (PI / (2 * l + 1) as f64).cos()) / r as f64
}

/// `m + n` points of `S(R^n)`: the tensors `u_i (x) e_j` of a regular
/// `q`-simplex with an orthonormal basis of `R^m` (`q = n / m`), placed in
/// `R^{qm}` with `u (x) e_j` at coordinates `a*m + j`, followed by an
/// orthonormal basis of the remaining `R^{n - qm}`.
pub fn simplex_tensor_points<T: Real>(m: usize, n: usize) -> Result<Vec<SpherePoint<T>>> {
    if m == 0 || m > n {
        return Err(Error::InvalidParameter(format!(
            "simplex tensor family needs 1 <= m <= n (m={m}, n={n})"
        )));
    }
    let q = n / m;
    let rest = n % m;
    let simplex = regular_simplex::<T>(q)?;
    let mut out = Vec::with_capacity(m + n);
    for u in &simplex {
        for j in 0..m {
            let mut coords = vec![T::zero(); n];
            for (a, &ua) in u.coords().iter().enumerate() {
                coords[a * m + j] = ua;
            }
            out.push(SpherePoint::normalized(coords)?);
        }
    }
    for t in 0..rest {
        out.push(SpherePoint::basis(n, q * m + t));
    }
    Ok(out)
}

/// Integer compositions `c` of `l` into `n` nonnegative parts; the lattice
/// point is `c / l`. First part descends, so the list starts at `l e_1`.
pub fn lattice_compositions(n: usize, l: usize) -> Vec<Vec<usize>> {
    fn rec(remaining: usize, parts: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 1 {
            cur.push(remaining);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for first in (0..=remaining).rev() {
            cur.push(first);
            rec(remaining - first, parts - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if n > 0 {
        rec(l, n, &mut Vec::with_capacity(n), &mut out);
    }
    out
}

/// Radial projections of the points of the standard simplex with
/// coordinates in `(1/l) Z`.
pub fn lattice_points<T: Real>(n: usize, l: usize) -> Result<Vec<SpherePoint<T>>> {
    if n < 2 || l == 0 {
        return Err(Error::InvalidParameter(format!(
            "lattice family needs n >= 2 and l >= 1 (n={n}, l={l})"
        )));
    }
    lattice_compositions(n, l)
        .into_iter()
        .map(|c| SpherePoint::normalized(c.into_iter().map(T::from_count).collect()))
        .collect()
}

/// Minimum of `<w_i, w_j>` over unordered pairs `i != j`.
pub fn min_pairwise_inner<T: Real>(points: &[SpherePoint<T>]) -> Result<T> {
    pairwise_fold(points, T::infinity(), |acc, c| acc.min(c))
}

/// Maximum of `|<w_i, w_j>|` over unordered pairs `i != j`.
pub fn max_abs_pairwise_inner<T: Real>(points: &[SpherePoint<T>]) -> Result<T> {
    pairwise_fold(points, T::zero(), |acc, c| acc.max(c.abs()))
}

fn pairwise_fold<T: Real>(
    points: &[SpherePoint<T>],
    init: T,
    f: impl Fn(T, T) -> T,
) -> Result<T> {
    if points.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: points.len(),
        });
    }
    let mut acc = init;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            acc = f(acc, points[i].inner(&points[j])?);
        }
    }
    Ok(acc)
}

/// Hermitian inner product `sum u_k conj(v_k)` of realified complex vectors,
/// returned as `(re, im)`.
pub fn hermitian_inner<T: Real>(u: &SpherePoint<T>, v: &SpherePoint<T>) -> Result<(T, T)> {
    check_dims(u.dim(), v.dim())?;
    if !u.dim().is_multiple_of(2) {
        return Err(Error::InvalidParameter("odd real dimension is not complex".into()));
    }
    let mut re = T::zero();
    let mut im = T::zero();
    for (a, b) in u.coords().chunks_exact(2).zip(v.coords().chunks_exact(2)) {
        re = re + a[0] * b[0] + a[1] * b[1];
        im = im + a[1] * b[0] - a[0] * b[1];
    }
    Ok((re, im))
}

/// Serializes a point list as a JSON array of coordinate rows, each
/// coordinate written with 17 significant digits.
pub fn point_list_to_json<T: Real>(points: &[SpherePoint<T>]) -> String {
    let rows: Vec<String> = points
        .iter()
        .map(|p| {
            let cells: Vec<String> = p
                .coords()
                .iter()
                .map(|x| format!("{:.16e}", x.to_f64().unwrap_or(f64::NAN)))
                .collect();
            format!("[{}]", cells.join(","))
        })
        .collect();
    format!("[{}]", rows.join(","))
}

/// Parses the format written by [`point_list_to_json`], validating unit norm.
pub fn point_list_from_json(s: &str) -> Result<Vec<SpherePoint<f64>>> {
    let rows: Vec<Vec<f64>> = serde_json::from_str(s)
        .map_err(|e| Error::InvalidParameter(format!("bad point list: {e}")))?;
    rows.into_iter().map(SpherePoint::new).collect()
}
