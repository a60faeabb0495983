//! Bounds on `delta(m, n)`, the smallest `delta` such that every odd map
//! `S(R^n) -> R^{m+n-1}` has a witness set of at most `m + n` points and
//! diameter at most `pi - arccos(delta)`.
//!
//! Source labels name the construction behind each bound:
//!
//! | label                   | side  | construction                                        |
//! |-------------------------|-------|-----------------------------------------------------|
//! | `inclusion`             | lower | `S(R^n) -> R^n`; any zero combination has `<w_i, w_j> <= -1/n` |
//! | `poly-eval-extremal`    | lower | `w -> (w, w^3, ..)` on the circle, `n = 2`          |
//! | `tensor-power`          | lower | `(2l+1)`-th symmetric tensor power                  |
//! | `circle-witness`        | upper | roots of unity on a great circle, `n = 2`           |
//! | `power-of-two-simplex`  | upper | regular simplex moved by `SO(2^r)`                  |
//! | `circle-restriction`    | upper | restriction to a great circle                       |
//! | `simplex-tensor`        | upper | `q`-simplex tensor orthonormal basis, `q = n / m`   |
//! | `multi-index`           | upper | `(sum eta^{a_s} e_{i_s}) / sqrt(rho)` in `C^{n/2}`  |

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{lattice_compositions, lattice_points, spherical_distance};
use crate::hull::{min_diameter_search, DiameterSearchOptions};
use crate::manifold::{solve_lemma_gen, ManifoldOptions};
use crate::odd_map::{binomial, OddMapDescriptor, DEFAULT_TENSOR_CAP};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRecord {
    pub m: usize,
    pub n: usize,
    pub lower: f64,
    pub upper: f64,
    pub exact: bool,
    /// The true value is known to exceed `lower`, by an unquantified amount.
    pub strict: bool,
    pub lower_source: String,
    pub upper_source: String,
}

impl BoundRecord {
    pub const CSV_HEADER: &'static str = "m,n,lower,upper,exact,lower_source,upper_source";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.m, self.n, self.lower, self.upper, self.exact, self.lower_source, self.upper_source
        )
    }

    /// Diameter `pi - arccos(upper)` achievable for every odd map.
    pub fn upper_diameter(&self) -> f64 {
        PI - self.upper.acos()
    }
}

fn floor_log2(n: usize) -> u32 {
    usize::BITS - 1 - n.leading_zeros()
}

fn circle_delta(k: usize) -> f64 {
    (PI / (2 * k + 1) as f64).cos()
}

/// Best multi-index bound for `2k+1` points in `S(C^p)`: the minimum over
/// `rho <= p` and `l <= 64` with `2k+1 <= (2l+1)^rho C(p, rho)` of
/// `1 - (1 - cos(pi/(2l+1)))/rho`, with the minimizing `(rho, l)`.
pub fn multi_index_upper(k: usize, p: usize) -> Option<(f64, usize, usize)> {
    let need = (2 * k + 1) as u128;
    let mut best: Option<(f64, usize, usize)> = None;
    for rho in 1..=p {
        let c = binomial(p as u128, rho as u128);
        for l in 1..=64usize {
            let reach = ((2 * l + 1) as u128)
                .checked_pow(rho as u32)
                .and_then(|x| x.checked_mul(c))
                .unwrap_or(u128::MAX);
            if reach >= need {
                let delta = 1.0 - (1.0 - circle_delta(l)) / rho as f64;
                if best.is_none_or(|b| delta < b.0) {
                    best = Some((delta, rho, l));
                }
                break;
            }
        }
    }
    best
}

/// Largest tensor-power lower bound `K^{-1/(2l+1)}` over `l` whose
/// construction needs at most `m` (`K = C(n+2l, n-1)`, `m_l = K - n + 1`).
pub fn tensor_power_lower(m: usize, n: usize) -> Option<(f64, usize)> {
    let mut best: Option<(f64, usize)> = None;
    for l in 1.. {
        let k = binomial((n + 2 * l) as u128, (n - 1) as u128);
        let m_l = k.saturating_sub(n as u128 - 1);
        if m_l > m as u128 {
            break;
        }
        let v = (k as f64).powf(-1.0 / (2 * l + 1) as f64);
        if best.is_none_or(|b| v > b.0) {
            best = Some((v, l));
        }
    }
    best
}

/// The best proven bounds on `delta(m, n)`.
pub fn best_bounds(m: usize, n: usize) -> Result<BoundRecord> {
    if m < 1 || n < 2 {
        return Err(Error::InvalidParameter(format!("need m >= 1 and n >= 2, got m={m}, n={n}")));
    }
    let inv_n = 1.0 / n as f64;

    if m <= 1usize << floor_log2(n) {
        return Ok(BoundRecord {
            m,
            n,
            lower: inv_n,
            upper: inv_n,
            exact: true,
            strict: false,
            lower_source: "inclusion".into(),
            upper_source: "power-of-two-simplex".into(),
        });
    }

    if n == 2 {
        let v = circle_delta(m.div_ceil(2));
        return Ok(BoundRecord {
            m,
            n,
            lower: v,
            upper: v,
            exact: true,
            strict: false,
            lower_source: "poly-eval-extremal".into(),
            upper_source: "circle-witness".into(),
        });
    }
    let (mut lower, mut lower_source) = (inv_n, "inclusion");
    if let Some((v, _)) = tensor_power_lower(m, n) {
        if v > lower {
            lower = v;
            lower_source = "tensor-power";
        }
    }
    let strict = n.is_multiple_of(2) && m == n + 1 && lower == inv_n;

    let k = 1usize.max((m + n - 2).div_ceil(2));
    let (mut upper, mut upper_source) = (circle_delta(k), "circle-restriction");
    let q = n / m;
    if q >= 2 {
        let v = 1.0 / q as f64;
        if v < upper {
            upper = v;
            upper_source = "simplex-tensor";
        }
    }
    if let Some((v, _, _)) = multi_index_upper(k, n / 2) {
        if v < upper {
            upper = v;
            upper_source = "multi-index";
        }
    }
    Ok(BoundRecord {
        m,
        n,
        lower,
        upper,
        exact: false,
        strict,
        lower_source: lower_source.into(),
        upper_source: upper_source.into(),
    })
}

/// Records for `m = 1..=m_max` and `n = 2..=n_count + 1`, with `n`
/// varying fastest.
pub fn bounds_table(m_max: usize, n_count: usize) -> Result<Vec<BoundRecord>> {
    let mut out = Vec::with_capacity(m_max * n_count);
    for m in 1..=m_max {
        for n in 2..n_count + 2 {
            out.push(best_bounds(m, n)?);
        }
    }
    Ok(out)
}

pub fn bounds_csv(records: &[BoundRecord]) -> String {
    let mut s = String::from(BoundRecord::CSV_HEADER);
    s.push('\n');
    for r in records {
        s.push_str(&r.csv_row());
        s.push('\n');
    }
    s
}

/// Empirical check of the tensor-power lower bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorCorroboration {
    pub n: usize,
    pub l: usize,
    /// Codomain dimension `C(n+2l, n-1)`.
    pub k: usize,
    pub m: usize,
    pub delta_bound: f64,
    /// `pi - arccos(delta_bound)`.
    pub diameter_bound: f64,
    pub empirical_diameter: f64,
    pub restarts: usize,
    pub feasible_restarts: usize,
    pub pass: bool,
}

/// Searches for small-diameter witness sets of the tensor-power map and
/// compares with the lower bound; passes iff nothing found beats the bound
/// by more than `1e-3`.
pub fn corroborate_vi(n: usize, l: usize, restarts: usize, seed: u64, steps: usize) -> Result<TensorCorroboration> {
    let desc = OddMapDescriptor::tensor_power_with_cap(n, l, DEFAULT_TENSOR_CAP)?;
    let k = desc.codomain_dim;
    let map = desc.compile()?;
    let delta_bound = (k as f64).powf(-1.0 / (2 * l + 1) as f64);
    let diameter_bound = PI - delta_bound.acos();
    let mut opts = DiameterSearchOptions::new(k + 1);
    opts.restarts = restarts;
    opts.seed = seed;
    opts.steps = steps;
    let found = min_diameter_search(&map, &opts)?;
    Ok(TensorCorroboration {
        n,
        l,
        k,
        m: k + 1 - n,
        delta_bound,
        diameter_bound,
        empirical_diameter: found.diameter,
        restarts,
        feasible_restarts: found.feasible_restarts,
        pass: found.diameter >= diameter_bound - 1e-3,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeCorroboration {
    pub n: usize,
    pub l: usize,
    pub count: usize,
    pub expected_count: u128,
    pub count_ok: bool,
    /// Smallest `sum (c - c')^2` over distinct compositions; the separation
    /// `|u - v|^2 >= 2/l^2` holds iff this is at least 2.
    pub min_square_gap: u64,
    pub separation_ok: bool,
    pub theta_min: f64,
    /// `m = count - n`, the `m` for which the bound below applies.
    pub m: usize,
    /// `delta(m, n) <= cos(theta_min)`.
    pub implied_upper: f64,
    /// Residual of the live zero-combination solve on a random odd map.
    pub demo_residual: Option<f64>,
    pub demo_diameter: Option<f64>,
}

/// Simplex-lattice configuration check plus a live solve on it.
pub fn corroborate_lattice(n: usize, l: usize, cap: usize, seed: u64) -> Result<LatticeCorroboration> {
    if n < 2 || l < 1 {
        return Err(Error::InvalidParameter(format!("need n >= 2 and l >= 1, got n={n}, l={l}")));
    }
    let expected = binomial((l + n - 1) as u128, (n - 1) as u128);
    if expected > cap as u128 {
        return Err(Error::CapExceeded {
            dim: expected,
            cap: cap as u128,
        });
    }
    let comps = lattice_compositions(n, l);
    let mut min_gap = u64::MAX;
    for i in 0..comps.len() {
        for j in i + 1..comps.len() {
            let g: u64 = comps[i]
                .iter()
                .zip(&comps[j])
                .map(|(&a, &b)| (a as i64 - b as i64).unsigned_abs().pow(2))
                .sum();
            min_gap = min_gap.min(g);
        }
    }
    let pts = lattice_points::<f64>(n, l)?;
    let mut theta_min = f64::INFINITY;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            theta_min = theta_min.min(spherical_distance(&pts[i], &pts[j])?);
        }
    }
    let count = pts.len();
    let m = count.saturating_sub(n);
    let (mut demo_residual, mut demo_diameter) = (None, None);
    if m >= 1 {
        let k = count - 1;
        let map = OddMapDescriptor::random_trig(n, k, 3, seed)?.compile()?;
        let opts = ManifoldOptions {
            seed,
            ..ManifoldOptions::default()
        };
        let cert = solve_lemma_gen(&map, &pts, 0, &opts)?;
        demo_residual = Some(cert.residual);
        demo_diameter = Some(cert.diameter);
    }
    Ok(LatticeCorroboration {
        n,
        l,
        count,
        expected_count: expected,
        count_ok: count as u128 == expected,
        min_square_gap: min_gap,
        separation_ok: min_gap >= 2,
        theta_min,
        m,
        implied_upper: theta_min.cos(),
        demo_residual,
        demo_diameter,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticRow {
    pub l: usize,
    pub k: u128,
    pub m: u128,
    /// `1 - K^{-1/(2l+1)}`.
    pub one_minus_delta: f64,
    /// `m^alpha (1 - delta)`.
    pub scaled: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticTable {
    pub n: usize,
    pub alpha: f64,
    pub rows: Vec<AsymptoticRow>,
    /// Whether `scaled` strictly decreases down the table. A finite-range
    /// trend only; it says nothing about the limit.
    pub strictly_decreasing: bool,
}

impl AsymptoticTable {
    pub fn csv(&self) -> String {
        let mut s = String::from("l,k,m,one_minus_delta,scaled\n");
        for r in &self.rows {
            s.push_str(&format!("{},{},{},{},{}\n", r.l, r.k, r.m, r.one_minus_delta, r.scaled));
        }
        s
    }
}

/// Tabulates the tensor-power lower bound along `ls`.
pub fn asymptotic_table(n: usize, ls: &[usize], alpha: f64) -> Result<AsymptoticTable> {
    if n < 2 || ls.contains(&0) {
        return Err(Error::InvalidParameter("need n >= 2 and every l >= 1".into()));
    }
    let rows: Vec<AsymptoticRow> = ls
        .iter()
        .map(|&l| {
            let k = binomial((n + 2 * l) as u128, (n - 1) as u128);
            let m = k - n as u128 + 1;
            let omd = 1.0 - (k as f64).powf(-1.0 / (2 * l + 1) as f64);
            AsymptoticRow {
                l,
                k,
                m,
                one_minus_delta: omd,
                scaled: (m as f64).powf(alpha) * omd,
            }
        })
        .collect();
    let strictly_decreasing = rows.windows(2).all(|w| w[1].scaled < w[0].scaled);
    Ok(AsymptoticTable {
        n,
        alpha,
        rows,
        strictly_decreasing,
    })
}
