//! Simulated-annealing search for small-diameter witness sets.
//!
//! The search only ever corroborates lower bounds: it reports the smallest
//! diameter among configurations it could certify, and every reported
//! configuration is re-checked at a ten times tighter hull tolerance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::{contains_origin, HullVerdict};
use crate::error::{Error, Result};
use crate::geometry::{set_diameter, Configuration, SpherePoint};
use crate::linalg::{norm, Matrix};
use crate::odd_map::{random_unit, OddMap};

#[derive(Debug, Clone)]
pub struct DiameterSearchOptions {
    /// Number of points in each candidate configuration.
    pub cap: usize,
    /// Relative hull tolerance defining feasibility.
    pub tol: f64,
    pub restarts: usize,
    pub seed: u64,
    /// Annealing steps per restart.
    pub steps: usize,
    /// Worker threads for restarts; results do not depend on this.
    pub threads: usize,
}

impl DiameterSearchOptions {
    pub fn new(cap: usize) -> Self {
        Self {
            cap,
            tol: 1e-9,
            restarts: 200,
            seed: 0,
            steps: 4000,
            threads: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DiameterSearch {
    pub best: Configuration<f64>,
    pub diameter: f64,
    pub verdict: HullVerdict<f64>,
    pub restart: usize,
    /// Restarts that reached at least one certified configuration.
    pub feasible_restarts: usize,
}

struct RestartOutcome {
    best: Option<(Vec<Vec<f64>>, f64, HullVerdict<f64>)>,
}

/// Penalized multi-start annealing of `diameter(X)` subject to
/// `0 in conv f(X)`, over configurations of `opts.cap` points.
///
/// Restarts are merged by `(diameter, restart index)`.
pub fn min_diameter_search(map: &OddMap, opts: &DiameterSearchOptions) -> Result<DiameterSearch> {
    if opts.cap < 2 {
        return Err(Error::InvalidParameter("cardinality cap must be at least 2".into()));
    }
    if opts.restarts == 0 {
        return Err(Error::InvalidParameter("need at least one restart".into()));
    }
    let run = |r: usize| anneal(map, opts, r);
    let outcomes: Vec<RestartOutcome> = if opts.threads > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.threads)
            .build()
            .map_err(|e| Error::Numerical(e.to_string()))?;
        pool.install(|| (0..opts.restarts).into_par_iter().map(run).collect())
    } else {
        (0..opts.restarts).map(run).collect()
    };

    let feasible_restarts = outcomes.iter().filter(|o| o.best.is_some()).count();
    let (restart, (points, diameter, verdict)) = outcomes
        .into_iter()
        .enumerate()
        .filter_map(|(i, o)| o.best.map(|b| (i, b)))
        .min_by(|a, b| a.1 .1.partial_cmp(&b.1 .1).unwrap().then(a.0.cmp(&b.0)))
        .ok_or(Error::NoFeasiblePoint)?;
    let best = Configuration::unsigned(
        points
            .into_iter()
            .map(SpherePoint::normalized)
            .collect::<Result<_>>()?,
    )?;
    Ok(DiameterSearch {
        best,
        diameter,
        verdict,
        restart,
        feasible_restarts,
    })
}

fn hull_distance(map: &OddMap, points: &[Vec<f64>], tol: f64) -> Option<f64> {
    let values = map.evaluate_all(points).ok()?;
    let v = contains_origin(&values, tol).ok()?;
    Some(if v.is_inside() { 0.0 } else { norm(&v.min_norm_point) })
}

fn diameter_of(points: &[Vec<f64>]) -> f64 {
    let sp: Vec<SpherePoint<f64>> = points
        .iter()
        .map(|p| SpherePoint::normalized(p.clone()).expect("nonzero"))
        .collect();
    set_diameter(&sp)
}

fn anneal(map: &OddMap, opts: &DiameterSearchOptions, restart: usize) -> RestartOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(restart as u64);
    let n = map.domain_dim();
    let steps = opts.steps.max(10);

    let mut current: Vec<Vec<f64>> = (0..opts.cap).map(|_| random_unit(n, &mut rng)).collect();
    let mut penalty = 1.0f64;
    let energy = |pts: &[Vec<f64>], dist: f64, penalty: f64| diameter_of(pts) + penalty * dist;
    let mut dist = hull_distance(map, &current, opts.tol).unwrap_or(f64::INFINITY);
    let mut e_cur = energy(&current, dist, penalty);
    let mut infeasible_run = 0usize;
    let mut best: Option<(Vec<Vec<f64>>, f64, HullVerdict<f64>)> = None;

    let (t0, t1) = (0.2f64, 1e-6f64);
    let (s0, s1) = (0.6f64, 1e-5f64);
    for step in 0..steps {
        let frac = step as f64 / (steps - 1) as f64;
        let temp = t0 * (t1 / t0).powf(frac);
        let sigma = s0 * (s1 / s0).powf(frac);

        let i = rng.random_range(0..current.len());
        let mut cand = current.clone();
        let p = &mut cand[i];
        for x in p.iter_mut() {
            let g: f64 = StandardNormal.sample(&mut rng);
            *x += sigma * g;
        }
        let pn = norm(p);
        if pn < 1e-12 {
            continue;
        }
        p.iter_mut().for_each(|x| *x /= pn);

        let Some(d_cand) = hull_distance(map, &cand, opts.tol) else {
            continue;
        };
        let e_cand = energy(&cand, d_cand, penalty);
        let accept = e_cand <= e_cur || rng.random::<f64>() < ((e_cur - e_cand) / temp).exp();
        if accept {
            current = cand;
            dist = d_cand;
            e_cur = e_cand;
        }

        if dist > 0.0 && dist.is_finite() && step % 5 == 0 {
            if let Some(fixed) = restore(map, &current, opts.tol) {
                current = fixed;
                dist = 0.0;
                e_cur = energy(&current, dist, penalty);
            }
        }

        if dist == 0.0 {
            infeasible_run = 0;
            let diam = diameter_of(&current);
            if best.as_ref().is_none_or(|b| diam < b.1) {
                if let Some(v) = certify(map, &current, opts.tol / 10.0) {
                    best = Some((current.clone(), diam, v));
                }
            }
        } else {
            infeasible_run += 1;
            if infeasible_run >= 50 {
                penalty = (penalty * 2.0).min(1e8);
                infeasible_run = 0;
                e_cur = energy(&current, dist, penalty);
            }
        }
    }
    RestartOutcome { best }
}

/// Gauss-Newton restoration: moves the points so that the current
/// min-norm combination of their images becomes zero, keeping its weights.
fn restore(map: &OddMap, points: &[Vec<f64>], tol: f64) -> Option<Vec<Vec<f64>>> {
    let mut pts = points.to_vec();
    let h = 1e-6;
    for _ in 0..8 {
        let values = map.evaluate_all(&pts).ok()?;
        let scale = values.iter().map(|v| norm(v)).fold(0.0, f64::max);
        let v = contains_origin(&values, tol).ok()?;
        let lambdas = match v.lambdas {
            Some(_) => return Some(pts),
            None => hull_weights(&values, &v.min_norm_point)?,
        };
        let x = &v.min_norm_point;
        if norm(x) > 0.2 * scale {
            return None;
        }
        let d = x.len();
        // Columns of the linearization: lambda_i * df(w_i)[t] for tangent
        // directions t of each support point.
        let mut cols: Vec<Vec<f64>> = Vec::new();
        let mut dirs: Vec<(usize, Vec<f64>)> = Vec::new();
        for (i, w) in pts.iter().enumerate() {
            if lambdas[i] <= 1e-14 {
                continue;
            }
            for t in tangent_basis(w) {
                let plus: Vec<f64> = w.iter().zip(&t).map(|(a, b)| a + h * b).collect();
                let minus: Vec<f64> = w.iter().zip(&t).map(|(a, b)| a - h * b).collect();
                let (fp, fm) = (map.evaluate(&unit(&plus)).ok()?, map.evaluate(&unit(&minus)).ok()?);
                cols.push((0..d).map(|r| lambdas[i] * (fp[r] - fm[r]) / (2.0 * h)).collect());
                dirs.push((i, t));
            }
        }
        if cols.is_empty() {
            return None;
        }
        let a = Matrix::from_columns(&cols);
        let svd = a.svd_jacobi();
        let smax = svd.singular.iter().copied().fold(0.0, f64::max);
        let mut step = vec![0.0; cols.len()];
        for (k, &sk) in svd.singular.iter().enumerate() {
            if sk <= 1e-10 * smax {
                continue;
            }
            let vk: Vec<f64> = (0..cols.len()).map(|j| svd.v[(j, k)]).collect();
            let uk: Vec<f64> = a.mul_vec(&vk).iter().map(|x| x / sk).collect();
            let c = -crate::linalg::dot(&uk, x) / sk;
            for j in 0..step.len() {
                step[j] += c * vk[j];
            }
        }
        for ((i, t), c) in dirs.iter().zip(&step) {
            for (p, tv) in pts[*i].iter_mut().zip(t) {
                *p += c * tv;
            }
        }
        for p in pts.iter_mut() {
            *p = unit(p);
        }
    }
    let values = map.evaluate_all(&pts).ok()?;
    certify_values(&values, tol).map(|_| pts)
}

/// Convex weights of a min-norm point `x` over the hull of `values`,
/// recovered from the face it lies on.
fn hull_weights(values: &[Vec<f64>], x: &[f64]) -> Option<Vec<f64>> {
    // Points on the supporting face satisfy <x, p> = |x|^2.
    let xx = crate::linalg::dot(x, x);
    let face: Vec<usize> = (0..values.len())
        .filter(|&i| (crate::linalg::dot(x, &values[i]) - xx).abs() <= 1e-9 * xx.max(1e-300).sqrt() * norm(&values[i]).max(1.0))
        .collect();
    if face.is_empty() {
        return None;
    }
    let shifted: Vec<Vec<f64>> = face
        .iter()
        .map(|&i| values[i].iter().zip(x).map(|(a, b)| a - b).collect())
        .collect();
    let v = contains_origin(&shifted, 1e-9).ok()?;
    let l = v.lambdas?;
    let mut out = vec![0.0; values.len()];
    for (&i, w) in face.iter().zip(l) {
        out[i] = w;
    }
    Some(out)
}

fn tangent_basis(w: &[f64]) -> Vec<Vec<f64>> {
    let n = w.len();
    let mut basis = vec![w.to_vec()];
    basis.extend((0..n).map(|i| {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        e
    }));
    let ortho = crate::linalg::gram_schmidt(&basis, 1e-8);
    ortho.into_iter().skip(1).collect()
}

fn unit(v: &[f64]) -> Vec<f64> {
    let n = norm(v);
    v.iter().map(|x| x / n).collect()
}

fn certify_values(values: &[Vec<f64>], tol: f64) -> Option<HullVerdict<f64>> {
    contains_origin(values, tol).ok().filter(|v| v.is_inside())
}

fn certify(map: &OddMap, points: &[Vec<f64>], tol: f64) -> Option<HullVerdict<f64>> {
    let values = map.evaluate_all(points).ok()?;
    contains_origin(&values, tol).ok().filter(|v| v.is_inside())
}
