//! Zeros of `sigma(g, mu) = sum_i mu_i f(g w_i)` over `SO(2^r) x S(R^N)`.
//!
//! When the coefficient matrix `M(g) = [f(g w_i)]` is square the problem
//! reduces to the sign change of `det M` along a circle subgroup. Otherwise
//! `mu` is projected out: for fixed `g` the best `mu` is the smallest right
//! singular vector of `M(g)`, and the search minimizes `sigma_min(M(g))`
//! over a chart of the group, then polishes `(g, mu)` jointly with damped
//! Gauss-Newton steps.

mod group;
mod simplex;

pub use group::{diagonal_action, left_multiplication, skew_dim, Chart, GroupElement};
pub use simplex::{build_simplex_problem, SimplexProblem};

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::circle::{
    default_grid, dependence_coefficients, find_odd_zero, hadamard, relative_sigma_min, solve_circle_lemma, CircleOptions,
    ConvexCertificate, Tolerances,
};
use crate::error::{Error, Result};
use crate::geometry::{max_abs_pairwise_inner, SpherePoint};
use crate::linalg::{norm, Matrix};
use crate::odd_map::OddMap;

#[derive(Debug, Clone)]
pub struct ManifoldOptions {
    pub restarts: usize,
    /// Evaluations of `sigma_min` per restart.
    pub budget: usize,
    pub tolerances: Tolerances,
    pub seed: u64,
    /// Restarts run in batches of this size; results do not depend on it.
    pub threads: usize,
}

impl Default for ManifoldOptions {
    fn default() -> Self {
        Self {
            restarts: 64,
            budget: 100_000,
            tolerances: Tolerances::default(),
            seed: 0,
            threads: 1,
        }
    }
}

/// `sum_i mu_i f(g w_i)` for `g` acting on the whole domain.
pub fn sigma(map: &OddMap, g: &Matrix<f64>, w: &[SpherePoint<f64>], mu: &[f64]) -> Result<Vec<f64>> {
    if w.len() != mu.len() {
        return Err(Error::DimensionMismatch {
            expected: w.len(),
            found: mu.len(),
        });
    }
    if g.rows() != map.domain_dim() || g.cols() != map.domain_dim() {
        return Err(Error::DimensionMismatch {
            expected: map.domain_dim(),
            found: g.rows(),
        });
    }
    let mut out = vec![0.0; map.codomain_dim()];
    for (p, &m) in w.iter().zip(mu) {
        let v = map.evaluate(&g.mul_vec(p.coords()))?;
        for (o, x) in out.iter_mut().zip(v) {
            *o += m * x;
        }
    }
    Ok(out)
}

/// Group chart together with the points it moves.
trait Family: Sync {
    fn param_dim(&self) -> usize;
    fn element(&self, p: &[f64]) -> Result<GroupElement>;
    fn points(&self, g: &GroupElement) -> Result<Vec<Vec<f64>>>;
}

fn chart_element(r: usize, quaternion: bool, p: &[f64]) -> Result<GroupElement> {
    match r {
        0 => Ok(GroupElement::identity(0)),
        1 => Ok(GroupElement::from_angle(p[0])),
        2 if quaternion => Ok(GroupElement::from_quaternion_log([p[0], p[1], p[2]])),
        _ => GroupElement::from_skew(r, p),
    }
}

fn chart_dim(r: usize, quaternion: bool) -> usize {
    match r {
        0 => 0,
        1 => 1,
        2 if quaternion => 3,
        _ => skew_dim(r),
    }
}

struct SimplexFamily<'a> {
    problem: &'a SimplexProblem,
}

impl Family for SimplexFamily<'_> {
    fn param_dim(&self) -> usize {
        chart_dim(self.problem.r, false)
    }

    fn element(&self, p: &[f64]) -> Result<GroupElement> {
        chart_element(self.problem.r, false, p)
    }

    fn points(&self, g: &GroupElement) -> Result<Vec<Vec<f64>>> {
        Ok(self.problem.moved_vertices(g.matrix()))
    }
}

struct DiagonalFamily<'a> {
    r: usize,
    w: &'a [SpherePoint<f64>],
}

impl Family for DiagonalFamily<'_> {
    fn param_dim(&self) -> usize {
        chart_dim(self.r, true)
    }

    fn element(&self, p: &[f64]) -> Result<GroupElement> {
        chart_element(self.r, true, p)
    }

    fn points(&self, g: &GroupElement) -> Result<Vec<Vec<f64>>> {
        self.w.iter().map(|v| diagonal_action(g.matrix(), v.coords())).collect()
    }
}

#[derive(Debug, Clone)]
struct Candidate {
    params: Vec<f64>,
    mu: Vec<f64>,
    /// `||M mu|| / ||mu||_1`.
    residual: f64,
}

struct Objective<'a, F: Family> {
    map: &'a OddMap,
    family: &'a F,
    evals: usize,
}

impl<F: Family> Objective<'_, F> {
    fn matrix(&mut self, p: &[f64]) -> Result<Matrix<f64>> {
        self.evals += 1;
        let g = self.family.element(p)?;
        let cols = self.map.evaluate_all(&self.family.points(&g)?)?;
        Ok(Matrix::from_columns(&cols))
    }

    fn smallest(&mut self, p: &[f64]) -> Result<(Vec<f64>, f64)> {
        Ok(self.matrix(p)?.svd_jacobi().smallest())
    }
}

fn l1_residual(m: &Matrix<f64>, mu: &[f64]) -> f64 {
    let l1: f64 = mu.iter().map(|x| x.abs()).sum();
    norm(&m.mul_vec(mu)) / l1
}

/// Compass search on `sigma_min` with per-coordinate step adaptation.
fn coordinate_search<F: Family>(obj: &mut Objective<F>, p0: Vec<f64>, budget: usize, target: f64) -> Result<(Vec<f64>, f64)> {
    let dim = p0.len();
    let mut p = p0;
    let mut best = obj.smallest(&p)?.1;
    if dim == 0 {
        return Ok((p, best));
    }
    let mut step = vec![0.25f64; dim];
    while obj.evals < budget && best > target {
        if step.iter().all(|&s| s < 1e-10) {
            break;
        }
        for j in 0..dim {
            let mut moved = false;
            for dir in [1.0, -1.0] {
                let mut q = p.clone();
                q[j] += dir * step[j];
                let v = obj.smallest(&q)?.1;
                if v < best {
                    best = v;
                    p = q;
                    step[j] = (step[j] * 2.0).min(1.0);
                    moved = true;
                    break;
                }
            }
            if !moved {
                step[j] *= 0.5;
            }
        }
    }
    Ok((p, best))
}

/// Levenberg-Marquardt on `R(p, mu) = [M(p) mu; |mu|^2 - 1]`.
fn polish<F: Family>(obj: &mut Objective<F>, p0: Vec<f64>, tol: f64, budget: usize) -> Result<Candidate> {
    let dim = p0.len();
    let m0 = obj.matrix(&p0)?;
    let (mut mu, _) = m0.svd_jacobi().smallest();
    let mut p = p0;
    let residual_vec = |m: &Matrix<f64>, mu: &[f64]| -> Vec<f64> {
        let mut r = m.mul_vec(mu);
        r.push(mu.iter().map(|x| x * x).sum::<f64>() - 1.0);
        r
    };
    let mut m = m0;
    let mut res = residual_vec(&m, &mu);
    let mut damping = 1e-6;
    let h = 1e-7;
    for _ in 0..60 {
        if obj.evals >= budget || l1_residual(&m, &mu) <= 0.01 * tol {
            break;
        }
        let d = m.rows();
        let nmu = mu.len();
        let unknowns = dim + nmu;
        let mut jac = Matrix::zeros(d + 1, unknowns);
        for j in 0..dim {
            let mut pp = p.clone();
            pp[j] += h;
            let mut pm = p.clone();
            pm[j] -= h;
            let fp = obj.matrix(&pp)?.mul_vec(&mu);
            let fm = obj.matrix(&pm)?.mul_vec(&mu);
            for i in 0..d {
                jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
            }
        }
        for i in 0..d {
            for k in 0..nmu {
                jac[(i, dim + k)] = m[(i, k)];
            }
        }
        for k in 0..nmu {
            jac[(d, dim + k)] = 2.0 * mu[k];
        }
        let jt = jac.transpose();
        let jtj = jt.matmul(&jac);
        let grad = jt.mul_vec(&res);
        let cost = norm(&res);
        let mut improved = false;
        for _ in 0..12 {
            let mut a = jtj.clone();
            for i in 0..unknowns {
                a[(i, i)] += damping * (1.0 + jtj[(i, i)]);
            }
            let Some(delta) = a.solve(&grad) else {
                damping *= 10.0;
                continue;
            };
            let p_new: Vec<f64> = p.iter().zip(&delta).map(|(x, dx)| x - dx).collect();
            let mu_new: Vec<f64> = mu.iter().zip(&delta[dim..]).map(|(x, dx)| x - dx).collect();
            let m_new = obj.matrix(&p_new)?;
            let res_new = residual_vec(&m_new, &mu_new);
            if norm(&res_new) < cost {
                p = p_new;
                mu = mu_new;
                m = m_new;
                res = res_new;
                damping = (damping * 0.3).max(1e-15);
                improved = true;
                break;
            }
            damping *= 10.0;
        }
        if !improved {
            break;
        }
    }
    let (best_mu, _) = m.svd_jacobi().smallest();
    let (mu, residual) = {
        let a = l1_residual(&m, &best_mu);
        let b = l1_residual(&m, &mu);
        if a <= b { (best_mu, a) } else { (mu, b) }
    };
    Ok(Candidate { params: p, mu, residual })
}

fn random_params(r: usize, quaternion: bool, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let dim = chart_dim(r, quaternion);
    match (r, quaternion) {
        (1, _) => vec![rng.random_range(-PI..PI)],
        (2, true) => {
            let dir: Vec<f64> = (0..3).map(|_| StandardNormal.sample(rng)).collect();
            let n = norm(&dir).max(1e-12);
            let t = rng.random_range(0.0..PI);
            dir.iter().map(|x| x / n * t).collect()
        }
        _ => (0..dim).map(|_| StandardNormal.sample(rng)).collect(),
    }
}

fn run_restart<F: Family>(
    map: &OddMap,
    family: &F,
    quaternion: bool,
    r: usize,
    opts: &ManifoldOptions,
    restart: usize,
) -> Result<Candidate> {
    let p0 = if restart == 0 {
        vec![0.0; family.param_dim()]
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(restart as u64);
        random_params(r, quaternion, &mut rng)
    };
    let tol = opts.tolerances.residual;
    let mut obj = Objective {
        map,
        family,
        evals: 0,
    };
    let coord_budget = opts.budget * 3 / 4;
    let (p, _) = coordinate_search(&mut obj, p0, coord_budget, 0.01 * tol)?;
    polish(&mut obj, p, tol, opts.budget)
}

/// Runs restarts in index order in batches of `opts.threads`; the first
/// restart (by index) that reaches the tolerance wins. Otherwise returns the
/// candidate of lowest residual, ties broken by index.
fn multistart<F: Family>(map: &OddMap, family: &F, quaternion: bool, r: usize, opts: &ManifoldOptions) -> Result<(usize, Candidate, bool)> {
    let tol = opts.tolerances.residual;
    let batch = opts.threads.max(1);
    let pool = if batch > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(batch)
                .build()
                .map_err(|e| Error::Numerical(e.to_string()))?,
        )
    } else {
        None
    };
    let mut best: Option<(usize, Candidate)> = None;
    let mut start = 0;
    while start < opts.restarts {
        let end = (start + batch).min(opts.restarts);
        let run = |i: usize| run_restart(map, family, quaternion, r, opts, i);
        let results: Vec<Result<Candidate>> = match &pool {
            Some(pool) => pool.install(|| (start..end).into_par_iter().map(run).collect()),
            None => (start..end).map(run).collect(),
        };
        for (i, res) in (start..end).zip(results) {
            let Ok(c) = res else { continue };
            if c.residual <= tol {
                return Ok((i, c, true));
            }
            if best.as_ref().is_none_or(|(_, b)| c.residual < b.residual) {
                best = Some((i, c));
            }
        }
        start = end;
    }
    let (i, c) = best.ok_or_else(|| Error::Numerical("every restart failed".into()))?;
    Ok((i, c, false))
}

fn audit(map: &OddMap, tol: &Tolerances, seed: u64) -> Result<()> {
    let odd = map.oddness_audit(tol.oddness_samples, seed);
    if odd > tol.oddness {
        return Err(Error::NotOdd { residual: odd });
    }
    Ok(())
}

fn finish<F: Family>(
    map: &OddMap,
    family: &F,
    opts: &ManifoldOptions,
    found: (usize, Candidate, bool),
    bound: Option<f64>,
) -> Result<ConvexCertificate> {
    let (restart, cand, converged) = found;
    let g = family.element(&cand.params)?;
    let points = family
        .points(&g)?
        .into_iter()
        .map(SpherePoint::normalized)
        .collect::<Result<Vec<_>>>()?;
    let mut cert = ConvexCertificate::assemble(map, points, &cand.mu, opts.tolerances, Some(opts.seed))?;
    cert.base = Some(g.to_base());
    cert.diameter_bound = bound;
    cert.flags.push(format!("restart={restart}"));
    if converged && cert.residual <= opts.tolerances.residual {
        Ok(cert)
    } else {
        cert.flags.push("not-converged".into());
        Err(Error::NotConverged {
            best_residual: cert.residual,
            restarts: opts.restarts,
            best: Box::new(cert),
        })
    }
}

/// Witness for an odd map `S(R^n) -> R^{n + 2^r - 1}` of the form
/// `{e_i g v_i}` over a regular simplex, with `g` fixing `V_-`.
pub fn solve_simplex_theorem(map: &OddMap, opts: &ManifoldOptions) -> Result<ConvexCertificate> {
    let n = map.domain_dim();
    let problem = build_simplex_problem(n)?;
    let expected = n + (1 << problem.r) - 1;
    if map.codomain_dim() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            found: map.codomain_dim(),
        });
    }
    audit(map, &opts.tolerances, opts.seed)?;
    let bound = Some(PI - (1.0 / n as f64).acos());
    let family = SimplexFamily { problem: &problem };
    if problem.r == 1 {
        return simplex_circle(map, &problem, &family, opts, bound);
    }
    let found = multistart(map, &family, false, problem.r, opts)?;
    finish(map, &family, opts, found, bound)
}

/// `r = 1`: the coefficient matrix is square and its determinant is odd
/// under `g -> -g`, so the circle zero finder applies.
fn simplex_circle(
    map: &OddMap,
    problem: &SimplexProblem,
    family: &SimplexFamily,
    opts: &ManifoldOptions,
    bound: Option<f64>,
) -> Result<ConvexCertificate> {
    let tol = &opts.tolerances;
    let columns = |theta: f64| -> Result<Vec<Vec<f64>>> {
        let g = GroupElement::from_angle(theta);
        map.evaluate_all(&problem.moved_vertices(g.matrix()))
    };
    let cols_n = problem.n + 1;
    let zero = find_odd_zero(
        |theta| {
            let cols = columns(theta)?;
            Ok((Matrix::from_columns(&cols).determinant(), hadamard(&cols)))
        },
        |theta| Ok(relative_sigma_min(&columns(theta)?)),
        default_grid(cols_n),
        tol,
    )?;
    let mu = dependence_coefficients(&columns(zero.theta)?, tol.singular_gap)?;
    let cand = Candidate {
        params: vec![zero.theta],
        mu,
        residual: 0.0,
    };
    let mut cert = finish(map, family, opts, (0, cand, true), bound)?;
    cert.theta = Some(zero.theta);
    cert.flags.retain(|f| !f.starts_with("restart="));
    if zero.degenerate {
        cert.flags.push("degenerate".into());
    }
    if cert.residual > tol.residual {
        return Err(Error::ResidualExceeded {
            residual: cert.residual,
            tol: tol.residual,
        });
    }
    Ok(cert)
}

/// Witness `{e_i g w_i}` for an odd map `S(R^{2^r n}) -> R^{2^r k + 2^r - 1}`
/// and `2^r k + 1` given points, with `SO(2^r)` acting diagonally.
pub fn solve_lemma_gen(map: &OddMap, w: &[SpherePoint<f64>], r: usize, opts: &ManifoldOptions) -> Result<ConvexCertificate> {
    let block = 1usize << r;
    let count = w.len();
    if count < block + 1 || !(count - 1).is_multiple_of(block) {
        return Err(Error::InvalidParameter(format!(
            "need 2^r k + 1 points with k >= 1 for r={r}, got {count}"
        )));
    }
    let dom = map.domain_dim();
    if !dom.is_multiple_of(block) {
        return Err(Error::InvalidParameter(format!(
            "domain dimension {dom} is not a multiple of 2^r = {block}"
        )));
    }
    for p in w {
        if p.dim() != dom {
            return Err(Error::DimensionMismatch {
                expected: dom,
                found: p.dim(),
            });
        }
    }
    let expected = count + block - 2;
    if map.codomain_dim() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            found: map.codomain_dim(),
        });
    }
    audit(map, &opts.tolerances, opts.seed)?;
    let delta = max_abs_pairwise_inner(w)?;
    let bound = (delta < 1.0).then(|| PI - delta.acos());

    match r {
        0 => {
            let cols = map.evaluate_all(w)?;
            let mu = dependence_coefficients(&cols, opts.tolerances.singular_gap)?;
            let mut cert = ConvexCertificate::assemble(map, w.to_vec(), &mu, opts.tolerances, Some(opts.seed))?;
            cert.base = Some(GroupElement::identity(0).to_base());
            cert.diameter_bound = bound;
            if cert.residual > opts.tolerances.residual {
                return Err(Error::ResidualExceeded {
                    residual: cert.residual,
                    tol: opts.tolerances.residual,
                });
            }
            Ok(cert)
        }
        1 => {
            let circle = CircleOptions {
                grid: None,
                tolerances: opts.tolerances,
                seed: opts.seed,
            };
            let mut cert = solve_circle_lemma(map, w, &circle)?;
            cert.base = Some(GroupElement::from_angle(cert.theta.unwrap_or(0.0)).to_base());
            cert.diameter_bound = bound;
            Ok(cert)
        }
        _ => {
            let family = DiagonalFamily { r, w };
            let found = multistart(map, &family, true, r, opts)?;
            finish(map, &family, opts, found, bound)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::odd_map::OddMapDescriptor;

    #[test]
    fn sigma_basis_and_antisymmetry() {
        let map = OddMapDescriptor::random_trig(3, 4, 3, 2).unwrap().compile().unwrap();
        let problem = build_simplex_problem(3).unwrap();
        let g = problem.embed(GroupElement::from_angle(0.9).matrix());
        let w = &problem.vertices;
        let e2 = [0.0, 0.0, 1.0, 0.0];
        let s = sigma(&map, &g, w, &e2).unwrap();
        let direct = map.evaluate(&g.mul_vec(w[2].coords())).unwrap();
        for (a, b) in s.iter().zip(&direct) {
            assert!((a - b).abs() < 1e-15);
        }
        let mu = [0.3, -0.5, 0.1, 0.8];
        let neg: Vec<f64> = mu.iter().map(|x| -x).collect();
        let a = sigma(&map, &g, w, &mu).unwrap();
        let b = sigma(&map, &g, w, &neg).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(*x, -*y);
        }
    }

    #[test]
    fn simplex_inclusion_uniform() {
        for n in [2, 3, 4] {
            let problem = build_simplex_problem(n).unwrap();
            let d = n + (1 << problem.r) - 1;
            let map = OddMapDescriptor::inclusion(n, d).unwrap().compile().unwrap();
            let cert = solve_simplex_theorem(&map, &ManifoldOptions::default()).unwrap();
            for l in &cert.lambdas {
                assert!((l - 1.0 / (n as f64 + 1.0)).abs() < 1e-6, "n={n}: {:?}", cert.lambdas);
            }
        }
    }

    #[test]
    fn lemma_r0_direct() {
        let map = OddMapDescriptor::random_trig(3, 2, 3, 9).unwrap().compile().unwrap();
        let w = crate::geometry::regular_simplex::<f64>(3).unwrap()[..3].to_vec();
        let cert = solve_lemma_gen(&map, &w, 0, &ManifoldOptions::default()).unwrap();
        assert!(cert.residual <= 1e-9);
    }
}
