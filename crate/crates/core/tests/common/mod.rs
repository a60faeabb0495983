//! Independent oracles shared by the integration tests. Nothing here calls
//! into the solver code paths it is used to check.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, Zero};

pub fn rat(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite")
}

pub fn rat_int(x: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

pub fn to_f64(x: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().expect("representable")
}

/// Reduced row echelon form in place; returns the pivot columns.
fn rref(a: &mut [Vec<BigRational>]) -> Vec<usize> {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let inv = a[r][c].recip();
        for x in a[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in 0..cols {
                    let t = &a[r][j] * &f;
                    a[i][j] -= t;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    pivots
}

/// Exact kernel of the matrix with the given columns when it is one
/// dimensional.
pub fn rational_kernel(columns: &[Vec<BigRational>]) -> Option<Vec<BigRational>> {
    let m = columns.len();
    let d = columns[0].len();
    let mut a: Vec<Vec<BigRational>> = (0..d).map(|i| (0..m).map(|j| columns[j][i].clone()).collect()).collect();
    let pivots = rref(&mut a);
    if m - pivots.len() != 1 {
        return None;
    }
    let free = (0..m).find(|c| !pivots.contains(c))?;
    let mut x = vec![BigRational::zero(); m];
    x[free] = BigRational::one();
    for (row, &pc) in pivots.iter().enumerate() {
        x[pc] = -a[row][free].clone();
    }
    Some(x)
}

/// `x / ||x||_1` with the largest-magnitude entry positive, in `f64`.
pub fn normalize_l1(x: &[BigRational]) -> Vec<f64> {
    let l1 = x.iter().fold(BigRational::zero(), |acc, v| acc + v.abs());
    let big = x.iter().max_by(|a, b| a.abs().cmp(&b.abs())).expect("nonempty");
    let s = if big.is_negative() { -l1 } else { l1 };
    x.iter().map(|v| to_f64(&(v / &s))).collect()
}

/// Unique solution of `sum c_j p_j = 0, sum c_j = 1` for an affinely
/// independent subset.
fn barycentric(points: &[&Vec<BigRational>]) -> Option<Vec<BigRational>> {
    let k = points.len();
    let d = points[0].len();
    let mut a: Vec<Vec<BigRational>> = (0..d)
        .map(|i| {
            let mut row: Vec<BigRational> = points.iter().map(|p| p[i].clone()).collect();
            row.push(BigRational::zero());
            row
        })
        .collect();
    let mut ones = vec![BigRational::one(); k];
    ones.push(BigRational::one());
    a.push(ones);
    let pivots = rref(&mut a);
    if pivots.contains(&k) || pivots.len() != k {
        return None;
    }
    Some((0..k).map(|row| a[row][k].clone()).collect())
}

fn subsets(m: usize, size: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, m: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            cur.push(i);
            rec(i + 1, m, size, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, m, size, &mut Vec::new(), &mut out);
    out
}

/// Smallest number of points whose hull contains the origin, found by
/// enumerating affinely independent subsets in exact arithmetic.
pub fn min_support(points: &[Vec<BigRational>]) -> Option<usize> {
    let d = points[0].len();
    for size in 1..=(d + 1).min(points.len()) {
        for s in subsets(points.len(), size) {
            let sel: Vec<&Vec<BigRational>> = s.iter().map(|&i| &points[i]).collect();
            if let Some(c) = barycentric(&sel) {
                if c.iter().all(|x| !x.is_negative()) {
                    return Some(size);
                }
            }
        }
    }
    None
}

/// Exact LP feasibility of `0 in conv(points)`.
pub fn rational_contains_origin(points: &[Vec<BigRational>]) -> bool {
    min_support(points).is_some()
}

pub fn rational_points(points: &[Vec<f64>]) -> Vec<Vec<BigRational>> {
    points.iter().map(|p| p.iter().map(|&x| rat(x)).collect()).collect()
}

/// Null vector of a `d x (d+1)` matrix by Gaussian elimination with full
/// pivoting, `l1`-normalized with the largest entry positive.
pub fn full_pivot_null(columns: &[Vec<f64>]) -> Vec<f64> {
    let m = columns.len();
    let d = columns[0].len();
    let mut a: Vec<Vec<f64>> = (0..d).map(|i| (0..m).map(|j| columns[j][i]).collect()).collect();
    let mut perm: Vec<usize> = (0..m).collect();
    let rank = d.min(m - 1);
    for k in 0..rank {
        let (mut pi, mut pj, mut best) = (k, k, 0.0);
        for (i, row) in a.iter().enumerate().skip(k) {
            for (j, v) in row.iter().enumerate().skip(k) {
                if v.abs() > best {
                    (pi, pj, best) = (i, j, v.abs());
                }
            }
        }
        a.swap(k, pi);
        for row in a.iter_mut() {
            row.swap(k, pj);
        }
        perm.swap(k, pj);
        for i in k + 1..d {
            let f = a[i][k] / a[k][k];
            for j in k..m {
                a[i][j] -= f * a[k][j];
            }
        }
    }
    // Free variable is the last permuted column.
    let mut y = vec![0.0; m];
    y[rank] = 1.0;
    for k in (0..rank).rev() {
        let s: f64 = (k + 1..m).map(|j| a[k][j] * y[j]).sum();
        y[k] = -s / a[k][k];
    }
    let mut x = vec![0.0; m];
    for (k, &p) in perm.iter().enumerate() {
        x[p] = y[k];
    }
    let l1: f64 = x.iter().map(|v| v.abs()).sum();
    let big = x.iter().cloned().fold(0.0f64, |a, b| if b.abs() > a.abs() { b } else { a });
    let s = if big < 0.0 { -l1 } else { l1 };
    x.iter().map(|v| v / s).collect()
}

/// Plain `det` by cofactor-free Gaussian elimination with partial pivoting,
/// written independently of the crate's linear algebra.
pub fn det(columns: &[Vec<f64>]) -> f64 {
    let n = columns.len();
    let mut a: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| columns[j][i]).collect()).collect();
    let mut det = 1.0;
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
        if a[p][k] == 0.0 {
            return 0.0;
        }
        if p != k {
            a.swap(p, k);
            det = -det;
        }
        det *= a[k][k];
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
        }
    }
    det
}

/// Sign changes of `f` on a uniform grid of `samples` intervals over
/// `[0, pi]`, as grid intervals.
pub fn dense_sign_changes(mut f: impl FnMut(f64) -> f64, samples: usize) -> Vec<(f64, f64)> {
    let h = std::f64::consts::PI / samples as f64;
    let mut out = Vec::new();
    let mut prev = f(0.0);
    for j in 1..=samples {
        let t = j as f64 * h;
        let v = f(t);
        if prev == 0.0 || prev.signum() != v.signum() {
            out.push((t - h, t));
        }
        prev = v;
    }
    out
}

pub fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

pub fn from_i64_points(points: &[Vec<i64>]) -> Vec<Vec<BigRational>> {
    points.iter().map(|p| p.iter().map(|&x| rat_int(x)).collect()).collect()
}

pub fn rational_from_ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from_i64(num).unwrap(), BigInt::from_i64(den).unwrap())
}
