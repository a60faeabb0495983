mod common;

use std::f64::consts::PI;

use antipode_core::circle::{caratheodory_reduce, dependence_coefficients, phi, solve_roots_of_unity, CircleOptions};
use antipode_core::geometry::roots_of_unity_points;
use antipode_core::hull::{contains_origin, Verdict};
use antipode_core::manifold::{solve_lemma_gen, ManifoldOptions};
use antipode_core::odd_map::OddMapDescriptor;
use antipode_core::SpherePoint;
use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> SpherePoint<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        if v.iter().map(|x| x * x).sum::<f64>() > 1e-3 {
            return SpherePoint::normalized(v).unwrap();
        }
    }
}

#[test]
fn hull_matches_rational_lp() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut inside = 0;
    for _ in 0..200 {
        let d = rng.random_range(1..=3usize);
        let m = rng.random_range(1..=6usize);
        let pts: Vec<Vec<i64>> = (0..m).map(|_| (0..d).map(|_| rng.random_range(-4..=4)).collect()).collect();
        let exact = rational_contains_origin(&from_i64_points(&pts));
        let fpts: Vec<Vec<f64>> = pts.iter().map(|p| p.iter().map(|&x| x as f64).collect()).collect();
        let v = contains_origin(&fpts, 1e-9).unwrap();
        assert_eq!(v.is_inside(), exact, "{pts:?}");
        inside += exact as usize;
    }
    assert!(inside > 20 && inside < 180, "instances are unbalanced: {inside}");
}

#[test]
fn three_point_example_weights() {
    // Exact weights from the rational kernel of [(1,0),(0,1),(-1,-1)].
    let cols = from_i64_points(&[vec![1, 0], vec![0, 1], vec![-1, -1]]);
    let k = normalize_l1(&rational_kernel(&cols).unwrap());
    assert_eq!(k, vec![1.0 / 3.0; 3]);
    let v = contains_origin(&[[1.0, 0.0], [0.0, 1.0], [-1.0, -1.0]], 1e-9).unwrap();
    for (a, b) in v.lambdas.unwrap().iter().zip(&k) {
        assert!((a - b).abs() < 1e-12);
    }
    let out = contains_origin(&[[1.0, 0.0], [0.0, 1.0]], 1e-9).unwrap();
    assert_eq!(out.verdict, Verdict::Outside);
    assert!((out.margin.unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
}

#[test]
fn dependence_matches_exact_kernel() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..60 {
        let d = rng.random_range(1..=6usize);
        let cols: Vec<Vec<f64>> = (0..=d).map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let mu = dependence_coefficients(&cols, 1e-12).unwrap();
        let exact = normalize_l1(&rational_kernel(&rational_points(&cols)).unwrap());
        let fp = full_pivot_null(&cols);
        for i in 0..=d {
            assert!((mu[i] - exact[i]).abs() < 1e-10, "trial {trial}: {mu:?} vs {exact:?}");
            assert!((fp[i] - exact[i]).abs() < 1e-9, "full pivot disagrees on trial {trial}");
        }
    }
}

#[test]
fn r0_solver_matches_rational_elimination() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for trial in 0..50u64 {
        let n = rng.random_range(2..=4usize);
        let k = rng.random_range(2..=5usize);
        // On the circle degree 3 spans only four functions; keep the kernel a line.
        let degree = if n == 2 { 2 * k + 1 } else { 3 };
        let map = OddMapDescriptor::random_trig(n, k, degree, trial).unwrap().compile().unwrap();
        let w: Vec<SpherePoint<f64>> = (0..=k).map(|_| random_unit(&mut rng, n)).collect();
        let cert = solve_lemma_gen(&map, &w, 0, &ManifoldOptions::default()).unwrap();
        let cols: Vec<Vec<f64>> = w.iter().map(|p| map.evaluate(p.coords()).unwrap()).collect();
        let exact = normalize_l1(&rational_kernel(&rational_points(&cols)).unwrap());
        for i in 0..=k {
            let signed = cert.signs[i].value::<f64>() * cert.lambdas[i];
            assert!((signed - exact[i]).abs() < 1e-10, "trial {trial} n={n} k={k}: {signed} vs {} flags {:?} lambdas {:?} exact {exact:?}", exact[i], cert.flags, cert.lambdas);
        }
    }
}

#[test]
fn circle_zero_is_on_dense_grid_sign_change() {
    for k in 1..=3usize {
        for seed in 0..5u64 {
            let d = 2 * k + 1;
            let map = OddMapDescriptor::random_trig(2, d, d, seed).unwrap().compile().unwrap();
            let w = roots_of_unity_points(k, &SpherePoint::basis(2, 0)).unwrap();
            let cert = solve_roots_of_unity(&map, &CircleOptions::default()).unwrap();
            let theta = cert.theta.unwrap();
            let f = |t: f64| {
                let cols: Vec<Vec<f64>> =
                    w.iter().map(|p| map.evaluate(p.rotate(t).unwrap().coords()).unwrap()).collect();
                det(&cols)
            };
            let changes = dense_sign_changes(f, 10_000);
            assert!(!changes.is_empty());
            let h = PI / 10_000.0;
            assert!(
                changes.iter().any(|&(a, b)| theta >= a - h && theta <= b + h),
                "k={k} seed={seed} theta={theta}"
            );
            let scale = (0..64).map(|j| f(PI * j as f64 / 64.0).abs()).fold(0.0, f64::max);
            assert!(phi(&map, &w, theta).unwrap().abs() <= 1e-8 * scale);
        }
    }
}

#[test]
fn caratheodory_support_is_minimal_enough() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..40 {
        let d = rng.random_range(1..=3usize);
        let m = rng.random_range(d + 2..=7usize);
        let pts: Vec<Vec<f64>> = (0..m).map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let raw: Vec<f64> = (0..m).map(|_| rng.random_range(0.1..1.0)).collect();
        let s: f64 = raw.iter().sum();
        let lambdas: Vec<f64> = raw.iter().map(|x| x / s).collect();
        let target: Vec<f64> = (0..d).map(|i| (0..m).map(|j| lambdas[j] * pts[j][i]).sum()).collect();
        let shifted: Vec<Vec<f64>> = pts.iter().map(|p| p.iter().zip(&target).map(|(a, b)| a - b).collect()).collect();
        let red = caratheodory_reduce(&shifted, &lambdas, 1e-9).unwrap();
        assert!(red.indices.len() <= d + 1);
        let exact_min = min_support(&rational_points(&shifted)).expect("target lies in the hull");
        assert!(red.indices.len() >= exact_min);
        let res: f64 = (0..d)
            .map(|i| red.indices.iter().zip(&red.lambdas).map(|(&j, l)| l * shifted[j][i]).sum::<f64>().powi(2))
            .sum::<f64>()
            .sqrt();
        assert!(res < 1e-9);
    }
}
