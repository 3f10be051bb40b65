use super::*;
use core::f64::consts::PI;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use crate::test_support::{calibrated, central_difference, q};

#[test]
fn action_of_zero_is_zero() {
    let p = CrossSectionProfile::zero(16);
    assert_eq!(energy_i(&p, &q(0.7)).unwrap(), 0.0);
    assert!(grad_i(&p, &q(0.7)).unwrap().iter().all(|g| *g == 0.0));
}

#[test]
fn action_of_sines_matches_exact_integrals() {
    // ∫cos² = 1/2, ∫sin⁴ = 3/8, ∫sin⁶ = 5/16 over (0,1) with argument πx.
    let e = energy_i(&CrossSectionProfile::sine(512, 1.0), &q(1.0)).unwrap();
    assert!((e - (PI * PI / 4.0 - 3.0 / 32.0 + 5.0 / 96.0)).abs() < 1e-3);
    let e = energy_i(&CrossSectionProfile::sine(512, 2.0), &q(0.0)).unwrap();
    assert!((e - (PI * PI - 1.5)).abs() < 1e-2);
}

#[test]
fn short_profiles_rejected() {
    assert!(CrossSectionProfile::new(vec![0.0, 0.0], 1.0).is_err());
    assert!(CrossSectionProfile::new(vec![0.0, 1.0, 0.5], 1.0).is_err());
    assert!(minimize_i(&q(1.0), 1, &[]).is_err());
}

#[test]
fn gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let nx = 33;
    for _ in 0..100 {
        let lambda = rng.gen_range(0.0..2.0);
        let p = CrossSectionProfile::from_fn(nx, |_| rng.gen_range(-2.0..2.0));
        let g = grad_i(&p, &q(lambda)).unwrap();
        assert_eq!(g[0], 0.0);
        assert_eq!(g[nx], 0.0);
        let e = |v: &[f64]| action(v, &q(lambda));
        let (mut err, mut scale) = (0.0f64, 0.0f64);
        for i in 1..nx {
            let fd = central_difference(p.values(), i, 1e-4, e);
            err = err.max((fd - g[i]).abs());
            scale = scale.max(g[i].abs());
        }
        assert!(err <= 1e-6 * scale, "relative error {}", err / scale);
    }
}

#[test]
fn large_lambda_collapses_to_zero() {
    let min = minimize_i(&q(3.0), 64, &default_starts(&q(3.0), 64)).unwrap();
    assert!(min.m.abs() <= 1e-8);
    assert!(min.minimizer.max_norm() < COLLAPSE_THRESHOLD);
}

#[test]
fn small_lambda_goes_negative() {
    // Scaled-sine test function: I_λ(a·sin πx) for the best sampled a.
    let lambda = 0.01;
    let nx = 128;
    let oracle = (1..=100)
        .map(|k| energy_i(&CrossSectionProfile::sine(nx, 0.1 * k as f64), &q(lambda)).unwrap())
        .fold(f64::INFINITY, f64::min);
    assert!(oracle < -0.1);
    let min = minimize_i(&q(lambda), nx, &default_starts(&q(lambda), nx)).unwrap();
    assert!(min.m <= oracle);
}

#[test]
fn m_lambda_is_nonpositive_and_monotone() {
    let nx = 64;
    let mut last = f64::NEG_INFINITY;
    for k in 1..=12 {
        let lambda = 0.004 * k as f64;
        let min = minimize_i(&q(lambda), nx, &default_starts(&q(lambda), nx)).unwrap();
        assert!(min.m <= 0.0);
        assert!(last <= min.m + 1e-10, "m not monotone at λ={lambda}");
        last = min.m;
    }
}

#[test]
fn absolute_value_does_not_raise_action() {
    let nx = 64;
    let params = q(0.05);
    // Sign change exactly at a node: identical action.
    let mut p = CrossSectionProfile::from_fn(nx, |x| 3.0 * libm::sin(2.0 * PI * x));
    p.values[nx / 2] = 0.0;
    let e = energy_i(&p, &params).unwrap();
    assert_eq!(energy_i(&p.abs(), &params).unwrap(), e);
    // General profiles: never larger.
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let p = CrossSectionProfile::from_fn(nx, |_| rng.gen_range(-4.0..4.0));
        assert!(energy_i(&p.abs(), &params).unwrap() <= energy_i(&p, &params).unwrap());
    }
}

#[test]
fn lambda_star_brackets_and_neighbours() {
    let res = calibrated(512);
    let (lo, hi) = res.bracket;
    assert!(lo <= res.lambda_star && res.lambda_star <= hi);
    assert!(hi - lo <= 1e-9);
    assert!(res.phi.action.abs() <= ZERO_ACTION_TOL * res.phi.max_norm());
    let nx = 512;
    let below = res.lambda_star - 0.01;
    let above = res.lambda_star + 0.01;
    assert!(minimize_i(&q(below), nx, &default_starts(&q(below), nx)).unwrap().m < 0.0);
    let up = minimize_i(&q(above), nx, &default_starts(&q(above), nx)).unwrap();
    assert!(up.m.abs() <= 1e-8);
    // Gradient at the calibrated profile is at solver tolerance.
    let g = grad_i(&res.phi, &q(res.lambda_star)).unwrap();
    let gn = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(gn <= 1e-14 * nx as f64 * 10.0, "grad {gn}");
}

#[test]
fn bisection_tolerances_nest() {
    let a = lambda_star_bisection(64, 1e-3).unwrap();
    let b = lambda_star_bisection(64, 1e-6).unwrap();
    assert!((a.bracket.0 - b.bracket.0).abs() <= 1e-3);
    assert!((a.lambda_star - b.lambda_star).abs() <= 1e-3);
}

#[test]
fn timemap_agrees_with_bisection() {
    let tm = lambda_star_timemap(1e-9).unwrap();
    let r = timemap_residuals(tm).unwrap().unwrap();
    assert!(r.half_width.abs() <= 1e-9 && r.action.abs() <= 1e-9);
    let disc = calibrated(512).lambda_star;
    assert!((tm - disc).abs() <= 1e-3 * tm, "timemap {tm} vs grid {disc}");
    // Above λ* the branch has strictly positive action.
    let up = timemap_residuals(1.05 * tm).unwrap().unwrap();
    assert!(up.half_width.abs() <= 1e-9);
    assert!(up.action > 1.0);
}

#[test]
fn shooting_basics() {
    let t = shoot(&q(0.5), 0.0, 64).unwrap();
    assert!(t.phi.iter().all(|v| *v == 0.0));
    // f'(0) = 0: tiny slopes stay in the linear regime φ'' ≈ 0.
    let s = 1e-4;
    let t = shoot(&q(0.0), s, 256).unwrap();
    assert!((t.endpoint() - s).abs() < 1e-12);
    assert!(shoot(&q(0.5), 1.0, 8).is_err());
    assert!(matches!(shoot(&q(0.02), 40.0, 256), Err(Error::BlowUp { .. })));
}

#[test]
fn shooting_endpoint_changes_sign() {
    let lambda = calibrated(512).lambda_star;
    let a = shoot(&q(lambda), 5.0, 1024).unwrap().endpoint();
    let b = shoot(&q(lambda), 15.0, 1024).unwrap().endpoint();
    assert!(a > 0.0 && b < 0.0);
}

#[test]
fn shooting_reproduces_minimizer() {
    let res = calibrated(512);
    let params = q(res.lambda_star);
    let s = bvp_by_shooting(&params, 512, 64 * 512).unwrap();
    assert!(s.is_positive());
    assert!(s.action.abs() <= 1e-4, "action {}", s.action);
    let diff = max_diff(&s, &res.phi);
    assert!(diff <= 1e-4, "shooting vs descent {diff}");
    for i in 0..=512 {
        assert!((s.values()[i] - s.values()[512 - i]).abs() <= 1e-8);
    }
}

#[test]
fn no_positive_solution_far_above_fold() {
    assert!(matches!(bvp_by_shooting(&q(1.0), 64, 1024), Err(Error::NoPositiveSolution { .. })));
    assert!(matches!(minimal_minimizer(&q(1.0), 64), Err(Error::H2Violated { .. })));
}

#[test]
fn minimal_minimizer_properties() {
    let res = calibrated(64);
    assert!(res.phi.is_positive());
    assert!(res.candidates_ordered);
    for c in &res.candidates {
        assert!(c.values().iter().zip(res.phi.values()).all(|(a, b)| *a >= b - 1e-6));
    }
    assert!(res.phi.action.abs() <= 1e-10);
}

#[test]
fn action_converges_under_refinement() {
    let lambda = 0.5 * calibrated(64).lambda_star;
    let ms: Vec<f64> = [64, 128, 256, 512]
        .iter()
        .map(|&nx| minimize_i(&q(lambda), nx, &default_starts(&q(lambda), nx)).unwrap().m)
        .collect();
    for w in ms.windows(3) {
        let r = (w[0] - w[1]).abs() / (w[1] - w[2]).abs();
        assert!(r >= 3.0, "refinement ratio {r} ({ms:?})");
    }
}


