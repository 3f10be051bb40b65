use super::*;
use crate::cross_section::energy_i;
use crate::diagnostics::{check_bounds, check_monotone, hamiltonian_trace, limit_profile_errors};
use crate::test_support::{calibrated, central_difference, continuation, q};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn config(nx: usize) -> SolverConfig {
    SolverConfig { nx, nz_per_unit: nx, ..Default::default() }
}

#[test]
fn zero_field_has_zero_energy_and_gradient() {
    let f = CylinderField::from_fn(8, 16, 2.0, |_, _| 0.0).unwrap();
    assert_eq!(energy_j(&f, &q(0.4)), 0.0);
    assert!(grad_j(&f, &q(0.4)).iter().all(|g| *g == 0.0));
}

#[test]
fn constructor_rejects_bad_fields() {
    assert!(CylinderField::new(4, 4, 1.0, vec![0.0; 24]).is_err());
    assert!(CylinderField::new(4, 4, 0.0, vec![0.0; 25]).is_err());
    let mut v = vec![0.0; 25];
    v[5] = 1.0;
    assert!(CylinderField::new(4, 4, 1.0, v).is_err());
    let mut v = vec![0.0; 25];
    v[6] = f64::NAN;
    assert!(CylinderField::new(4, 4, 1.0, v).is_err());
}

#[test]
fn extruded_profile_energy_is_length_times_action() {
    let cal = calibrated(64);
    let p = q(cal.lambda_star);
    let l = 3.0;
    let f = CylinderField::separable(&cal.phi, 96, l, |_| 1.0).unwrap();
    let i = energy_i(&cal.phi, &p).unwrap();
    assert!((energy_j(&f, &p) - 2.0 * l * i).abs() <= 1e-8);
    assert!(energy_j(&f, &p).abs() <= 1e-8);
}

#[test]
fn ramp_initializer_has_positive_energy() {
    let cal = calibrated(64);
    let f = ramp_field(6.0, &cal.phi, &config(64)).unwrap();
    assert!(energy_j(&f, &q(cal.lambda_star)) > 0.0);
    assert!(check_monotone(&f).pass);
    assert!(check_bounds(&f, &cal.phi).unwrap().max_violation <= 0.0);
    assert_eq!(f.row(0), vec![0.0; 65].as_slice());
    assert_eq!(f.row(f.nz()), cal.phi.values());
}

#[test]
fn gradient_matches_central_differences() {
    let (nx, nz) = (16, 32);
    let p = q(0.02);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..5 {
        let f = CylinderField::from_fn(nx, nz, 2.0, |_, _| rng.gen_range(0.0..6.0)).unwrap();
        let g = grad_j(&f, &p);
        let e = |v: &[f64]| energy_of(v, nx, nz, f.hx(), f.hz(), &p);
        let (mut err, mut scale) = (0.0f64, 0.0f64);
        for j in 1..nz {
            for i in 1..nx {
                let k = j * (nx + 1) + i;
                let fd = central_difference(f.values(), k, 1e-4, e);
                err = err.max((fd - g[k]).abs());
                scale = scale.max(g[k].abs());
            }
        }
        assert!(err <= 1e-6 * scale, "relative error {}", err / scale);
        for j in [0, nz] {
            assert!(f.row(j).iter().enumerate().all(|(i, _)| g[j * (nx + 1) + i] == 0.0));
        }
    }
}

#[test]
fn energy_difference_matches_direct_difference() {
    let cal = calibrated(32);
    let p = q(cal.lambda_star);
    let f = ramp_field(4.0, &cal.phi, &config(32)).unwrap();
    let obj = CylinderObjective::new(32, f.nz(), f.hx(), f.hz(), &p, cal.phi.values());
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut y = f.values().to_vec();
    for j in 1..f.nz() {
        for i in 1..32 {
            y[j * 33 + i] += rng.gen_range(-1e-3..1e-3);
        }
    }
    let direct = obj.energy(&y) - obj.energy(f.values());
    let local = obj.energy_difference(f.values(), &y);
    assert!((direct - local).abs() <= 1e-9 * direct.abs().max(1e-6));
}

#[test]
fn preconditioner_inverts_metric() {
    let p = q(0.1);
    let (nx, nz) = (12, 20);
    let phi = vec![0.0; nx + 1];
    let obj = CylinderObjective::new(nx, nz, 1.0 / nx as f64, 0.2, &p, &phi);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut s = vec![0.0; (nx + 1) * (nz + 1)];
    for j in 1..nz {
        for i in 1..nx {
            s[j * (nx + 1) + i] = rng.gen_range(-1.0..1.0);
        }
    }
    let mut ks = vec![0.0; s.len()];
    let mut back = vec![0.0; s.len()];
    obj.metric(&s, &mut ks);
    obj.precondition(&ks, &mut back);
    for (a, b) in s.iter().zip(&back) {
        assert!((a - b).abs() <= 1e-12);
    }
}

#[test]
fn project_box_clips_and_is_idempotent() {
    let cal = calibrated(64);
    let p = q(cal.lambda_star);
    let f = ramp_field(4.0, &cal.phi, &config(64)).unwrap();
    assert_eq!(project_box(&f, &cal.phi).unwrap(), f);
    let mut g = f.clone();
    g.set(10, 100, -0.3);
    assert_eq!(project_box(&g, &cal.phi).unwrap().get(10, 100), 0.0);
    // A bump above φ: clipped back, and the energy does not go up.
    let mut h = f.clone();
    for j in 400..460 {
        for i in 1..64 {
            let v = h.get(i, j);
            h.set(i, j, v + 0.5 * libm::sin(core::f64::consts::PI * i as f64 / 64.0));
        }
    }
    let clipped = project_box(&h, &cal.phi).unwrap();
    assert!(check_bounds(&clipped, &cal.phi).unwrap().max_violation <= 0.0);
    let (e0, e1) = (energy_j(&h, &p), energy_j(&clipped, &p));
    assert!(e1 <= e0 + 1e-8 * (1.0 + e0.abs()));
    assert!(project_box(&f, &calibrated(32).phi).is_err());
}

fn tanh_field(nz: usize, l: f64, centre: f64) -> CylinderField {
    let phi = CrossSectionProfile::sine(16, 2.0);
    CylinderField::separable(&phi, nz, l, |z| 0.5 * (1.0 + libm::tanh(z - centre))).unwrap()
}

#[test]
fn find_zn_on_symmetric_and_shifted_transitions() {
    let phi = CrossSectionProfile::sine(16, 2.0);
    let f = tanh_field(64, 4.0, 0.0);
    let z = find_zn(&f, &phi).unwrap();
    assert!(z.abs() <= f.hz());
    // Moving the content one slice down lowers the crossing by exactly hz.
    let down = shifted(&f, 1, f.nz(), &phi);
    assert!((find_zn(&down, &phi).unwrap() - (z - f.hz())).abs() <= 1e-12);
    // Flat run at exactly half the maximum: midpoint.
    let mut flat = CylinderField::step(&phi, 8, 1.0).unwrap();
    let i = phi.argmax();
    for j in 3..=5 {
        flat.set(i, j, 1.0);
    }
    assert_eq!(find_zn(&flat, &phi).unwrap(), flat.z(4));
    assert!(matches!(
        find_zn(&CylinderField::from_fn(16, 8, 1.0, |_, _| 0.0).unwrap(), &phi),
        Err(Error::DegenerateProfile(_))
    ));
}

#[test]
fn recenter_moves_whole_slices() {
    let phi = CrossSectionProfile::sine(16, 2.0);
    let f = tanh_field(64, 4.0, 1.0);
    assert_eq!(recenter(&f, 0.0, &phi), f);
    let r = recenter(&f, 3.0 * f.hz(), &phi);
    for j in 0..=f.nz() - 3 {
        assert_eq!(r.row(j), f.row(j + 3));
    }
    for j in f.nz() - 2..=f.nz() {
        assert_eq!(r.row(j), phi.values());
    }
    assert!(r.shift.abs() <= 1e-12);
    let r = recenter(&f, 1.2 * f.hz(), &phi);
    assert!((r.shift - 0.2 * f.hz()).abs() <= 1e-12);
    assert!(check_bounds(&r, &phi).unwrap().max_violation <= 0.0);
}

#[test]
fn truncated_minimizer_at_n6() {
    let cal = calibrated(64);
    let p = q(cal.lambda_star);
    let (f, rep) = solve_truncated(6.0, &p, &cal.phi, &config(64)).unwrap();
    assert!(rep.c_n > 0.0);
    assert!(rep.h_n < 0.0);
    assert!(pde_residual(&f, &p) <= 1e-8);
    // The bottom identity: every other term vanishes on the zero row.
    let hz = f.hz();
    let direct: f64 = (1..64)
        .map(|i| {
            let d = (4.0 * f.get(i, 1) - f.get(i, 2)) / (2.0 * hz);
            -0.5 * f.hx() * d * d
        })
        .sum();
    assert!((rep.h_n - direct).abs() <= 1e-12 * direct.abs());
    // Conservation of the Hamiltonian along the cylinder.
    // Conservation of the Hamiltonian along the cylinder, up to the O(h²)
    // error of the slice stencils.
    let tr = hamiltonian_trace(&f, &p).unwrap();
    assert!((tr.level - rep.h_n).abs() <= 1e-10);
    assert!(tr.drift <= 2e-2);
    let b = check_bounds(&f, &cal.phi).unwrap();
    assert!(b.max_violation <= 0.0);
    // Strictly inside and strictly increasing away from the truncation
    // ends; next to them the gap to the boundary data drops below rounding.
    let m = check_monotone(&f);
    for j in 1..f.nz() {
        if f.z(j).abs() <= 5.0 {
            assert!(b.strict_per_slice[j - 1], "slice {j}");
            assert!(m.per_slice[j] > 0.0 && m.per_slice[j - 1] > 0.0);
        }
    }
    assert!(m.min_dz >= -1e-10);
}

#[test]
fn continuation_decreases_energy_and_recentres() {
    let rep = continuation();
    assert_eq!(rep.steps.len(), 3);
    for w in rep.steps.windows(2) {
        assert!(w[1].report.c_n <= w[0].report.c_n + 1e-10);
        assert!(w[1].bottom_err <= w[0].bottom_err);
        assert!(w[1].top_err <= w[0].top_err);
    }
    for s in &rep.steps {
        let r = &s.report;
        assert!(r.c_n > 0.0 && r.h_n < 0.0);
        assert!(r.z_n.abs() < r.n);
        assert!(r.n - r.z_n > 2.0 && r.n + r.z_n > 2.0);
    }
    let cal = calibrated(32);
    let f = &rep.field;
    assert_eq!(f.half_length(), 8.0);
    assert!(f.shift.abs() <= 0.5 * f.hz());
    assert!(find_zn(f, &cal.phi).unwrap().abs() <= f.hz());
    assert!(check_bounds(f, &cal.phi).unwrap().max_violation <= 0.0);
    // Nondecreasing up to rounding in the saturated top tail.
    assert!(check_monotone(f).min_dz >= -1e-10);
    let (b, t) = limit_profile_errors(f, &cal.phi, 1.0).unwrap();
    assert!(b <= 1e-2 && t <= 1e-2);
    assert!(rep.converged);
}

#[test]
fn early_stop_without_exhausting_schedule() {
    let cal = calibrated(32);
    let cfg = SolverConfig { n_schedule: vec![4.0, 6.0, 8.0], exhaust_schedule: false, ..config(32) };
    let rep = solve_heteroclinic(&q(cal.lambda_star), &cal.phi, &cfg).unwrap();
    assert!(rep.converged);
    assert!(rep.steps.len() <= 3);
    assert!(rep.steps[..rep.steps.len() - 1].iter().all(|s| !s.criteria_met));
}

#[test]
fn schedule_validation() {
    let cal = calibrated(32);
    let p = q(cal.lambda_star);
    for s in [vec![], vec![4.0, 4.0], vec![6.0, 4.0]] {
        let cfg = SolverConfig { n_schedule: s, ..config(32) };
        assert!(solve_heteroclinic(&p, &cal.phi, &cfg).is_err());
    }
    let cfg = SolverConfig { nz_per_unit: 3, ..config(32) };
    assert!(solve_truncated(2.5, &p, &cal.phi, &cfg).is_err());
    assert!(solve_truncated(1.0, &p, &cal.phi, &config(32)).is_err());
}


#[test]
fn iteration_cap_keeps_last_iterate() {
    let cal = calibrated(32);
    let cfg = SolverConfig { n_schedule: vec![4.0, 6.0], max_iter: 3, ..config(32) };
    let rep = solve_heteroclinic(&q(cal.lambda_star), &cal.phi, &cfg).unwrap();
    assert!(!rep.converged);
    assert_eq!(rep.steps.len(), 1);
    let s = &rep.steps[0];
    assert!(!s.descent_converged);
    assert_eq!(s.report.iterations, 3);
    assert!(s.report.grad_norm > cfg.grad_tol);
    assert_eq!(rep.field.half_length(), 4.0);
    // Still a box-feasible field.
    assert_eq!(crate::diagnostics::check_bounds(&rep.field, &cal.phi).unwrap().max_violation, 0.0);
}
