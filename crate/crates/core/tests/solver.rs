use kppfront::bounds::{build_sub, build_super, certify_sub, certify_super};
use kppfront::solver::{
    aligned_distance, critical_solve, n1_identity_check, residual_pe, solve_front, uniqueness_check, SolveOptions,
};
use kppfront::spectral::{ModelParams, SpectralRoots};
use kppfront::{GridProfile, OperatorConfig};

fn opts(t: f64, m: usize) -> SolveOptions {
    SolveOptions { half_width: Some(t), m, ..SolveOptions::default() }
}

#[test]
fn front_b02_tau02_c3() {
    let p = ModelParams::new(0.2, 0.2, 3.0).unwrap();
    let r = solve_front(&p, &opts(60.0, 16)).unwrap();
    assert!(r.converged && r.invariants_hold());
    assert!(r.iters <= 200);
    assert!(r.profile_w.min_forward_difference() >= -1e-9);
    assert!(r.residual_pew_sup <= 1e-4 && r.residual_pe_sup <= 1e-3);
    assert!(r.n1_identity_defect <= 5e-4);
    assert!((r.tail_slope - r.lambda2).abs() <= 0.02 * r.lambda2);
    assert!(r.profile_u.values[0] <= 1e-6);
    assert!(*r.profile_u.values.last().unwrap() >= 1.0 - 1e-4);
    // deltas decrease after the first few iterations up to the final tail
    let d = &r.deltas;
    assert!(d[d.len() - 1] < d[5]);
}

#[test]
fn classical_delayed_front() {
    let p = ModelParams::new(0.0, 0.3, 2.2).unwrap();
    // deep in the tail the bounds differ by well under 1%, and at m = 16 the
    // discrete tail rate undercuts the sub-solution by a few 1e-9
    let coarse = solve_front(&p, &SolveOptions::default()).unwrap();
    assert!(coarse.converged && coarse.min_forward_difference >= -1e-9);
    assert!(coarse.sandwich_defect <= 1e-8);
    let r = solve_front(&p, &SolveOptions { m: 32, ..SolveOptions::default() }).unwrap();
    assert!(r.converged && r.invariants_hold());
    assert!(r.sandwich_defect < coarse.sandwich_defect / 16.0);
    // with b = 0 the two residual forms coincide
    assert!((r.residual_pe_sup - r.residual_pew_sup).abs() <= 1e-12);
    assert_eq!(r.profile_u.values, r.profile_w.values);
}

#[test]
fn residual_forms_vanish_at_equilibria() {
    let p = ModelParams::new(0.3, 0.5, 2.5).unwrap();
    let cfg = OperatorConfig::new(&p, 8).unwrap();
    let zero = GridProfile::sample(10.0, p.ctau, 8, 0.0, 0.0, |_| 0.0).unwrap();
    assert_eq!(residual_pe(&zero, &cfg).unwrap(), 0.0);
    let one = zero.with_values(vec![1.0; zero.n()]);
    let one = GridProfile { right_value: 1.0, ..one };
    assert!(residual_pe(&one, &cfg).unwrap() <= p.trunc_tol);
    assert!(n1_identity_check(&one, &cfg).unwrap() <= 1e-10);
}

#[test]
fn second_order_grid_convergence() {
    let p = ModelParams::new(0.2, 0.2, 3.0).unwrap();
    let a = solve_front(&p, &opts(60.0, 16)).unwrap();
    let b = solve_front(&p, &opts(60.0, 32)).unwrap();
    let ratio = a.residual_pew_sup / b.residual_pew_sup;
    assert!((3.5..=4.5).contains(&ratio), "pew ratio {ratio}");
    let ratio = a.residual_pe_sup / b.residual_pe_sup;
    assert!((3.5..=4.5).contains(&ratio), "pe ratio {ratio}");
}

#[test]
fn truncation_insensitivity() {
    let p = ModelParams::new(0.2, 0.2, 3.0).unwrap();
    let a = solve_front(&p, &opts(60.0, 16)).unwrap();
    let b = solve_front(&p, &opts(75.0, 16)).unwrap();
    let d = aligned_distance(&a.profile_u, &b.profile_u).unwrap();
    assert!(d <= 1e-6, "distance {d}");
}

#[test]
fn uniqueness_classical() {
    let p = ModelParams::new(0.0, 0.3, 2.5).unwrap();
    let u = uniqueness_check(&p, &SolveOptions::default(), 3.0).unwrap();
    assert!(u.distance <= 1e-4);
    let same = aligned_distance(&u.base.profile_u, &u.base.profile_u).unwrap();
    assert_eq!(same, 0.0);
}

#[test]
fn critical_sequence_short() {
    let o = SolveOptions { max_iters: 2000, ..SolveOptions::default() };
    let r = critical_solve(0.2, 0.2, 2, 4, &o).unwrap();
    assert!(r.failure.is_none());
    assert_eq!(r.profiles.len(), 3);
    for (g, rep) in r.profiles.iter().zip(&r.reports) {
        assert!((g.value_at(0.0) - 0.5).abs() <= 1e-12);
        assert!(g.min_forward_difference() >= -1e-9 && rep.converged);
    }
    assert!(r.cauchy_strictly_decreasing());
}

#[test]
fn certificates_second_parameter_set() {
    let p = ModelParams::new(0.4, 0.1, 4.0).unwrap();
    let roots = SpectralRoots::compute(&p).unwrap();
    let cfg = OperatorConfig::new(&p, 16).unwrap();
    let (sup, gp) = build_super(&roots, 60.0, p.ctau, 16).unwrap();
    let (sub, gm) = build_sub(&sup, &p, 60.0, 16).unwrap();
    assert!(certify_super(&sup, &gp, &cfg).unwrap().passed);
    assert!(certify_sub(&sub, &gm, &cfg).unwrap().passed);
    assert!(gm.values.iter().zip(&gp.values).all(|(a, b)| 0.0 <= *a && a <= b && *b <= 1.0));
}
