use ginibre_gap::dynamics::*;
use ginibre_gap::fredholm::{gap_probability, FredholmOptions, IntervalUnion};
use ginibre_gap::{EnsembleSpec, GapError};

fn fredholm(spec: &EnsembleSpec, s: f64) -> f64 {
    gap_probability(spec, &IntervalUnion::hard_edge(s).unwrap(), &FredholmOptions::default()).unwrap().value
}

fn seed(spec: &EnsembleSpec) -> PrimaryState {
    if spec.m == 1 && spec.nu_min() > 0.0 {
        initial_state_series(spec, default_series_s0(spec)).unwrap()
    } else {
        initial_state_numeric(spec, 1e-2, &FredholmOptions::default()).unwrap()
    }
}

#[test]
fn exponential_law_from_the_flow() {
    let spec = EnsembleSpec::new(1, 1, &[0.0], 1.0).unwrap();
    let st = integrate(&seed(&spec), &spec, 1.0, &IntegrateOptions::default()).unwrap();
    assert!((st.tau() - (-1.0f64).exp()).abs() < 1e-6);
}

#[test]
fn flow_matches_fredholm_m1() {
    for lam in [0.5, 1.0] {
        let spec = EnsembleSpec::new(1, 5, &[1.0], lam).unwrap();
        let grid = [0.5, 1.0, 2.0, 5.0];
        let sts = integrate_through(&seed(&spec), &spec, &grid, &IntegrateOptions::default()).unwrap();
        for st in sts {
            assert!((st.tau() - fredholm(&spec, st.s)).abs() < 1e-6, "s = {}", st.s);
        }
    }
}

#[test]
fn flow_matches_fredholm_m2() {
    for lam in [0.5, 1.0] {
        let spec = EnsembleSpec::new(2, 2, &[0.3, 1.7], lam).unwrap();
        let sts = integrate_through(&seed(&spec), &spec, &[0.5, 1.0, 2.0, 5.0], &IntegrateOptions::default()).unwrap();
        for st in sts {
            assert!((st.tau() - fredholm(&spec, st.s)).abs() < 1e-6, "s = {}", st.s);
        }
    }
}

#[test]
fn series_seed_leading_terms() {
    let spec = EnsembleSpec::new(1, 2, &[1.0], 1.0).unwrap();
    let s0 = default_series_s0(&spec);
    let st = initial_state_series(&spec, s0).unwrap();
    let lead = -6.0 / 4.0 * s0 * s0;
    assert!((st.eta[0] / lead - 1.0).abs() < 1e-9);
    assert!((st.xi[1] + 1.0).abs() < 1e-12);
    let spec2 = EnsembleSpec::new(2, 2, &[0.3, 1.7], 1.0).unwrap();
    let st2 = initial_state_series(&spec2, default_series_s0(&spec2)).unwrap();
    assert!((st2.xi[1] - 0.51).abs() < 1e-8);
    assert!((st2.xi[2] + 2.0).abs() < 1e-8);
}

#[test]
fn series_seed_rejects_large_s0_and_zero_exponent() {
    let spec = EnsembleSpec::new(1, 2, &[1.0], 1.0).unwrap();
    assert!(matches!(initial_state_series(&spec, 1e-3), Err(GapError::SeedTooLarge(_))));
    let spec0 = EnsembleSpec::new(1, 2, &[0.0], 1.0).unwrap();
    assert!(initial_state_series(&spec0, 1e-13).is_err());
}

#[test]
fn numeric_and_series_seeds_agree_m1() {
    let spec = EnsembleSpec::new(1, 3, &[0.7], 1.0).unwrap();
    let fo = FredholmOptions::default();
    let s0 = default_series_s0(&spec);
    let a = initial_state_series(&spec, s0).unwrap();
    let b = initial_state_numeric(&spec, s0, &fo).unwrap();
    let rel = |x: f64, y: f64| (x - y).abs() / x.abs().max(y.abs()).max(1e-300);
    for j in 0..2 {
        assert!(rel(a.u[j], b.u[j]) < 1e-8, "u{j}");
        assert!(rel(a.eta[j], b.eta[j]) < 1e-8, "eta{j}");
    }
    assert!(rel(a.v[1], b.v[1]) < 1e-8);
    assert!(rel(a.v[0], b.v[0]) < 1e-4);
    assert!(rel(a.xi[1], b.xi[1]) < 1e-8);
}

#[test]
fn numeric_and_series_seeds_agree_m2_at_leading_order() {
    let spec = EnsembleSpec::new(2, 2, &[0.3, 1.7], 1.0).unwrap();
    let s0 = default_series_s0(&spec);
    let a = initial_state_series(&spec, s0).unwrap();
    let b = initial_state_numeric(&spec, s0, &FredholmOptions::default()).unwrap();
    let rel = |x: f64, y: f64| (x - y).abs() / x.abs().max(y.abs());
    for j in 0..3 {
        assert!(rel(a.u[j], b.u[j]) < 1e-6, "u{j}");
    }
    assert!(rel(a.v[1], b.v[1]) < 1e-6);
    assert!(rel(a.v[2], b.v[2]) < 1e-6);
    assert!(rel(a.v[0], b.v[0]) < 1e-4);
    assert!(rel(a.eta[0], b.eta[0]) < 1e-6);
    assert!(rel(a.xi[1], b.xi[1]) < 1e-6);
}

#[test]
fn numeric_seed_is_orthogonal() {
    for (m, nu) in [(1, vec![0.7]), (2, vec![0.0, 1.0]), (3, vec![0.5, 1.5, 2.0])] {
        let spec = EnsembleSpec::new(m, 3, &nu, 1.0).unwrap();
        let st = initial_state_numeric(&spec, 1e-2, &FredholmOptions::default()).unwrap();
        assert!(conserved_quantities(&st, &spec).orthogonality.abs() < 1e-10);
    }
}

#[test]
fn conserved_drift_along_trajectory() {
    let spec = EnsembleSpec::new(1, 5, &[1.0], 1.0).unwrap();
    let s0 = seed(&spec);
    let c0 = conserved_quantities(&s0, &spec);
    let grid: Vec<f64> = (1..=10).map(|k| 0.5 * k as f64).collect();
    for st in integrate_through(&s0, &spec, &grid, &IntegrateOptions::default()).unwrap() {
        let c = conserved_quantities(&st, &spec);
        assert!((c.first_integral.unwrap() - c0.first_integral.unwrap()).abs() < 1e-8);
        assert!(c.orthogonality.abs() < 1e-9);
        assert!(c.hamiltonian_gap.abs() < 1e-9 * c.hamiltonian_gap.abs().max(1.0));
        assert!(c.char_poly.iter().all(|v| v.abs() < 1e-8));
    }
}

#[test]
fn m2_relations_along_trajectory() {
    let spec = EnsembleSpec::new(2, 2, &[0.3, 1.7], 1.0).unwrap();
    for st in integrate_through(&seed(&spec), &spec, &[0.5, 1.0, 3.0], &IntegrateOptions::default()).unwrap() {
        let c = conserved_quantities(&st, &spec);
        assert!(c.m2_relations.unwrap().iter().all(|v| v.abs() < 1e-8), "{:?}", c.m2_relations);
        assert!(c.char_poly.iter().all(|v| v.abs() < 1e-8));
    }
}

#[test]
fn m1_reductions_along_trajectory() {
    let spec = EnsembleSpec::new(1, 3, &[1.0], 1.0).unwrap();
    for st in integrate_through(&seed(&spec), &spec, &[0.2, 1.0, 4.0], &IntegrateOptions::default()).unwrap() {
        assert!(m1_reduction_checks(&st, &spec).unwrap().max() < 1e-8);
    }
    let zero = PrimaryState { s: 1.0, u: vec![0.0; 2], v: vec![0.0; 2], xi: vec![0.0, -1.0], eta: vec![0.0; 2], log_tau: 0.0 };
    let r = m1_reduction_checks(&zero, &spec).unwrap();
    assert_eq!(r.xi0, 0.0);
}

#[test]
fn schlesinger_along_trajectories() {
    for spec in [EnsembleSpec::new(1, 5, &[1.0], 1.0).unwrap(), EnsembleSpec::new(2, 2, &[0.3, 1.7], 1.0).unwrap()] {
        let r = schlesinger_residual(&seed(&spec), &spec, &[0.5, 1.0, 2.0], &IntegrateOptions::default()).unwrap();
        assert!(r < 1e-5, "M = {}: {r}", spec.m);
    }
}

#[test]
fn schlesinger_triple_at_zero_state() {
    let st = PrimaryState { s: 1.0, u: vec![0.0; 3], v: vec![0.0; 3], xi: vec![0.0; 3], eta: vec![0.0; 3], log_tau: 0.0 };
    let t = SchlesingerTriple::from_state(&st, 2);
    assert!(t.a2.iter().flatten().all(|v| *v == 0.0));
    assert_eq!(t.e[2][0], -2.0);
    assert_eq!(t.e[2][1], -1.0);
}

#[test]
fn hamiltonian_vanishes_at_origin() {
    let spec = EnsembleSpec::new(1, 4, &[1.5], 1.0).unwrap();
    let st = initial_state_series(&spec, default_series_s0(&spec)).unwrap();
    assert!(hamiltonian(&st, &spec).abs() < 1e-20);
}
