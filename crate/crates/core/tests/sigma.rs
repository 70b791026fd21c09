use ginibre_gap::dynamics::*;
use ginibre_gap::fredholm::{gap_probability, FredholmOptions, IntervalUnion};
use ginibre_gap::sigma::*;
use ginibre_gap::EnsembleSpec;

#[test]
fn sigma_pv_along_m1_trajectories() {
    let io = IntegrateOptions::default();
    for n in [1usize, 3, 5] {
        for nu in [0.5, 1.0, 2.0] {
            let spec = EnsembleSpec::new(1, n, &[nu], 1.0).unwrap();
            let seed = initial_state_series(&spec, default_series_s0(&spec)).unwrap();
            let grid: Vec<f64> = (0..8).map(|k| 0.1 * 50f64.powf(k as f64 / 7.0)).collect();
            for st in integrate_through(&seed, &spec, &grid, &io).unwrap() {
                let (a, b, c) = sigma_from_state(&st, &spec).unwrap();
                assert!((a + hamiltonian(&st, &spec)).abs() < 1e-9 * a.abs().max(1.0));
                let r = sigma_pv_residual(a, b, c, st.s, n, nu).abs();
                assert!(r <= 1e-5 * sigma_pv_scale(a, b, c, st.s, n, nu), "n = {n}, nu = {nu}, s = {}", st.s);
            }
        }
    }
}

#[test]
fn chi_system_along_m2_trajectories() {
    let io = IntegrateOptions::default();
    for lam in [0.5, 1.0] {
        let spec = EnsembleSpec::new(2, 2, &[0.3, 1.7], lam).unwrap();
        let mut cur = initial_state_numeric(&spec, 1e-2, &FredholmOptions::default()).unwrap();
        for s in [0.1, 1.0, 5.0] {
            let (jet, next) = chi_jet(&cur, &spec, s, &io).unwrap();
            let c = chi_from_state(&next, &spec).unwrap();
            assert!((c.chi0 - hamiltonian(&next, &spec)).abs() < 1e-9);
            let r = chi_system_residuals(&jet, s, 2, 2.0, 0.51);
            assert!(r.relative() < 1e-4, "s = {s}: {r:?}");
            cur = next;
        }
    }
}

#[test]
fn chi_derivative_matches_finite_difference() {
    let spec = EnsembleSpec::new(2, 3, &[0.3, 1.7], 1.0).unwrap();
    let seed = initial_state_numeric(&spec, 1e-2, &FredholmOptions::default()).unwrap();
    let st = stencil(&seed, &spec, 1.0, 1e-3, &IntegrateOptions::default()).unwrap();
    let f: Vec<f64> = st.iter().map(|x| chi_from_state(x, &spec).unwrap().chi0).collect();
    let fd = central_difference([f[0], f[1], f[2], f[3], f[4]], 1e-3);
    let an = chi_from_state(&st[2], &spec).unwrap().dchi0;
    assert!((fd - an).abs() < 1e-7 * an.abs().max(1.0));
}

#[test]
fn chi_series_solves_chi_system_to_its_order() {
    let spec = EnsembleSpec::new(2, 2, &[0.3, 1.7], 1.0).unwrap();
    let (c0, c1) = chi_series(&spec, f64::INFINITY).unwrap();
    let rel = |s: f64| chi_system_residuals(&ChiJet::from_series(&c0, &c1, s), s, 2, 2.0, 0.51).relative();
    let (a, b) = (rel(1e-4), rel(1e-5));
    assert!(a < 1e-3 && b < a, "{a} {b}");
}

#[test]
fn gap_series_error_scales_with_first_omitted_order() {
    let spec = EnsembleSpec::new(2, 2, &[0.3, 1.7], 1.0).unwrap();
    let g = gap_series(&spec).unwrap();
    let fo = FredholmOptions { tol: 1e-12, ..Default::default() };
    let d = |s: f64| (gap_probability(&spec, &IntervalUnion::hard_edge(s).unwrap(), &fo).unwrap().value - g.eval(s)).abs();
    let p = gap_series_omitted_exponent(&spec).unwrap();
    let measured = d(1e-2) / d(3e-3);
    let predicted = (1e-2f64 / 3e-3).powf(p);
    assert!(measured / predicted < 3.0 && predicted / measured < 3.0, "{measured} {predicted}");
}
