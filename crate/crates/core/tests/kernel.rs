use ginibre_gap::fredholm::gauss_legendre;
use ginibre_gap::kernel::KernelEvaluator;
use ginibre_gap::specialfns::{eval_p, eval_q, eval_q_contour, eval_q_series, q_series_condition, SERIES_CANCELLATION_LIMIT};
use ginibre_gap::{EnsembleSpec, QRoute};
use proptest::prelude::*;

/// ∫₀^L f with x = u⁴ on 40 Gauss–Legendre panels.
fn integrate(l: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    let rule = gauss_legendre(32);
    let (nodes, weights) = (&rule.0, &rule.1);
    let umax = l.powf(0.25);
    let panels = 40;
    let h = umax / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let a = p as f64 * h;
        for (t, w) in nodes.iter().zip(weights) {
            let u = a + 0.5 * h * (t + 1.0);
            total += 0.5 * h * w * 4.0 * u.powi(3) * f(u.powi(4));
        }
    }
    total
}

fn cutoff(spec: &EnsembleSpec) -> f64 {
    if spec.m == 1 { 120.0 } else { 900.0 }
}

fn cases() -> Vec<EnsembleSpec> {
    vec![
        EnsembleSpec::new(1, 4, &[0.5], 1.0).unwrap(),
        EnsembleSpec::new(1, 3, &[2.0], 0.5).unwrap(),
        EnsembleSpec::new(2, 3, &[0.3, 1.7], 1.0).unwrap(),
        EnsembleSpec::new(2, 2, &[1.0, 2.0], 0.5).unwrap(),
    ]
}

#[test]
fn biorthogonality() {
    for spec in cases() {
        for j in 0..spec.n {
            for k in 0..spec.n {
                let v = integrate(cutoff(&spec), |x| eval_p(&spec, j, x).unwrap() * eval_q(&spec, k, x, QRoute::Auto).unwrap());
                let want = if j == k { spec.lambda } else { 0.0 };
                assert!((v - want).abs() < 1e-7, "M={} j={j} k={k}: {v}", spec.m);
            }
        }
    }
}

#[test]
fn trace_is_lambda_n() {
    for spec in cases() {
        let ev = KernelEvaluator::new(&spec, QRoute::Auto).unwrap();
        let v = integrate(cutoff(&spec), |x| ev.eval_sum(x, x).unwrap());
        assert!((v - spec.lambda * spec.n as f64).abs() < 1e-6, "M={}: {v}", spec.m);
    }
}

#[test]
fn reproducing_property() {
    for spec in cases().into_iter().filter(|s| s.lambda == 1.0) {
        let ev = KernelEvaluator::new(&spec, QRoute::Auto).unwrap();
        for (x, y) in [(0.4, 1.3), (2.0, 0.7), (1.1, 1.1)] {
            let v = integrate(cutoff(&spec), |z| ev.eval_sum(x, z).unwrap() * ev.eval_sum(z, y).unwrap());
            let k = ev.eval_sum(x, y).unwrap();
            assert!((v - k).abs() < 1e-6, "M={} ({x},{y}): {v} vs {k}", spec.m);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn m1_kernel_symmetrises(n in 1usize..8, nu in 0.0f64..3.0, x in 0.05f64..20.0, y in 0.05f64..20.0) {
        let spec = EnsembleSpec::new(1, n, &[nu], 1.0).unwrap();
        let ev = KernelEvaluator::new(&spec, QRoute::Auto).unwrap();
        let h2 = |t: f64| t.powf(nu) * (-t).exp();
        let a = h2(x) * ev.eval(x, y).unwrap();
        let b = h2(y) * ev.eval(y, x).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1e-300), "{a} vs {b}");
    }

    #[test]
    fn q_is_linear_in_lambda(m in 1usize..3, k in 0usize..6, lambda in 0.0f64..1.0, x in 0.05f64..10.0) {
        let nu = if m == 1 { vec![0.7] } else { vec![0.3, 1.7] };
        let one = EnsembleSpec::new(m, 6, &nu, 1.0).unwrap();
        let thin = one.with_lambda(lambda);
        let q1 = eval_q(&one, k, x, QRoute::Auto).unwrap();
        prop_assert_eq!(eval_q(&thin, k, x, QRoute::Auto).unwrap(), lambda * q1);
    }

    #[test]
    fn q_series_matches_contour(m in 1usize..3, k in 0usize..5, nu1 in 0.1f64..1.4, gap in 0.2f64..1.6, x in 0.1f64..12.0) {
        let nu = if m == 1 { vec![nu1] } else { vec![nu1, nu1 + gap] };
        let spec = EnsembleSpec::new(m, 5, &nu, 1.0).unwrap();
        prop_assume!(spec.series_available());
        prop_assume!(q_series_condition(&spec, k, x).unwrap() <= SERIES_CANCELLATION_LIMIT);
        let a = eval_q_series(&spec, k, x).unwrap();
        let b = eval_q_contour(&spec, k, x, None).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1e-300), "{a} vs {b}");
    }

    #[test]
    fn forms_agree(m in 1usize..3, n in 1usize..12, nu1 in 0.0f64..2.0, gap in 0.3f64..2.0, x in 0.05f64..30.0, y in 0.05f64..30.0) {
        let nu = if m == 1 { vec![nu1] } else { vec![nu1, nu1 + gap] };
        let spec = EnsembleSpec::new(m, n, &nu, 1.0).unwrap();
        prop_assume!(spec.series_available());
        let ev = KernelEvaluator::new(&spec, QRoute::Auto).unwrap();
        let (sum, scale) = ev.eval_sum_with_scale(x, y).unwrap();
        prop_assert!((sum - ev.eval(x, y).unwrap()).abs() <= 1e-9 * scale.max(f64::MIN_POSITIVE));
    }
}
