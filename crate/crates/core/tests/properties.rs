use antihankel::{
    build_hankel, compare_spectra, compute_spectrum, eigenvalues_below, eval_secular_derivative, jacobi_eigen,
    pole_multiset, solve, weyl_brackets, HankelParams, SecularContext,
};
use proptest::prelude::*;

fn stripe() -> impl Strategy<Value = f64> {
    prop_oneof![
        4 => -3.0..3.0f64,
        1 => (-3i32..=3).prop_map(f64::from),
        1 => Just(0.0),
    ]
}

fn instance() -> impl Strategy<Value = HankelParams> {
    (1usize..40, stripe(), stripe(), stripe()).prop_map(|(n, a, b, c)| HankelParams::new(n, a, b, c).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(192))]

    #[test]
    fn full_sorted_spectrum(p in instance()) {
        let r = solve(&p, 1e-12, false).unwrap();
        let values = r.values();
        prop_assert_eq!(values.len(), p.size());
        prop_assert!(values.windows(2).all(|w| w[0] <= w[1]));
        prop_assert_eq!(r.diagnostics.secular_zeros + r.diagnostics.pole_values, p.size());
    }

    #[test]
    fn trace_is_preserved(p in instance()) {
        let sum: f64 = solve(&p, 1e-12, false).unwrap().values().iter().sum();
        let trace = build_hankel(&p).trace();
        prop_assert!((sum - trace).abs() <= 1e-9 * p.scale() * p.size() as f64, "{} vs {}", sum, trace);
    }

    #[test]
    fn negation_mirrors_spectrum(p in instance()) {
        let x = solve(&p, 1e-12, false).unwrap().values();
        let y = solve(&p.negated(), 1e-12, false).unwrap().values();
        for (u, w) in x.iter().zip(y.iter().rev()) {
            prop_assert!((u + w).abs() <= 1e-9 * p.scale());
        }
    }

    #[test]
    fn eigenvalues_sit_in_brackets(p in instance()) {
        let poles = pole_multiset(&p, &compute_spectrum(&p));
        let brackets = weyl_brackets(&p, &poles);
        let values = solve(&p, 1e-12, false).unwrap().values();
        for (v, b) in values.iter().zip(&brackets) {
            prop_assert!(b.contains(*v, 1e-9 * p.scale()), "{} outside {:?}", v, b);
        }
    }

    #[test]
    fn agrees_with_jacobi(p in instance()) {
        let ours = solve(&p, 1e-12, false).unwrap().values();
        let dense = jacobi_eigen(&build_hankel(&p), 1e-15).unwrap().values;
        prop_assert!(compare_spectra(&ours, &dense).unwrap().max_abs_diff <= 1e-9 * p.scale());
    }

    #[test]
    fn vectors_have_small_residuals(p in (1usize..24, stripe(), stripe(), stripe())
        .prop_map(|(n, a, b, c)| HankelParams::new(n, a, b, c).unwrap()))
    {
        let r = solve(&p, 1e-12, true).unwrap();
        let bound = 1e-9 * (1.0 + build_hankel(&p).max_abs());
        prop_assert!(r.diagnostics.max_residual.unwrap() <= bound, "{:?}", r.diagnostics);
    }

    #[test]
    fn counts_are_monotone(p in instance(), ts in prop::collection::vec(-12.0..12.0f64, 8)) {
        let ctx = SecularContext::new(&p);
        let mut ts: Vec<f64> = ts
            .into_iter()
            .filter(|t| ctx.terms().iter().all(|term| (t - term.value).abs() > 1e-6))
            .collect();
        ts.sort_by(f64::total_cmp);
        let counts: Vec<usize> = ts.iter().map(|&t| eigenvalues_below(&ctx, t).unwrap()).collect();
        prop_assert!(counts.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(counts.iter().all(|&k| k <= p.size()));
    }

    #[test]
    fn derivative_keeps_sign_above_poles_for_negative_outer_stripes(
        n in 1usize..30,
        a in -3.0..-0.01f64,
        b in -3.0..-0.01f64,
        c in -3.0..3.0f64,
        s in 0.01..10.0f64,
    ) {
        // with a, b < 0 the secular function is monotone past the largest pole
        let p = HankelParams::new(n, a, b, c).unwrap();
        let ctx = SecularContext::new(&p);
        let top = ctx.terms().iter().map(|t| t.value).fold(f64::NEG_INFINITY, f64::max);
        let d1 = eval_secular_derivative(&ctx, top + s).unwrap();
        let d2 = eval_secular_derivative(&ctx, top + 2.0 * s).unwrap();
        prop_assert!(d1 == 0.0 || d2 == 0.0 || (d1 > 0.0) == (d2 > 0.0));
    }
}
