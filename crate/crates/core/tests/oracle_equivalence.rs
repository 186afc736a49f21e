use antihankel::{build_hankel, compare_spectra, jacobi_eigen, solve, EigenKind, HankelParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

fn random_cases(seed: u64, max_n: usize, per_n: usize, range: f64) -> Vec<HankelParams> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (1..=max_n)
        .flat_map(|n| {
            (0..per_n)
                .map(|_| {
                    HankelParams::new(
                        n,
                        rng.gen_range(-range..=range),
                        rng.gen_range(-range..=range),
                        rng.gen_range(-range..=range),
                    )
                    .unwrap()
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

#[test]
fn eigenvalues_match_jacobi() {
    let cases = random_cases(11, 32, 200, 3.0);
    let bad: Vec<String> = cases
        .par_iter()
        .filter_map(|p| {
            let ours = solve(p, 1e-12, false).map_err(|e| format!("{p:?}: {e}")).ok()?.values();
            let dense = jacobi_eigen(&build_hankel(p), 1e-15).unwrap().values;
            let cmp = compare_spectra(&ours, &dense).unwrap();
            (cmp.max_abs_diff > 1e-8 * p.scale()).then(|| format!("{p:?}: {cmp:?}"))
        })
        .collect();
    assert!(bad.is_empty(), "{} mismatches, first: {}", bad.len(), bad[0]);
}

#[test]
fn fixed_instance_end_to_end() {
    let p = HankelParams::new(7, 1.2, -0.7, 0.3).unwrap();
    let ours = solve(&p, 1e-12, false).unwrap().values();
    let dense = jacobi_eigen(&build_hankel(&p), 1e-15).unwrap().values;
    assert!(compare_spectra(&ours, &dense).unwrap().max_abs_diff <= 1e-8);
}

#[test]
fn vectors_have_small_residuals_and_are_orthonormal() {
    let cases = random_cases(12, 24, 20, 3.0);
    cases.par_iter().for_each(|p| {
        let r = solve(p, 1e-12, true).unwrap();
        let bound = 1e-8 * (1.0 + build_hankel(p).max_abs());
        assert!(r.diagnostics.max_residual.unwrap() <= bound, "{p:?}: {:?}", r.diagnostics);
        let vs: Vec<&Vec<f64>> = r.pairs.iter().map(|q| q.vector.as_ref().unwrap()).collect();
        for (i, u) in vs.iter().enumerate() {
            let norm: f64 = u.iter().map(|x| x * x).sum();
            assert!((norm - 1.0).abs() < 1e-12);
            // distinct eigenvalues of a symmetric matrix have orthogonal vectors
            for (j, w) in vs.iter().enumerate().skip(i + 1) {
                if (r.pairs[i].value - r.pairs[j].value).abs() > 1e-3 {
                    let d: f64 = u.iter().zip(w.iter()).map(|(x, y)| x * y).sum();
                    assert!(d.abs() < 1e-6, "{p:?}: <v{i}, v{j}> = {d}");
                }
            }
        }
    });
}

#[test]
fn integer_stripes_with_pole_eigenvalues() {
    // small integer stripes often put pole values inside the spectrum
    let mut mixed = 0;
    for n in 1..=16 {
        for a in -2..=2 {
            for b in -2..=2 {
                for c in -2..=2 {
                    let p = HankelParams::new(n, a as f64, b as f64, c as f64).unwrap();
                    let r = solve(&p, 1e-12, false).unwrap();
                    let dense = jacobi_eigen(&build_hankel(&p), 1e-15).unwrap().values;
                    let cmp = compare_spectra(&r.values(), &dense).unwrap();
                    assert!(cmp.max_abs_diff <= 1e-8 * p.scale(), "{p:?}: {cmp:?} {:?} vs {dense:?}", r.values());
                    if r.pairs.iter().any(|q| q.kind == EigenKind::PoleValue) && r.diagnostics.secular_zeros > 0 {
                        mixed += 1;
                    }
                }
            }
        }
    }
    assert!(mixed > 0);
}

#[test]
fn large_coefficients() {
    for p in random_cases(13, 12, 5, 1e4) {
        let ours = solve(&p, 1e-10, false).unwrap().values();
        let dense = jacobi_eigen(&build_hankel(&p), 1e-15).unwrap().values;
        assert!(compare_spectra(&ours, &dense).unwrap().max_abs_diff <= 1e-8 * p.scale(), "{p:?}");
    }
}
