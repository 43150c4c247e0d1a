use bse_core::gen::{self, GeneratorSpec};
use bse_core::verify::{self, check_form1, check_pairing, residual, sigma_orthogonality_error};
use bse_core::{negative_spectrum, solve, BseMatrixI, Method};
use faer::{c64, Mat};
use proptest::prelude::*;

fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn structured_solvers_agree_with_reference(n in 1usize..=24, seed in any::<u64>()) {
        let h = gen::generate_random_definite(n, seed, 1.0).unwrap();
        let reference = solve(&h, Method::Reference).unwrap();
        prop_assert_eq!(reference.lambda.len(), n);
        for method in Method::STRUCTURED {
            let r = solve(&h, method).unwrap();
            prop_assert_eq!(r.lambda.len(), n);
            prop_assert!(r.lambda.iter().all(|&l| l > 0.0));
            prop_assert!(r.lambda.windows(2).all(|w| w[0] <= w[1]));
            for (a, b) in r.lambda.iter().zip(&reference.lambda) {
                prop_assert!(rel_diff(*a, *b) <= 1e-10, "{}: {} vs {}", method, a, b);
            }
            for res in residual(&h, &r).unwrap() {
                prop_assert!(res <= 1e-11, "{}: residual {}", method, res);
            }
        }
    }

    #[test]
    fn spectrum_pairs_with_its_mirror(n in 1usize..=16, seed in any::<u64>(), m in 0usize..4) {
        let method = Method::ALL[m];
        let h = gen::generate_random_definite(n, seed, 1.0).unwrap();
        let pos = solve(&h, method).unwrap();
        let neg = negative_spectrum(&h, &pos);
        prop_assert!(check_pairing(&pos.lambda, &neg.lambda, 1e-12).unwrap());
        let rp = residual(&h, &pos).unwrap();
        let rn = residual(&h, &neg).unwrap();
        for (p, q) in rp.iter().zip(&rn) {
            prop_assert!(*q <= 10.0 * p.max(f64::EPSILON));
        }
    }

    #[test]
    fn eigenvectors_are_sigma_orthonormal(
        n in 1usize..=24,
        seed in any::<u64>(),
        kappa in 3.0f64..1e3,
        m in 0usize..4,
    ) {
        let method = Method::ALL[m];
        let h = gen::generate_conditioned(&GeneratorSpec::new(n, kappa, seed).unwrap()).unwrap();
        let r = solve(&h, method).unwrap();
        let dev = sigma_orthogonality_error(r.v.as_ref()).unwrap();
        prop_assert!(dev <= 1e-10 * n as f64, "{}: {}", method, dev);
    }

    #[test]
    fn generated_instances_are_form1(n in 1usize..=16, seed in any::<u64>(), kappa in 3.0f64..1e8) {
        let h = gen::generate_conditioned(&GeneratorSpec::new(n, kappa, seed).unwrap()).unwrap();
        prop_assert!(check_form1(h.realize_full().as_ref(), 1e-14).unwrap());
        let r = gen::generate_random_definite(n, seed, 1.0).unwrap();
        prop_assert!(check_form1(r.realize_full().as_ref(), 1e-14).unwrap());
    }

    #[test]
    fn form1_round_trip(n in 1usize..=12, seed in any::<u64>()) {
        let h = gen::generate_random_definite(n, seed, 1.0).unwrap();
        let full = h.realize_full();
        prop_assert!(check_form1(full.as_ref(), 1e-14).unwrap());
        let back = BseMatrixI::from_full(full.as_ref(), 1e-14).unwrap().realize_full();
        let gap = (&back - &full).norm_l2() / full.norm_l2();
        prop_assert!(gap <= 1e-14);
    }

    #[test]
    fn reference_recovers_known_spectrum(n in 1usize..=32, seed in any::<u64>(), kappa in 3.0f64..1e3) {
        let spec = GeneratorSpec::new(n, kappa, seed).unwrap();
        let h = gen::generate_conditioned(&spec).unwrap();
        let r = solve(&h, Method::Reference).unwrap();
        for (got, want) in r.lambda.iter().zip(spec.exact_spectrum()) {
            prop_assert!(rel_diff(*got, want) <= 1e-10, "{} vs {}", got, want);
        }
    }

    #[test]
    fn generation_is_deterministic(n in 1usize..=10, seed in any::<u64>(), kappa in 3.0f64..1e6) {
        let spec = GeneratorSpec::new(n, kappa, seed).unwrap();
        prop_assert_eq!(gen::generate_conditioned(&spec).unwrap(), gen::generate_conditioned(&spec).unwrap());
        prop_assert_eq!(
            gen::generate_random_definite(n, seed, 0.5).unwrap(),
            gen::generate_random_definite(n, seed, 0.5).unwrap()
        );
    }

    #[test]
    fn random_unitary_is_unitary(n in 1usize..=32, seed in any::<u64>()) {
        let q = gen::random_unitary(n, seed);
        let gap = (q.adjoint() * &q - Mat::<c64>::identity(n, n)).norm_l2();
        prop_assert!(gap <= 1e-12 * n as f64);
    }

    #[test]
    fn squared_error_model_dominates_direct(
        norm_h in 1e-3f64..1e12,
        ratio in 1.0f64..1e12,
        s in 1e-6f64..=1.0,
    ) {
        let lambda = norm_h / ratio;
        let input = verify::ErrorModelInput::new(norm_h, lambda, s, f64::EPSILON).unwrap();
        let sq = verify::predicted_error(&input, true);
        let direct = verify::predicted_error(&input, false);
        prop_assert!(sq >= direct);
        prop_assert!(sq <= direct / f64::EPSILON.sqrt() * (1.0 + 1e-12));
    }
}

#[test]
fn conditioned_extreme_singular_values() {
    let spec = GeneratorSpec::new(8, 1e6, 4).unwrap();
    let h = gen::generate_conditioned(&spec).unwrap();
    let s = bse_core::backend::svd(h.realize_full().as_ref()).unwrap().s;
    let cond = s[0] / s[s.len() - 1];
    assert!(rel_diff(cond, 1e6) <= 1e-8, "{cond}");
}

#[test]
fn conditioned_spectrum_endpoints_n200() {
    let spec = GeneratorSpec::new(200, 10.0, 1).unwrap();
    let h = gen::generate_conditioned(&spec).unwrap();
    let r = solve(&h, Method::Reference).unwrap();
    let c = 3f64.sqrt() / 2.0;
    assert!(rel_diff(r.lambda[0], c) <= 1e-12);
    assert!(rel_diff(r.lambda[199], c * 10.0 / 3.0) <= 1e-12);
}

#[test]
fn kappa_three_is_fully_clustered() {
    let spec = GeneratorSpec::new(20, 3.0, 2).unwrap();
    let h = gen::generate_conditioned(&spec).unwrap();
    for method in Method::ALL {
        let r = solve(&h, method).unwrap();
        for l in &r.lambda {
            assert!(rel_diff(*l, 3f64.sqrt() / 2.0) <= 1e-12, "{method}: {l}");
        }
        assert!(sigma_orthogonality_error(r.v.as_ref()).unwrap() <= 1e-12);
    }
}

#[test]
fn table_trend_at_n200() {
    let c = 3f64.sqrt() / 2.0;
    let h10 = gen::generate_conditioned(&GeneratorSpec::new(200, 10.0, 0).unwrap()).unwrap();
    let r = solve(&h10, Method::Sqrt).unwrap();
    assert!(rel_diff(r.lambda[0], c) <= 1e-13);

    let h6 = gen::generate_conditioned(&GeneratorSpec::new(200, 1e6, 0).unwrap()).unwrap();
    let chol = rel_diff(solve(&h6, Method::Chol).unwrap().lambda[0], c);
    assert!((1e-9..=1e-4).contains(&chol), "chol at 1e6: {chol}");

    let h9 = gen::generate_conditioned(&GeneratorSpec::new(200, 1e9, 0).unwrap()).unwrap();
    let svd = rel_diff(solve(&h9, Method::CholSvd).unwrap().lambda[0], c);
    let sqrt = rel_diff(solve(&h9, Method::Sqrt).unwrap().lambda[0], c);
    assert!(svd <= 1e-7, "chol-svd at 1e9: {svd}");
    assert!(sqrt >= 1e-1, "sqrt at 1e9: {sqrt}");
}
