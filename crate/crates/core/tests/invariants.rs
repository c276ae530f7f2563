//! Cross-module properties on random inputs.

use minrep::geometry::{boost, random_element, random_rotation};
use minrep::harmonics::build_grid;
use minrep::knapp_stein::{
    b_coeff, ks_eigenvalue_formula, ks_eigenvalue_numeric, ratio_spread, KsQuadrature, KsValue,
};
use minrep::representation::{decompose_attached, group_law_residual, minrep_act, kernel_b_cutoff};
use minrep::spectral::{is_kernel_label, kernel_ktypes, m0_expected, m0_scalar};
use minrep::unitary::{beckner_gamma, minrep_norm};
use minrep::{GridFunction, KTypeLabel, KsParams, Signature, SpectralFunction, TwistParameter};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn sig(p: usize, q: usize) -> Signature {
    Signature::new(p, q).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn group_law_holds_for_any_parameter(seed in any::<u64>(), lam in -1.0f64..2.5, lam_im in -1.0f64..1.0) {
        let s = sig(3, 2);
        let grid = build_grid(s, 40).unwrap();
        let f = GridFunction::from_real_fn(grid, |u, v| u[1] * v[0] - 0.3 * u[2] + 0.2);
        let fa = decompose_attached(&f, 1, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g1 = random_element(s, 0.2, &mut rng);
        let g2 = random_element(s, 0.2, &mut rng);
        let r = group_law_residual(&g1, &g2, TwistParameter::new(Complex64::new(lam, lam_im)), &fa, 16, 16).unwrap();
        prop_assert!(r <= 1e-8 * fa.norm(), "{r:e}");
    }

    #[test]
    fn rotations_preserve_ktypes_and_norm(seed in any::<u64>(), k in 0usize..3) {
        let s = sig(4, 2);
        let l = kernel_ktypes(s, 2)[k];
        let grid = build_grid(s, 10).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_rotation(s, &mut rng);
        let f = SpectralFunction::unit_component(s, l).unwrap();
        let out = minrep_act(&g, &f, &grid, 2, kernel_b_cutoff(s, 2)).unwrap();
        prop_assert!((out.result.component_norm_sq(l) - 1.0).abs() <= 1e-12);
        prop_assert!(out.non_kernel_mass <= 1e-24);
        let n0 = minrep_norm(&f).unwrap().norm_sq;
        let n1 = minrep_norm(&out.kernel_part()).unwrap().norm_sq;
        prop_assert!((n1 / n0 - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn m0_acts_by_the_kernel_parity(p in 1usize..9, q in 1usize..9, k in 0usize..12) {
        let s = sig(p, q);
        if let (Ok(e), Some(&l)) = (m0_expected(s), kernel_ktypes(s, k).last()) {
            prop_assert_eq!(m0_scalar(s, l).unwrap(), e);
        }
    }

    #[test]
    fn kernel_line_is_the_zero_set_of_the_yamabe_symbol(p in 1usize..9, q in 1usize..9, a in 0usize..15, b in 0usize..15) {
        let s = sig(p, q);
        let l = KTypeLabel::new(a, b);
        if l.validate(s).is_ok() {
            let on_line = kernel_ktypes(s, a).contains(&l);
            prop_assert_eq!(is_kernel_label(s, l), on_line);
            prop_assert_eq!(minrep::spectral::yamabe_eigenvalue_exact(s, l) == num_rational::Rational64::from_integer(0), on_line);
        }
    }

    #[test]
    fn b_coefficients_sum(lam in -3.0f64..3.0, a in 0usize..10, b in 0usize..10) {
        let params = KsParams::new(sig(4, 2), Complex64::new(lam, 0.0), if (a + b) % 2 == 0 { 1 } else { -1 }).unwrap();
        let l = KTypeLabel::new(a, b);
        let s = b_coeff(&params, 1, 1, l) + b_coeff(&params, -1, -1, l);
        prop_assert!((s - Complex64::new(2.0 * (lam - 1.0), 0.0)).norm() <= 1e-12);
    }

    #[test]
    fn beckner_coefficients_decrease_from_one(n in 1usize..6, delta in 1.0f64..=2.0, k in 0usize..200) {
        let g0 = beckner_gamma(n, delta, k).unwrap();
        let g1 = beckner_gamma(n, delta, k + 1).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&g0));
        prop_assert!(g1 <= g0 * (1.0 + 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn knapp_stein_quadrature_is_proportional_to_the_closed_form(shift in 0.1f64..1.5, which in 0usize..2) {
        let (s, eps) = [(sig(2, 2), 1i8), (sig(4, 2), -1)][which];
        let lam = s.rho().to_integer() as f64 + shift;
        let params = KsParams::new(s, Complex64::new(lam, 0.0), eps).unwrap();
        let ratios: Vec<Complex64> = kernel_ktypes(s, 3)
            .into_iter()
            .filter_map(|l| match ks_eigenvalue_formula(&params, l).unwrap() {
                KsValue::Finite(v) if v.norm() > 0.0 => {
                    Some(ks_eigenvalue_numeric(&params, l, KsQuadrature::default()).unwrap() / v)
                }
                _ => None,
            })
            .collect();
        prop_assert!(ratios.len() >= 2);
        prop_assert!(ratio_spread(&ratios) <= 1e-4, "{ratios:?}");
    }
}

#[test]
fn boosts_do_not_preserve_individual_ktypes() {
    // sanity: the kernel check above is not vacuous
    let s = sig(4, 2);
    let grid = build_grid(s, 20).unwrap();
    let f = SpectralFunction::unit_component(s, KTypeLabel::new(0, 1)).unwrap();
    let out = minrep_act(&boost(s, 0.3), &f, &grid, 6, 7).unwrap();
    assert!(out.result.component_norm_sq(KTypeLabel::new(1, 2)) > 1e-4);
    assert!(out.non_kernel_mass <= 1e-20);
}
