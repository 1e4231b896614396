use num_complex::Complex64;
use proptest::prelude::*;
use spinmarket_core::yang_lee::{
    chain_partition_polynomial, find_zeros, polynomial_roots, relative_residual, RenormMap, DEFAULT_ROOT_TOL,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn chain_zeros_lie_on_unit_circle(k in 0.0f64..2.0, n in 1usize..40) {
        let zeros = find_zeros(&chain_partition_polynomial(k, n).unwrap(), DEFAULT_ROOT_TOL).unwrap();
        prop_assert_eq!(zeros.zeros.len(), n);
        prop_assert!(zeros.max_circle_deviation() <= 1e-8);
    }

    #[test]
    fn separated_real_roots_are_recovered(mut roots in prop::collection::vec(-4.0f64..4.0, 1..8)) {
        roots.sort_by(f64::total_cmp);
        prop_assume!(roots.windows(2).all(|w| w[1] - w[0] > 0.1));
        let coeffs = roots.iter().fold(vec![1.0], |acc, &r| {
            let mut next = vec![0.0; acc.len() + 1];
            for (i, &c) in acc.iter().enumerate() {
                next[i] -= r * c;
                next[i + 1] += c;
            }
            next
        });
        let found = polynomial_roots(&coeffs, DEFAULT_ROOT_TOL).unwrap();
        for (z, r) in found.zeros.iter().zip(&roots) {
            prop_assert!((z - Complex64::new(*r, 0.0)).norm() < 1e-8, "{} vs {}", z, r);
        }
    }

    #[test]
    fn zero_sets_are_conjugate_closed(coeffs in prop::collection::vec(-3.0f64..3.0, 2..12)) {
        prop_assume!(coeffs.last().unwrap().abs() > 0.1);
        let found = polynomial_roots(&coeffs, DEFAULT_ROOT_TOL).unwrap();
        for z in &found.zeros {
            prop_assert!(found.zeros.iter().any(|w| *w == z.conj()));
            prop_assert!(relative_residual(&coeffs, *z) < 1e-6);
        }
    }

    #[test]
    fn preimages_map_back(re in -3.0f64..3.0, im in -3.0f64..3.0) {
        let map = RenormMap::dhl_ising().unwrap();
        let w = Complex64::new(re, im);
        prop_assume!(w.norm() > 1e-3);
        for p in map.preimages(w) {
            let back = map.apply_complex(p).unwrap();
            prop_assert!((back - w).norm() <= 1e-9 * w.norm().max(1.0));
        }
    }
}
