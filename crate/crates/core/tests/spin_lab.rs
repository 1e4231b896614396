use proptest::prelude::*;
use spinmarket_core::spin_lab::{entropy_curve, paramagnet_entropy, SpinSystem};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn observables_stay_in_range(
        n in 1usize..40,
        j in -2.0f64..2.0,
        h in -2.0f64..2.0,
        beta in -3.0f64..3.0,
        seed in any::<u64>(),
        sweeps in 0usize..20,
    ) {
        let mut s = SpinSystem::new(n, j, h, beta, seed).unwrap().randomized();
        s.metropolis_sweep(sweeps).unwrap();
        let m = s.magnetization();
        prop_assert!((-1.0..=1.0).contains(&m));
        prop_assert!(s.energy_per_spin().abs() <= j.abs() + h.abs() + 1e-12);
        prop_assert_eq!(s.spin_sum(), s.spins().iter().map(|&x| x as i64).sum::<i64>());
    }

    #[test]
    fn same_seed_same_trajectory(n in 1usize..30, seed in any::<u64>()) {
        let run = || {
            let mut s = SpinSystem::new(n, 0.5, 0.3, 0.7, seed).unwrap();
            s.sample_magnetization(25).unwrap()
        };
        prop_assert_eq!(run(), run());
    }

    #[test]
    fn entropy_is_bounded(n in 1usize..16, j in -1.5f64..1.5, h in -1.5f64..1.5) {
        let curve = entropy_curve(j, h, n).unwrap();
        for &(_, s) in &curve.points {
            prop_assert!((0.0..=std::f64::consts::LN_2 + 1e-12).contains(&s));
        }
        prop_assert!(curve.points.windows(2).all(|w| w[0].0 < w[1].0));
    }

    #[test]
    fn free_spins_follow_binomial_counts(n in 1usize..20, h in 0.1f64..2.0) {
        let curve = entropy_curve(0.0, h, n).unwrap();
        prop_assert_eq!(curve.points.len(), n + 1);
        for &(e, s) in &curve.points {
            // E/N = -h m
            let exact = paramagnet_entropy(n, -e / h).unwrap();
            prop_assert!((s - exact).abs() <= 1e-12);
        }
    }
}
