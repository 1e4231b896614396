mod common;

use proptest::prelude::*;
use spinmarket_core::spin_lab::Sign;
use spinmarket_core::thermometer::{assign_sign, estimate_temperature, PriceSeries, SignMethod, ThermometerConfig};

fn series(prices: Vec<f64>) -> PriceSeries {
    let ts = (0..prices.len() as i64).map(|i| i * 60_000).collect();
    PriceSeries::new(ts, prices, None, 0).unwrap()
}

fn magnitudes(s: &PriceSeries, cfg: &ThermometerConfig) -> Vec<f64> {
    estimate_temperature(s, cfg).unwrap().defined().map(|(_, t)| t.abs()).collect()
}

#[test]
fn gbm_temperature_recovers_sigma_squared() {
    let s = common::gbm(0.0, 0.2, 1.0 / 252.0, 100_000, 1, 20240601);
    let cfg = ThermometerConfig { window: 32, dt: 1.0 / 252.0, sign: SignMethod::default() };
    let med = common::median(magnitudes(&s, &cfg));
    assert!((med - 0.04).abs() < 0.05 * 0.04, "median |T| = {med}");
}

// Expected signs from an independent numpy.polyfit computation of the
// normalized trend slope (trend window 10, threshold 0.05).
const GOLDEN_SIGNS: &str = "++++++++++++++++++++++++++++++-------------------+++++++++++++----------++++++++";

#[test]
fn sign_matches_reference_fixture() {
    let y: Vec<f64> = (0..80)
        .map(|k| {
            let burst = if (40..48).contains(&k) { 0.8 * (k - 39) as f64 } else { 0.0 };
            1.0 + 0.5 * (k as f64 / 5.0).sin() + burst
        })
        .collect();
    let got: String = assign_sign(&y, 10, 0.05)
        .unwrap()
        .into_iter()
        .map(|s| if s == Sign::Positive { '+' } else { '-' })
        .collect();
    assert_eq!(got, GOLDEN_SIGNS);
}

fn prices_strategy() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-0.05f64..0.05, 20..120).prop_map(|rs| {
        let mut p = 50.0;
        let mut out = vec![p];
        for r in rs {
            p *= f64::exp(r);
            out.push(p);
        }
        out
    })
}

proptest! {
    #[test]
    fn power_of_two_rescaling_is_bit_exact(prices in prices_strategy(), k in -20i32..20) {
        let cfg = ThermometerConfig { window: 8, dt: 0.25, sign: SignMethod::default() };
        let base = estimate_temperature(&series(prices.clone()), &cfg).unwrap();
        let scaled = estimate_temperature(&series(prices.iter().map(|p| p * 2f64.powi(k)).collect()), &cfg).unwrap();
        prop_assert_eq!(base.temperatures, scaled.temperatures);
    }

    #[test]
    fn arbitrary_rescaling_agrees_to_rounding(prices in prices_strategy(), c in 1e-3f64..1e3) {
        let cfg = ThermometerConfig { window: 8, dt: 1.0, sign: SignMethod::AlwaysPositive };
        let a = magnitudes(&series(prices.clone()), &cfg);
        let b = magnitudes(&series(prices.iter().map(|p| p * c).collect()), &cfg);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-9 * x.max(*y) + 1e-24, "{} vs {}", x, y);
        }
    }

    #[test]
    fn dt_covariance_is_exact(prices in prices_strategy(), dt in 1e-4f64..10.0) {
        let unit = ThermometerConfig { window: 8, dt: 1.0, sign: SignMethod::AlwaysPositive };
        let scaled = ThermometerConfig { dt, ..unit };
        let a = magnitudes(&series(prices.clone()), &unit);
        let b = magnitudes(&series(prices), &scaled);
        for (x, y) in a.iter().zip(&b) {
            prop_assert_eq!(x / dt, *y);
        }
    }

    #[test]
    fn warmup_and_nonnegative_magnitude(prices in prices_strategy(), window in 3usize..12) {
        prop_assume!(prices.len() >= window);
        let t = estimate_temperature(&series(prices), &ThermometerConfig { window, ..Default::default() }).unwrap();
        prop_assert!(t.temperatures[..window - 1].iter().all(Option::is_none));
        prop_assert!(t.temperatures[window - 1..].iter().all(|x| x.is_some_and(f64::is_finite)));
    }
}
