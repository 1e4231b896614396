use spinmarket_cli::synth::{generate_gbm_prices, planted_coincidence_stack, GbmParams};
use spinmarket_core::signal::{detect_transitions, DetectorConfig};

#[test]
fn log_return_mean_matches_ito_drift() {
    let (sigma, dt, n) = (0.2, 1.0 / 252.0, 100_000);
    let prices = generate_gbm_prices(&GbmParams { s0: 100.0, mu: 0.0, sigma, dt, n, seed: 2024 }).unwrap();
    let r: Vec<f64> = prices.windows(2).map(|w| (w[1] / w[0]).ln()).collect();
    let m = r.len() as f64;
    let mean = r.iter().sum::<f64>() / m;
    let var = r.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
    let se = (var / m).sqrt();
    let expected = -0.5 * sigma * sigma * dt;
    assert!((mean - expected).abs() < 4.0 * se, "mean {mean}, expected {expected}, se {se}");
    assert!((var / dt / (sigma * sigma) - 1.0).abs() < 0.02);
}

#[test]
fn planted_fixture_fires_at_onsets() {
    let planted = planted_coincidence_stack(5);
    let events = detect_transitions(&planted.stack, &DetectorConfig::default()).unwrap();
    let ts: Vec<i64> = events.iter().map(|e| e.timestamp).collect();
    assert_eq!(ts, planted.onsets);
}

#[test]
fn planted_event_count_is_monotone_in_tolerance() {
    for seed in 0..8 {
        let planted = planted_coincidence_stack(seed);
        let counts: Vec<usize> = (-60..=20)
            .map(|e| {
                let tolerance = 10f64.powf(e as f64 / 10.0);
                detect_transitions(&planted.stack, &DetectorConfig { tolerance, ..Default::default() }).unwrap().len()
            })
            .collect();
        assert_eq!(counts[0], planted.onsets.len(), "seed {seed}");
        assert!(counts.windows(2).all(|w| w[0] <= w[1]), "seed {seed}: {counts:?}");
    }
}
