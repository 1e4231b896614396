#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rand_pcg::Pcg64;
use spinmarket_core::thermometer::PriceSeries;

/// Geometric Brownian motion sampled every `spacing_ms`, starting at 100.
pub fn gbm(mu: f64, sigma: f64, dt: f64, n: usize, spacing_ms: i64, seed: u64) -> PriceSeries {
    let mut rng = Pcg64::seed_from_u64(seed);
    let drift = (mu - 0.5 * sigma * sigma) * dt;
    let scale = sigma * dt.sqrt();
    let mut log_p = 100f64.ln();
    let mut prices = Vec::with_capacity(n);
    for _ in 0..n {
        prices.push(log_p.exp());
        let xi: f64 = rng.sample(StandardNormal);
        log_p += drift + scale * xi;
    }
    let ts = (0..n as i64).map(|i| i * spacing_ms).collect();
    PriceSeries::new(ts, prices, Some(vec![1.0; n]), 0).unwrap()
}

pub fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}
