//! Seeded synthetic data: geometric Brownian motion prices, an intraday tick
//! session generator, and a temperature stack with planted coincidences.

use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rand_pcg::Pcg64;
use spinmarket_core::renorm::TemperatureStack;
use spinmarket_core::thermometer::{PriceSeries, SignMethod, TemperatureSeries};

use crate::error::{CliError, Result};
use chrono::DateTime;

use crate::ingest::{OhlcvRecord, TickRecord};

const MS_PER_DAY: i64 = 86_400_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GbmParams {
    pub s0: f64,
    pub mu: f64,
    pub sigma: f64,
    pub dt: f64,
    pub n: usize,
    pub seed: u64,
}

impl GbmParams {
    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CliError::Validation(m));
        if !(self.s0.is_finite() && self.s0 > 0.0) {
            return bad(format!("s0 must be positive, got {}", self.s0));
        }
        if !self.mu.is_finite() {
            return bad("mu must be finite".into());
        }
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return bad(format!("sigma must be non-negative, got {}", self.sigma));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        Ok(())
    }
}

/// `p_k = s0 · exp((mu − sigma²/2)·dt·k + sigma·√dt·Σ_{i<k} ξ_i)`.
///
/// The exponent is accumulated rather than the price, so `sigma = 0` gives
/// `s0 · exp(mu·dt·k)` with no compounding drift.
pub fn generate_gbm_prices(params: &GbmParams) -> Result<Vec<f64>> {
    params.validate()?;
    let mut rng = Pcg64::seed_from_u64(params.seed);
    let drift = (params.mu - 0.5 * params.sigma * params.sigma) * params.dt;
    let scale = params.sigma * params.dt.sqrt();
    let mut walk = 0.0;
    let mut prices = Vec::with_capacity(params.n);
    for k in 0..params.n {
        prices.push(params.s0 * (drift * k as f64 + scale * walk).exp());
        let xi: f64 = rng.sample(StandardNormal);
        walk += xi;
    }
    if let Some(p) = prices.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
        return Err(CliError::Validation(format!("parameters drive the price out of range ({p})")));
    }
    Ok(prices)
}

/// GBM sampled every `spacing_ms` from `start_ms`, with unit volumes.
pub fn generate_gbm(params: &GbmParams, start_ms: i64, spacing_ms: i64) -> Result<PriceSeries> {
    if spacing_ms <= 0 {
        return Err(CliError::Validation(format!("spacing must be positive, got {spacing_ms} ms")));
    }
    let prices = generate_gbm_prices(params)?;
    let ts = (0..params.n as i64).map(|k| start_ms + k * spacing_ms).collect();
    Ok(PriceSeries::new(ts, prices, Some(vec![1.0; params.n]), 0)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SessionParams {
    pub trading_days: usize,
    pub bars_per_day: usize,
    pub bar_ms: i64,
    /// First calendar day, in epoch milliseconds at midnight UTC.
    pub first_day_ms: i64,
    /// Offset of the first bar from midnight UTC.
    pub open_offset_ms: i64,
    pub s0: f64,
    pub mu: f64,
    /// Annualized volatility; one year is 252 trading days.
    pub sigma: f64,
    pub base_volume: f64,
    pub seed: u64,
}

impl Default for SessionParams {
    fn default() -> Self {
        Self {
            trading_days: 60,
            bars_per_day: 78,
            bar_ms: 300_000,
            first_day_ms: 1_704_153_600_000,
            open_offset_ms: 52_200_000,
            s0: 100.0,
            mu: 0.05,
            sigma: 0.2,
            base_volume: 1000.0,
            seed: 7,
        }
    }
}

fn is_weekend(day_ms: i64) -> bool {
    // 1970-01-01 was a Thursday
    matches!((day_ms.div_euclid(MS_PER_DAY) + 3).rem_euclid(7), 5 | 6)
}

/// Weekday sessions of GBM bars with U-shaped (auction-heavy) volumes.
/// Each bar draws one normal for the price and one for the volume.
pub fn intraday_session(params: &SessionParams) -> Result<Vec<TickRecord>> {
    let bars = params.bars_per_day;
    if bars < 2 || params.trading_days == 0 {
        return Err(CliError::Validation("need at least one day of two bars".into()));
    }
    if params.bar_ms <= 0 || params.open_offset_ms < 0 || params.open_offset_ms + bars as i64 * params.bar_ms > MS_PER_DAY {
        return Err(CliError::Validation("session does not fit inside a day".into()));
    }
    let dt = 1.0 / (252.0 * bars as f64);
    GbmParams {
        s0: params.s0,
        mu: params.mu,
        sigma: params.sigma,
        dt,
        n: 1,
        seed: params.seed,
    }
    .validate()?;
    let mut rng = Pcg64::seed_from_u64(params.seed);
    let drift = (params.mu - 0.5 * params.sigma * params.sigma) * dt;
    let scale = params.sigma * dt.sqrt();
    let mut log_price = params.s0.ln();
    let mut out = Vec::with_capacity(params.trading_days * bars);
    let mut day = params.first_day_ms;
    while out.len() < params.trading_days * bars {
        if !is_weekend(day) {
            for i in 0..bars {
                let x = 2.0 * i as f64 / (bars - 1) as f64 - 1.0;
                let xi_price: f64 = rng.sample(StandardNormal);
                let xi_volume: f64 = rng.sample(StandardNormal);
                out.push(TickRecord {
                    timestamp_ms: day + params.open_offset_ms + i as i64 * params.bar_ms,
                    price: (log_price.exp() * 100.0).round() / 100.0,
                    volume: (params.base_volume * (1.0 + 3.0 * x * x) * (0.25 * xi_volume).exp()).round().max(1.0),
                });
                log_price += drift + scale * xi_price;
            }
        }
        day += MS_PER_DAY;
    }
    Ok(out)
}

/// Aggregates ticks into one OHLCV bar per UTC calendar day.
pub fn daily_bars(ticks: &[TickRecord]) -> Result<Vec<OhlcvRecord>> {
    let mut out: Vec<(i64, OhlcvRecord)> = Vec::new();
    for t in ticks {
        let day = t.timestamp_ms.div_euclid(MS_PER_DAY);
        match out.last_mut() {
            Some((d, bar)) if *d == day => {
                bar.high = bar.high.max(t.price);
                bar.low = bar.low.min(t.price);
                bar.close = t.price;
                bar.volume += t.volume;
            }
            _ => {
                let date = DateTime::from_timestamp_millis(day * MS_PER_DAY)
                    .ok_or_else(|| CliError::Validation(format!("timestamp {} out of range", t.timestamp_ms)))?
                    .date_naive();
                out.push((
                    day,
                    OhlcvRecord {
                        date,
                        open: t.price,
                        high: t.price,
                        low: t.price,
                        close: t.price,
                        volume: t.volume,
                    },
                ));
            }
        }
    }
    Ok(out.into_iter().map(|(_, bar)| bar).collect())
}

/// A three-level stack whose levels coincide only inside planted windows.
#[derive(Debug, Clone)]
pub struct PlantedStack {
    pub stack: TemperatureStack,
    /// Timestamps at which each planted window opens.
    pub onsets: Vec<i64>,
}

/// Level 0 has 256 instants one minute apart; levels 1 and 2 close every 4
/// and 16 instants. Each planted window spans two level-2 blocks starting at
/// a level-2 close, where all levels take one common value per window.
/// Elsewhere the levels differ by factors of 1.5 and level 0 is negative at
/// even instants, so no run can extend across a window edge.
pub fn planted_coincidence_stack(seed: u64) -> PlantedStack {
    const N: usize = 256;
    const STEP_MS: i64 = 60_000;
    let windows = [(63usize, 94usize), (175, 206)];
    let mut rng = Pcg64::seed_from_u64(seed);
    let mut jitter = |width: f64| 1.0 + width * (2.0 * rng.gen::<f64>() - 1.0);
    let inside = |i: usize| windows.iter().position(|&(a, b)| (a..=b).contains(&i));
    let base = |i: usize| 0.05 * (1.0 + 0.3 * (i as f64 / 10.0).sin());
    let plateaus: Vec<f64> = windows.iter().map(|_| 0.05 * jitter(0.2)).collect();
    let mut levels = Vec::new();
    for (k, block) in [1usize, 4, 16].into_iter().enumerate() {
        let n = N / block;
        let mut timestamps = Vec::with_capacity(n);
        let mut temperatures = Vec::with_capacity(n);
        for j in 0..n {
            let i = (j + 1) * block - 1;
            timestamps.push(i as i64 * STEP_MS);
            let value = if let Some(w) = inside(i) {
                plateaus[w]
            } else {
                let sign = if k == 0 && i % 2 == 0 { -1.0 } else { 1.0 };
                sign * base(i) * 1.5f64.powi(k as i32) * jitter(0.05)
            };
            temperatures.push((k == 0 || j > 0).then_some(value));
        }
        levels.push(TemperatureSeries {
            timestamps,
            temperatures,
            level: k,
            window: if k == 0 { 1 } else { 2 },
            sign_method: SignMethod::AlwaysPositive,
        });
    }
    PlantedStack {
        stack: TemperatureStack::from_levels(levels).expect("fixture levels are nested"),
        onsets: windows.iter().map(|&(a, _)| a as i64 * STEP_MS).collect(),
    }
}
