//! Signed effective temperature of a price series.
//!
//! The magnitude is the realized variance rate of log-price over a trailing
//! window (the diffusion coefficient of the price viewed as a geometric
//! Brownian particle). The sign is negative while that magnitude is trending
//! upward faster than a threshold, the unstable regime in which the spin
//! energy per site is above zero.

mod series;

pub use series::PriceSeries;

use crate::error::{Error, Result};
use crate::spin_lab::Sign;
use crate::table::{float17, CsvTable};

pub const DEFAULT_WINDOW: usize = 32;
pub const DEFAULT_TREND_WINDOW: usize = 16;
pub const DEFAULT_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SignMethod {
    /// Negative when the normalized least-squares slope of `|T|` over the
    /// trailing `trend_window` samples exceeds `threshold`.
    VolatilityTrend { trend_window: usize, threshold: f64 },
    AlwaysPositive,
}

impl Default for SignMethod {
    fn default() -> Self {
        SignMethod::VolatilityTrend {
            trend_window: DEFAULT_TREND_WINDOW,
            threshold: DEFAULT_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermometerConfig {
    /// Prices per estimation window; the window holds `window - 1` returns.
    pub window: usize,
    /// Sampling interval in the caller's time unit.
    pub dt: f64,
    pub sign: SignMethod,
}

impl Default for ThermometerConfig {
    fn default() -> Self {
        Self {
            window: DEFAULT_WINDOW,
            dt: 1.0,
            sign: SignMethod::default(),
        }
    }
}

/// Signed temperatures aligned with the samples of a price series.
/// Warm-up samples have no temperature.
#[derive(Debug, Clone, PartialEq)]
pub struct TemperatureSeries {
    pub timestamps: Vec<i64>,
    pub temperatures: Vec<Option<f64>>,
    pub level: usize,
    pub window: usize,
    pub sign_method: SignMethod,
}

impl TemperatureSeries {
    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    pub fn defined(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.timestamps
            .iter()
            .zip(&self.temperatures)
            .filter_map(|(&ts, t)| t.map(|t| (ts, t)))
    }

    /// `timestamp,temperature,level`; warm-up rows have an empty temperature.
    pub fn to_csv(&self) -> String {
        let mut t = CsvTable::new(&["timestamp", "temperature", "level"]);
        for (ts, temp) in self.timestamps.iter().zip(&self.temperatures) {
            t.row([ts.to_string(), temp.map(float17).unwrap_or_default(), self.level.to_string()]);
        }
        t.finish()
    }
}

/// `ln(p_{i+1} / p_i)`, stamped with the later timestamp.
pub fn log_returns(series: &PriceSeries) -> Result<Vec<(i64, f64)>> {
    if series.len() < 2 {
        return Err(Error::InsufficientData {
            level: Some(series.level()),
            reason: "at least two prices are needed for a return".into(),
        });
    }
    let p = series.prices();
    Ok(series.timestamps()[1..]
        .iter()
        .zip(p.windows(2))
        .map(|(&ts, w)| (ts, (w[1] / w[0]).ln()))
        .collect())
}

/// Unbiased variance of every length-`m` window of `xs`, indexed by the
/// window's last element.
///
/// A sliding Welford update is resynchronized by an exact two-pass pass once
/// per `m` steps. A window whose values are all bit-identical reports
/// exactly zero, and no other window does.
fn sliding_variances(xs: &[f64], m: usize) -> Vec<f64> {
    debug_assert!(m >= 2 && xs.len() >= m);
    let two_pass = |w: &[f64]| {
        let mean = w.iter().sum::<f64>() / w.len() as f64;
        w.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>()
    };
    let mut out = Vec::with_capacity(xs.len() - m + 1);
    let mut mean = 0.0;
    let mut m2 = 0.0;
    let mut run = 0usize;
    for (i, &x) in xs.iter().enumerate() {
        run = if i > 0 && x == xs[i - 1] { run + 1 } else { 1 };
        if i < m {
            let d = x - mean;
            mean += d / (i + 1) as f64;
            m2 += d * (x - mean);
            if i + 1 < m {
                continue;
            }
        } else if (i + 1) % m == 0 {
            let w = &xs[i + 1 - m..=i];
            mean = w.iter().sum::<f64>() / m as f64;
            m2 = two_pass(w);
        } else {
            let old = xs[i - m];
            let d_old = old - mean;
            mean -= d_old / (m - 1) as f64;
            m2 -= d_old * (old - mean);
            let d = x - mean;
            mean += d / m as f64;
            m2 += d * (x - mean);
        }
        let sum_sq = if run >= m {
            0.0
        } else if m2 > 0.0 {
            m2
        } else {
            two_pass(&xs[i + 1 - m..=i])
        };
        out.push(sum_sq / (m - 1) as f64);
    }
    out
}

/// Trailing-window effective temperature of `series`.
pub fn estimate_temperature(series: &PriceSeries, config: &ThermometerConfig) -> Result<TemperatureSeries> {
    let ThermometerConfig { window, dt, sign } = *config;
    if window < 3 {
        return Err(Error::invalid("window", format!("must be at least 3 samples, got {window}")));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::invalid("dt", format!("must be positive, got {dt}")));
    }
    if series.len() < window {
        return Err(Error::InsufficientData {
            level: Some(series.level()),
            reason: format!("{} samples is fewer than the window of {window}", series.len()),
        });
    }
    let returns: Vec<f64> = log_returns(series)?.into_iter().map(|(_, r)| r).collect();
    let magnitudes: Vec<f64> = sliding_variances(&returns, window - 1)
        .into_iter()
        .map(|v| v / dt)
        .collect();
    let signs = match sign {
        SignMethod::VolatilityTrend { trend_window, threshold } => assign_sign(&magnitudes, trend_window, threshold)?,
        SignMethod::AlwaysPositive => vec![Sign::Positive; magnitudes.len()],
    };
    let mut temperatures = vec![None; window - 1];
    temperatures.extend(magnitudes.iter().zip(signs).map(|(&t, s)| {
        Some(match s {
            Sign::Positive => t,
            Sign::Negative => -t,
        })
    }));
    Ok(TemperatureSeries {
        timestamps: series.timestamps().to_vec(),
        temperatures,
        level: series.level(),
        window,
        sign_method: sign,
    })
}

/// Least-squares slope of `ys` against `0, 1, …`, divided by the mean of `ys`.
/// `None` when the mean is zero.
pub fn normalized_slope(ys: &[f64]) -> Option<f64> {
    let n = ys.len() as f64;
    let mean_y = ys.iter().sum::<f64>() / n;
    if mean_y == 0.0 {
        return None;
    }
    let mean_x = (n - 1.0) / 2.0;
    let (sxy, sxx) = ys.iter().enumerate().fold((0.0, 0.0), |(sxy, sxx), (i, &y)| {
        let dx = i as f64 - mean_x;
        (sxy + dx * (y - mean_y), sxx + dx * dx)
    });
    Some(sxy / sxx / mean_y)
}

/// Sign of the temperature from the trend of its magnitude.
///
/// The first `trend_window - 1` entries have no full window and default to
/// positive, as do windows whose magnitudes are all zero.
pub fn assign_sign(abs_temps: &[f64], trend_window: usize, threshold: f64) -> Result<Vec<Sign>> {
    if trend_window < 3 {
        return Err(Error::invalid("trend_window", format!("must be at least 3, got {trend_window}")));
    }
    if !threshold.is_finite() {
        return Err(Error::invalid("threshold", "must be finite"));
    }
    let mut out = vec![Sign::Positive; abs_temps.len()];
    for end in trend_window - 1..abs_temps.len() {
        let w = &abs_temps[end + 1 - trend_window..=end];
        if matches!(normalized_slope(w), Some(s) if s > threshold) {
            out[end] = Sign::Negative;
        }
    }
    Ok(out)
}
