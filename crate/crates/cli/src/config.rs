//! Flat `key = value` run configuration.
//!
//! Settings are layered: config file, then the `SPINMARKET_SEED`
//! environment variable, then command-line flags.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use spinmarket_core::renorm::{PartitionRule, WeightMode, MS_PER_DAY};
use spinmarket_core::signal::{DEFAULT_FLOOR, DEFAULT_TOLERANCE};
use spinmarket_core::thermometer::{SignMethod, DEFAULT_THRESHOLD, DEFAULT_TREND_WINDOW};

use crate::error::{CliError, Result};

pub const SEED_ENV: &str = "SPINMARKET_SEED";

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConfigMap {
    entries: BTreeMap<String, String>,
}

impl ConfigMap {
    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |reason: String| CliError::Parse {
                path: source.to_string(),
                row: i + 1,
                line: i + 1,
                reason,
            };
            let (key, value) = line.split_once('=').ok_or_else(|| err(format!("expected `key = value`, found `{line}`")))?;
            let key = key.trim();
            if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.') {
                return Err(err(format!("invalid key `{key}`")));
            }
            if entries.insert(key.to_string(), value.trim().to_string()).is_some() {
                return Err(err(format!("duplicate key `{key}`")));
            }
        }
        Ok(Self { entries })
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_string(), value.into());
    }

    /// Applies a `key=value` override.
    pub fn set_pair(&mut self, pair: &str) -> Result<()> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| CliError::Validation(format!("override `{pair}` is not key=value")))?;
        self.set(k.trim(), v.trim());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    Tick,
    Ohlcv,
}

impl FromStr for InputFormat {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tick" => Ok(InputFormat::Tick),
            "ohlcv" => Ok(InputFormat::Ohlcv),
            _ => Err(CliError::Validation(format!("unknown format `{s}` (tick, ohlcv)"))),
        }
    }
}

impl InputFormat {
    pub fn name(self) -> &'static str {
        match self {
            InputFormat::Tick => "tick",
            InputFormat::Ohlcv => "ohlcv",
        }
    }
}

/// Input of a pipeline run: a file, or seeded synthetic GBM ticks.
#[derive(Debug, Clone, PartialEq)]
pub enum InputSource {
    File { path: PathBuf, format: InputFormat },
    Gbm { n: usize, sigma: f64, mu: f64, spacing_ms: i64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub input: InputSource,
    /// Expected SHA-256 of the input file, when re-running from a manifest.
    pub input_sha256: Option<String>,
    pub seed: Option<u64>,
    pub partitions: Vec<String>,
    pub window: usize,
    pub weights: WeightMode,
    pub sign: SignMethod,
    pub tolerance: f64,
    pub floor: f64,
    pub time_unit_ms: f64,
    pub dt: Option<Vec<f64>>,
}

/// Keys a manifest carries for the record; accepted and ignored on input.
fn informational(key: &str) -> bool {
    key == "tool_version" || key.starts_with("output.")
}

const KNOWN: [&str; 19] = [
    "input", "format", "input_sha256", "seed", "levels", "partitions", "window", "weights", "sign", "trend_window",
    "threshold", "tolerance", "floor", "time_unit_ms", "dt", "gbm_n", "gbm_sigma", "gbm_mu", "gbm_spacing_ms",
];

fn parse_value<T: FromStr>(map: &ConfigMap, key: &str, default: T) -> Result<T> {
    match map.get(key) {
        None => Ok(default),
        Some(v) => v
            .parse()
            .map_err(|_| CliError::Validation(format!("`{key}` has invalid value `{v}`"))),
    }
}

fn positive(key: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(CliError::Validation(format!("`{key}` must be positive, got {v}")))
    }
}

impl PipelineConfig {
    pub fn from_map(map: &ConfigMap) -> Result<Self> {
        if let Some(k) = map.keys().find(|k| !KNOWN.contains(k) && !informational(k)) {
            return Err(CliError::Validation(format!("unknown config key `{k}`")));
        }
        let format = map.get("format").unwrap_or("tick");
        let input = if format == "gbm" {
            let spacing_ms: i64 = parse_value(map, "gbm_spacing_ms", 60_000)?;
            if spacing_ms <= 0 {
                return Err(CliError::Validation("`gbm_spacing_ms` must be positive".into()));
            }
            InputSource::Gbm {
                n: parse_value(map, "gbm_n", 20_000)?,
                sigma: parse_value(map, "gbm_sigma", 0.2)?,
                mu: parse_value(map, "gbm_mu", 0.0)?,
                spacing_ms,
            }
        } else {
            let path = map
                .get("input")
                .ok_or_else(|| CliError::Validation("`input` is required unless format = gbm".into()))?;
            InputSource::File {
                path: PathBuf::from(path),
                format: format.parse()?,
            }
        };
        let seed = match map.get("seed") {
            None | Some("none") => None,
            Some(_) => Some(parse_value(map, "seed", 0u64)?),
        };
        if matches!(input, InputSource::Gbm { .. }) && seed.is_none() {
            return Err(CliError::Validation("synthetic input needs a `seed`".into()));
        }
        let partitions: Vec<String> = map
            .get("partitions")
            .unwrap_or("day,fixed:5")
            .split(',')
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect();
        for p in &partitions {
            p.parse::<PartitionRule>()?;
        }
        if map.get("levels").is_some() {
            let levels: usize = parse_value(map, "levels", 0)?;
            if levels != partitions.len() + 1 {
                return Err(CliError::Validation(format!(
                    "`levels = {levels}` needs {} partitions, found {}",
                    levels.saturating_sub(1),
                    partitions.len()
                )));
            }
        }
        let window: usize = parse_value(map, "window", 32)?;
        if window < 3 {
            return Err(CliError::Validation(format!("`window` must be at least 3, got {window}")));
        }
        let sign = match map.get("sign").unwrap_or("trend") {
            "trend" => {
                let trend_window: usize = parse_value(map, "trend_window", DEFAULT_TREND_WINDOW)?;
                if trend_window < 3 {
                    return Err(CliError::Validation("`trend_window` must be at least 3".into()));
                }
                SignMethod::VolatilityTrend {
                    trend_window,
                    threshold: parse_value(map, "threshold", DEFAULT_THRESHOLD)?,
                }
            }
            "positive" => SignMethod::AlwaysPositive,
            other => return Err(CliError::Validation(format!("unknown sign method `{other}` (trend, positive)"))),
        };
        let dt = match map.get("dt") {
            None | Some("auto") => None,
            Some(list) => {
                let dts = list
                    .split(',')
                    .map(|s| {
                        s.trim()
                            .parse::<f64>()
                            .map_err(|_| CliError::Validation(format!("`dt` entry `{s}` is not a number")))
                            .and_then(|v| positive("dt", v))
                    })
                    .collect::<Result<Vec<_>>>()?;
                if dts.len() != partitions.len() + 1 {
                    return Err(CliError::Validation(format!(
                        "`dt` lists {} values for {} levels",
                        dts.len(),
                        partitions.len() + 1
                    )));
                }
                Some(dts)
            }
        };
        Ok(Self {
            input,
            input_sha256: map.get("input_sha256").map(str::to_string),
            seed,
            weights: parse_value(map, "weights", WeightMode::Volume)?,
            partitions,
            window,
            sign,
            tolerance: positive("tolerance", parse_value(map, "tolerance", DEFAULT_TOLERANCE)?)?,
            floor: positive("floor", parse_value(map, "floor", DEFAULT_FLOOR)?)?,
            time_unit_ms: positive("time_unit_ms", parse_value(map, "time_unit_ms", MS_PER_DAY as f64)?)?,
            dt,
        })
    }

    pub fn partition_rules(&self) -> Vec<PartitionRule> {
        self.partitions.iter().map(|p| p.parse().expect("validated on load")).collect()
    }

    pub fn n_levels(&self) -> usize {
        self.partitions.len() + 1
    }

    /// Canonical `key = value` lines; a valid config that reproduces the run.
    pub fn to_lines(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = Vec::new();
        let mut push = |k: &str, v: String| out.push((k.to_string(), v));
        match &self.input {
            InputSource::File { path, format } => {
                push("input", path.display().to_string());
                push("format", format.name().into());
            }
            InputSource::Gbm { n, sigma, mu, spacing_ms } => {
                push("format", "gbm".into());
                push("gbm_n", n.to_string());
                push("gbm_sigma", sigma.to_string());
                push("gbm_mu", mu.to_string());
                push("gbm_spacing_ms", spacing_ms.to_string());
            }
        }
        push("seed", self.seed.map_or("none".into(), |s| s.to_string()));
        push("levels", self.n_levels().to_string());
        push("partitions", self.partitions.join(","));
        push("window", self.window.to_string());
        push(
            "weights",
            match self.weights {
                WeightMode::Volume => "volume",
                WeightMode::Uniform => "uniform",
                WeightMode::OpenCloseOnly => "open_close_only",
            }
            .into(),
        );
        match self.sign {
            SignMethod::VolatilityTrend { trend_window, threshold } => {
                push("sign", "trend".into());
                push("trend_window", trend_window.to_string());
                push("threshold", threshold.to_string());
            }
            SignMethod::AlwaysPositive => push("sign", "positive".into()),
        }
        push("tolerance", self.tolerance.to_string());
        push("floor", self.floor.to_string());
        push("time_unit_ms", self.time_unit_ms.to_string());
        push(
            "dt",
            self.dt
                .as_ref()
                .map_or("auto".into(), |d| d.iter().map(f64::to_string).collect::<Vec<_>>().join(",")),
        );
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_layer() {
        let mut m = ConfigMap::parse("# run\ninput = data.csv\nwindow=16\n\nseed = 4\n", "cfg").unwrap();
        assert_eq!(m.get("window"), Some("16"));
        m.set_pair("window=20").unwrap();
        let cfg = PipelineConfig::from_map(&m).unwrap();
        assert_eq!(cfg.window, 20);
        assert_eq!(cfg.seed, Some(4));
        assert_eq!(cfg.partitions, vec!["day", "fixed:5"]);
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(ConfigMap::parse("window 16\n", "c").is_err());
        assert!(ConfigMap::parse("a = 1\na = 2\n", "c").is_err());
        assert!(ConfigMap::parse("bad key = 1\n", "c").is_err());
    }

    #[test]
    fn validates_values() {
        let cfg = |text: &str| PipelineConfig::from_map(&ConfigMap::parse(text, "c").unwrap());
        assert!(cfg("window = 16\n").is_err());
        assert!(cfg("input = x\nwindow = 2\n").is_err());
        assert!(cfg("input = x\ntolerance = 0\n").is_err());
        assert!(cfg("input = x\npartitions = weekly\n").is_err());
        assert!(cfg("input = x\nlevels = 4\npartitions = day\n").is_err());
        assert!(cfg("input = x\ndt = 1,2\npartitions = day,fixed:2\n").is_err());
        assert!(cfg("input = x\ncolour = red\n").is_err());
        assert!(cfg("format = gbm\n").is_err());
        assert!(cfg("format = gbm\nseed = 3\n").is_ok());
        assert!(cfg("input = x\noutput.events.csv = abc\ntool_version = 0\n").is_ok());
    }

    #[test]
    fn canonical_lines_round_trip() {
        let text = "input = data.csv\nformat = ohlcv\npartitions = fixed:5,fixed:4\nwindow = 8\nweights = open_close_only\ndt = 0.5,2.5,10\nsign = positive\n";
        let cfg = PipelineConfig::from_map(&ConfigMap::parse(text, "c").unwrap()).unwrap();
        let lines: String = cfg.to_lines().iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
        let again = PipelineConfig::from_map(&ConfigMap::parse(&lines, "c").unwrap()).unwrap();
        assert_eq!(cfg, again);
    }
}
