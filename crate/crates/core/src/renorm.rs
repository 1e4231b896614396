//! Block renormalization of price series and the resulting stack of
//! temperatures `T, T′, T″, …`.
//!
//! Each block of consecutive samples is replaced by a convex combination of
//! its prices, stamped with the block's closing timestamp so that a coarse
//! sample never depends on data after its own timestamp.

use std::ops::Range;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::table::CsvTable;
use crate::thermometer::{estimate_temperature, PriceSeries, SignMethod, TemperatureSeries, ThermometerConfig};

pub const MS_PER_DAY: i64 = 86_400_000;

/// Contiguous, non-empty index ranges covering `0..len`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockPartition {
    blocks: Vec<Range<usize>>,
}

impl BlockPartition {
    pub fn new(blocks: Vec<Range<usize>>, len: usize) -> Result<Self> {
        let mut next = 0;
        for (i, b) in blocks.iter().enumerate() {
            if b.start != next {
                return Err(Error::invalid("partition", format!("block {i} starts at {} instead of {next}", b.start)));
            }
            if b.is_empty() {
                return Err(Error::invalid("partition", format!("block {i} is empty")));
            }
            next = b.end;
        }
        if next != len {
            return Err(Error::invalid("partition", format!("blocks cover {next} samples, series has {len}")));
        }
        Ok(Self { blocks })
    }

    /// Blocks of `size` samples; the last block takes the remainder.
    pub fn fixed_size(len: usize, size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::invalid("block size", "must be positive"));
        }
        let blocks = (0..len).step_by(size).map(|s| s..(s + size).min(len)).collect();
        Self::new(blocks, len)
    }

    pub fn singletons(len: usize) -> Self {
        Self {
            blocks: (0..len).map(|i| i..i + 1).collect(),
        }
    }

    /// One block per run of timestamps sharing `floor((ts - offset) / bucket)`.
    pub fn time_buckets(timestamps: &[i64], bucket_ms: i64, offset_ms: i64) -> Result<Self> {
        if bucket_ms <= 0 {
            return Err(Error::invalid("bucket", format!("must be a positive duration, got {bucket_ms} ms")));
        }
        let key = |ts: i64| (ts - offset_ms).div_euclid(bucket_ms);
        let mut blocks = Vec::new();
        let mut start = 0;
        for i in 1..=timestamps.len() {
            if i == timestamps.len() || key(timestamps[i]) != key(timestamps[start]) {
                blocks.push(start..i);
                start = i;
            }
        }
        Self::new(blocks, timestamps.len())
    }

    /// One block per UTC calendar day.
    pub fn calendar_days(timestamps: &[i64]) -> Result<Self> {
        Self::time_buckets(timestamps, MS_PER_DAY, 0)
    }

    pub fn blocks(&self) -> &[Range<usize>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn covered_len(&self) -> usize {
        self.blocks.last().map_or(0, |b| b.end)
    }
}

/// How to build the partition of one level from that level's series.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PartitionRule {
    Fixed(usize),
    TimeBucket { bucket_ms: i64 },
    CalendarDay,
    Singletons,
    Explicit(BlockPartition),
}

impl PartitionRule {
    pub fn apply(&self, series: &PriceSeries) -> Result<BlockPartition> {
        match self {
            PartitionRule::Fixed(size) => BlockPartition::fixed_size(series.len(), *size),
            PartitionRule::TimeBucket { bucket_ms } => BlockPartition::time_buckets(series.timestamps(), *bucket_ms, 0),
            PartitionRule::CalendarDay => BlockPartition::calendar_days(series.timestamps()),
            PartitionRule::Singletons => Ok(BlockPartition::singletons(series.len())),
            PartitionRule::Explicit(p) if p.covered_len() == series.len() => Ok(p.clone()),
            PartitionRule::Explicit(p) => Err(Error::invalid(
                "partition",
                format!("covers {} samples, series has {}", p.covered_len(), series.len()),
            )),
        }
    }
}

/// Parses `fixed:<n>`, `bucket:<ms>`, `day` or `singletons`.
impl FromStr for PartitionRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let number = |v: &str| {
            v.trim()
                .parse::<i64>()
                .map_err(|_| Error::invalid("partition", format!("`{s}` does not end in an integer")))
        };
        match s.split_once(':') {
            Some(("fixed", v)) => {
                let n = number(v)?;
                if n <= 0 {
                    return Err(Error::invalid("partition", format!("`{s}` needs a positive block size")));
                }
                Ok(PartitionRule::Fixed(n as usize))
            }
            Some(("bucket", v)) => Ok(PartitionRule::TimeBucket { bucket_ms: number(v)? }),
            None if s == "day" => Ok(PartitionRule::CalendarDay),
            None if s == "singletons" => Ok(PartitionRule::Singletons),
            _ => Err(Error::invalid("partition", format!("unknown rule `{s}` (fixed:N, bucket:MS, day, singletons)"))),
        }
    }
}

/// Non-negative per-sample masses for every block. Weights are the masses
/// normalized within their block.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightProfile {
    masses: Vec<Vec<f64>>,
}

impl WeightProfile {
    /// Accepts per-block masses; a block whose masses sum to zero is uniform.
    pub fn from_masses(mut masses: Vec<Vec<f64>>) -> Result<Self> {
        for (i, block) in masses.iter_mut().enumerate() {
            if block.is_empty() {
                return Err(Error::invalid("weights", format!("block {i} is empty")));
            }
            if block.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
                return Err(Error::invalid("weights", format!("block {i} has a negative or non-finite weight")));
            }
            if block.iter().all(|&w| w == 0.0) {
                block.iter_mut().for_each(|w| *w = 1.0);
            }
        }
        Ok(Self { masses })
    }

    pub fn uniform(partition: &BlockPartition) -> Self {
        Self {
            masses: partition.blocks().iter().map(|b| vec![1.0; b.len()]).collect(),
        }
    }

    pub fn n_blocks(&self) -> usize {
        self.masses.len()
    }

    pub fn masses(&self, block: usize) -> &[f64] {
        &self.masses[block]
    }

    /// Normalized weights of one block.
    pub fn weights(&self, block: usize) -> Vec<f64> {
        let m = &self.masses[block];
        let total = compensated_sum(m);
        m.iter().map(|w| w / total).collect()
    }

    fn conforms_to(&self, partition: &BlockPartition) -> Result<()> {
        if self.masses.len() != partition.len() {
            return Err(Error::invalid(
                "weights",
                format!("{} blocks of weights for a partition of {}", self.masses.len(), partition.len()),
            ));
        }
        for (i, (m, b)) in self.masses.iter().zip(partition.blocks()).enumerate() {
            if m.len() != b.len() {
                return Err(Error::invalid("weights", format!("block {i} has {} weights for {} samples", m.len(), b.len())));
            }
        }
        Ok(())
    }
}

/// Transaction-frequency weights: each block's volumes, normalized.
pub fn block_weights_from_volume(series: &PriceSeries, partition: &BlockPartition) -> Result<WeightProfile> {
    let volumes = series
        .volumes()
        .ok_or_else(|| Error::MissingData(format!("level {} series has no volumes", series.level())))?;
    if partition.covered_len() != series.len() {
        return Err(Error::invalid("partition", "does not cover the series"));
    }
    WeightProfile::from_masses(partition.blocks().iter().map(|b| volumes[b.clone()].to_vec()).collect())
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn compensated_sum(xs: &[f64]) -> f64 {
    let (s, c) = xs.iter().fold((0.0, 0.0), |(s, c), &x| {
        let (s, e) = two_sum(s, x);
        (s, c + e)
    });
    s + c
}

/// Dot product evaluated in roughly twice the working precision.
fn compensated_dot(xs: &[f64], ys: &[f64]) -> f64 {
    let (s, c) = xs.iter().zip(ys).fold((0.0, 0.0), |(s, c), (&x, &y)| {
        let p = x * y;
        let ep = x.mul_add(y, -p);
        let (s, es) = two_sum(s, p);
        (s, c + ep + es)
    });
    s + c
}

/// Convex combination of `prices` by `masses`. Equal masses give exactly
/// the arithmetic mean; the result is clamped into `[min, max]` of `prices`.
fn weighted_value(prices: &[f64], masses: &[f64]) -> f64 {
    let value = if masses.iter().all(|&m| m == masses[0]) {
        prices.iter().sum::<f64>() / prices.len() as f64
    } else {
        compensated_dot(masses, prices) / compensated_sum(masses)
    };
    let (lo, hi) = prices.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &p| (lo.min(p), hi.max(p)));
    value.clamp(lo, hi)
}

fn aggregate_volumes(series: &PriceSeries, partition: &BlockPartition) -> Option<Vec<f64>> {
    series
        .volumes()
        .map(|v| partition.blocks().iter().map(|b| v[b.clone()].iter().sum()).collect())
}

fn closing_timestamps(series: &PriceSeries, partition: &BlockPartition) -> Vec<i64> {
    partition.blocks().iter().map(|b| series.timestamps()[b.end - 1]).collect()
}

/// One sample per block: the weighted price, stamped at the block close,
/// with summed volumes and the level incremented.
pub fn renormalize_series(series: &PriceSeries, partition: &BlockPartition, weights: &WeightProfile) -> Result<PriceSeries> {
    if partition.covered_len() != series.len() {
        return Err(Error::invalid(
            "partition",
            format!("covers {} samples, series has {}", partition.covered_len(), series.len()),
        ));
    }
    weights.conforms_to(partition)?;
    let prices = partition
        .blocks()
        .iter()
        .enumerate()
        .map(|(i, b)| weighted_value(&series.prices()[b.clone()], weights.masses(i)))
        .collect();
    let out = PriceSeries::new(
        closing_timestamps(series, partition),
        prices,
        aggregate_volumes(series, partition),
        series.level() + 1,
    )?;
    match series.opens() {
        Some(opens) => out.with_opens(partition.blocks().iter().map(|b| opens[b.start]).collect()),
        None => Ok(out),
    }
}

/// Uses only each block's opening and closing price, weighted by the volumes
/// of the first and last samples. The opening price is the first sample's
/// session open when present, otherwise its price.
pub fn renormalize_open_close(series: &PriceSeries, partition: &BlockPartition) -> Result<PriceSeries> {
    if partition.covered_len() != series.len() {
        return Err(Error::invalid("partition", "does not cover the series"));
    }
    let p = series.prices();
    let prices = partition
        .blocks()
        .iter()
        .map(|b| {
            let (first, last) = (b.start, b.end - 1);
            let open = series.opens().map_or(p[first], |o| o[first]);
            if first == last && series.opens().is_none() {
                return p[first];
            }
            let masses = match series.volumes() {
                Some(v) if v[first] + v[last] > 0.0 => [v[first], v[last]],
                _ => [1.0, 1.0],
            };
            weighted_value(&[open, p[last]], &masses)
        })
        .collect();
    let out = PriceSeries::new(
        closing_timestamps(series, partition),
        prices,
        aggregate_volumes(series, partition),
        series.level() + 1,
    )?;
    match series.opens() {
        Some(opens) => out.with_opens(partition.blocks().iter().map(|b| opens[b.start]).collect()),
        None => Ok(out),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeightMode {
    #[default]
    Volume,
    Uniform,
    OpenCloseOnly,
}

impl FromStr for WeightMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "volume" => Ok(WeightMode::Volume),
            "uniform" => Ok(WeightMode::Uniform),
            "open_close_only" => Ok(WeightMode::OpenCloseOnly),
            other => Err(Error::invalid("weights", format!("unknown mode `{other}` (volume, uniform, open_close_only)"))),
        }
    }
}

/// Renormalizes with the given weighting mode.
pub fn renormalize_with(series: &PriceSeries, partition: &BlockPartition, mode: WeightMode) -> Result<PriceSeries> {
    match mode {
        WeightMode::Volume => renormalize_series(series, partition, &block_weights_from_volume(series, partition)?),
        WeightMode::Uniform => renormalize_series(series, partition, &WeightProfile::uniform(partition)),
        WeightMode::OpenCloseOnly => renormalize_open_close(series, partition),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StackConfig {
    pub window: usize,
    pub sign: SignMethod,
    pub weights: WeightMode,
    /// Explicit sampling interval per level (level 0 first). When absent, each
    /// level uses its mean timestamp spacing divided by `time_unit_ms`.
    pub dt_per_level: Option<Vec<f64>>,
    pub time_unit_ms: f64,
}

impl Default for StackConfig {
    fn default() -> Self {
        Self {
            window: crate::thermometer::DEFAULT_WINDOW,
            sign: SignMethod::default(),
            weights: WeightMode::Volume,
            dt_per_level: None,
            time_unit_ms: MS_PER_DAY as f64,
        }
    }
}

/// Inclusive range of level-0 sample indices a sample was built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Level0Span {
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemperatureStack {
    pub levels: Vec<TemperatureSeries>,
    /// Price series per level; empty when the stack was assembled from
    /// temperatures alone.
    pub prices: Vec<PriceSeries>,
    /// For every level and sample, the covered level-0 samples.
    pub alignment: Vec<Vec<Level0Span>>,
}

impl TemperatureStack {
    /// Assembles a stack from precomputed temperature series. A level-k sample
    /// covers the level-0 samples after the previous level-k timestamp up to
    /// and including its own.
    pub fn from_levels(levels: Vec<TemperatureSeries>) -> Result<Self> {
        let Some(base) = levels.first() else {
            return Err(Error::invalid("levels", "stack is empty"));
        };
        let base_ts = base.timestamps.clone();
        let mut alignment = Vec::with_capacity(levels.len());
        for (k, level) in levels.iter().enumerate() {
            if k > 0 && level.len() > levels[k - 1].len() {
                return Err(Error::invalid("levels", format!("level {k} has more samples than level {}", k - 1)));
            }
            if level.timestamps.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::invalid("levels", format!("level {k} timestamps are not strictly increasing")));
            }
            let mut spans = Vec::with_capacity(level.len());
            let mut start = 0;
            for &ts in &level.timestamps {
                let end = base_ts.partition_point(|&t| t <= ts);
                if end <= start {
                    return Err(Error::invalid("levels", format!("level {k} sample at {ts} covers no level-0 sample")));
                }
                spans.push(Level0Span { start, end: end - 1 });
                start = end;
            }
            alignment.push(spans);
        }
        Ok(Self {
            levels,
            prices: Vec::new(),
            alignment,
        })
    }

    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    /// `level,ts,level0_block_start,level0_block_end`, the last two as the
    /// timestamps of the first and last covered level-0 samples.
    pub fn alignment_csv(&self) -> String {
        let base = &self.levels[0].timestamps;
        let mut t = CsvTable::new(&["level", "ts", "level0_block_start", "level0_block_end"]);
        for (k, (level, spans)) in self.levels.iter().zip(&self.alignment).enumerate() {
            for (ts, span) in level.timestamps.iter().zip(spans) {
                t.row([k.to_string(), ts.to_string(), base[span.start].to_string(), base[span.end].to_string()]);
            }
        }
        t.finish()
    }
}

fn level_dt(series: &PriceSeries, level: usize, config: &StackConfig) -> Result<f64> {
    match &config.dt_per_level {
        Some(dts) => dts
            .get(level)
            .copied()
            .ok_or_else(|| Error::invalid("dt_per_level", format!("no entry for level {level}"))),
        None => {
            if !(config.time_unit_ms.is_finite() && config.time_unit_ms > 0.0) {
                return Err(Error::invalid("time_unit_ms", "must be positive"));
            }
            let spacing = series.mean_spacing_ms().ok_or_else(|| Error::InsufficientData {
                level: Some(level),
                reason: "fewer than two samples".into(),
            })?;
            Ok(spacing / config.time_unit_ms)
        }
    }
}

/// Temperature of `series`, then of each successive renormalization.
/// `partitions[k]` coarsens level `k` into level `k + 1`.
pub fn temperature_stack(series: &PriceSeries, partitions: &[PartitionRule], config: &StackConfig) -> Result<TemperatureStack> {
    if let Some(dts) = &config.dt_per_level {
        if dts.len() != partitions.len() + 1 {
            return Err(Error::invalid(
                "dt_per_level",
                format!("{} entries for {} levels", dts.len(), partitions.len() + 1),
            ));
        }
        if let Some(dt) = dts.iter().find(|dt| !(dt.is_finite() && **dt > 0.0)) {
            return Err(Error::invalid("dt_per_level", format!("entries must be positive, got {dt}")));
        }
    }
    let mut prices = vec![series.clone()];
    let mut alignment = vec![(0..series.len()).map(|i| Level0Span { start: i, end: i }).collect::<Vec<_>>()];
    for rule in partitions {
        let below = prices.last().expect("level 0 present");
        let spans_below = alignment.last().expect("level 0 present");
        let partition = rule.apply(below)?;
        let next = renormalize_with(below, &partition, config.weights)?;
        alignment.push(
            partition
                .blocks()
                .iter()
                .map(|b| Level0Span {
                    start: spans_below[b.start].start,
                    end: spans_below[b.end - 1].end,
                })
                .collect(),
        );
        prices.push(next);
    }
    if let Some((k, p)) = prices.iter().enumerate().find(|(_, p)| p.len() < config.window) {
        return Err(Error::InsufficientData {
            level: Some(k),
            reason: format!("{} samples is fewer than the window of {}", p.len(), config.window),
        });
    }
    let levels = prices
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let thermometer = ThermometerConfig {
                window: config.window,
                dt: level_dt(p, k, config)?,
                sign: config.sign,
            };
            estimate_temperature(p, &thermometer)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TemperatureStack { levels, prices, alignment })
}
