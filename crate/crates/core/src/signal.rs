//! Coincidence detection across renormalization levels.
//!
//! A candidate transition is an instant at which the temperatures of all
//! levels agree in sign and lie within a relative tolerance of one another.

use crate::error::{Error, Result};
use crate::renorm::TemperatureStack;
use crate::table::{float17, CsvTable};

pub const DEFAULT_TOLERANCE: f64 = 0.15;
pub const DEFAULT_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorConfig {
    pub tolerance: f64,
    pub floor: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            tolerance: DEFAULT_TOLERANCE,
            floor: DEFAULT_FLOOR,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventNote {
    Coincidence,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignalEvent {
    pub timestamp: i64,
    /// Index of the instant in the level-0 series.
    pub level0_index: usize,
    pub level_values: Vec<f64>,
    /// Timestamp of the sample each level value was taken from.
    pub source_timestamps: Vec<i64>,
    pub relative_spread: f64,
    pub note: EventNote,
}

/// `(max - min) / max(|mean|, floor)`.
pub fn relative_spread(values: &[f64], floor: f64) -> f64 {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    (hi - lo) / mean.abs().max(floor)
}

fn same_strict_sign(values: &[f64]) -> bool {
    values.iter().all(|&v| v > 0.0) || values.iter().all(|&v| v < 0.0)
}

/// Scans the level-0 instants in order. At each instant every level
/// contributes its latest sample stamped no later than the instant; the
/// instant is skipped when any such sample is missing or still warming up.
/// Runs of consecutive qualifying instants yield one event at the first.
pub fn detect_transitions(stack: &TemperatureStack, config: &DetectorConfig) -> Result<Vec<SignalEvent>> {
    if stack.n_levels() < 2 {
        return Err(Error::invalid("stack", format!("needs at least 2 levels, got {}", stack.n_levels())));
    }
    if !(config.tolerance.is_finite() && config.tolerance > 0.0) {
        return Err(Error::invalid("tolerance", format!("must be positive, got {}", config.tolerance)));
    }
    if !(config.floor.is_finite() && config.floor > 0.0) {
        return Err(Error::invalid("floor", format!("must be positive, got {}", config.floor)));
    }
    let base = &stack.levels[0];
    let mut cursors = vec![0usize; stack.n_levels()];
    let mut events = Vec::new();
    let mut in_run = false;
    let mut values = Vec::with_capacity(stack.n_levels());
    let mut sources = Vec::with_capacity(stack.n_levels());
    for (i, &t) in base.timestamps.iter().enumerate() {
        values.clear();
        sources.clear();
        for (level, cursor) in stack.levels.iter().zip(cursors.iter_mut()) {
            while *cursor < level.len() && level.timestamps[*cursor] <= t {
                *cursor += 1;
            }
            if let Some(temp) = cursor.checked_sub(1).and_then(|j| level.temperatures[j]) {
                values.push(temp);
                sources.push(level.timestamps[*cursor - 1]);
            }
        }
        let qualifies = values.len() == stack.n_levels() && same_strict_sign(&values) && {
            let spread = relative_spread(&values, config.floor);
            spread < config.tolerance
        };
        if qualifies && !in_run {
            events.push(SignalEvent {
                timestamp: t,
                level0_index: i,
                level_values: values.clone(),
                source_timestamps: sources.clone(),
                relative_spread: relative_spread(&values, config.floor),
                note: EventNote::Coincidence,
            });
        }
        in_run = qualifies;
    }
    Ok(events)
}

/// `timestamp,spread,T0,T1,…` with one temperature column per level.
pub fn events_csv(events: &[SignalEvent], n_levels: usize) -> String {
    let mut header = vec!["timestamp".to_string(), "spread".to_string()];
    header.extend((0..n_levels).map(|k| format!("T{k}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut t = CsvTable::new(&header);
    for e in events {
        t.row(
            [e.timestamp.to_string(), float17(e.relative_spread)]
                .into_iter()
                .chain(e.level_values.iter().map(|&v| float17(v))),
        );
    }
    t.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thermometer::{SignMethod, TemperatureSeries};

    fn level(ts: Vec<i64>, temps: Vec<Option<f64>>, k: usize) -> TemperatureSeries {
        TemperatureSeries {
            timestamps: ts,
            temperatures: temps,
            level: k,
            window: 3,
            sign_method: SignMethod::AlwaysPositive,
        }
    }

    fn constant_stack(values: &[f64], n: usize) -> TemperatureStack {
        let ts: Vec<i64> = (0..n as i64).collect();
        TemperatureStack::from_levels(
            values
                .iter()
                .enumerate()
                .map(|(k, &v)| level(ts.clone(), vec![Some(v); n], k))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn spread_examples() {
        assert_eq!(relative_spread(&[1.0, 1.0, 1.0], 1e-12), 0.0);
        assert!((relative_spread(&[1.0, 2.0, 1.5], 1e-12) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(relative_spread(&[0.0, 0.0], 1e-12), 0.0);
    }

    #[test]
    fn identical_levels_give_one_event() {
        let events = detect_transitions(&constant_stack(&[1.0, 1.0, 1.0], 5), &DetectorConfig::default()).unwrap();
        assert_eq!(events.len(), 1);
        assert_eq!(events[0].timestamp, 0);
        assert_eq!(events[0].relative_spread, 0.0);
        assert_eq!(events[0].level_values, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn spread_above_tolerance_gives_nothing() {
        let cfg = DetectorConfig { tolerance: 0.1, ..Default::default() };
        assert!(detect_transitions(&constant_stack(&[1.0, 2.0, 1.5], 5), &cfg).unwrap().is_empty());
    }

    #[test]
    fn mixed_signs_and_zeros_never_fire() {
        assert!(detect_transitions(&constant_stack(&[1e-13, -1e-13], 4), &DetectorConfig::default()).unwrap().is_empty());
        assert!(detect_transitions(&constant_stack(&[0.0, 0.0], 4), &DetectorConfig::default()).unwrap().is_empty());
        assert_eq!(detect_transitions(&constant_stack(&[-2.0, -2.1], 4), &DetectorConfig::default()).unwrap().len(), 1);
    }

    #[test]
    fn parameter_errors() {
        assert!(detect_transitions(&constant_stack(&[1.0], 3), &DetectorConfig::default()).is_err());
        let s = constant_stack(&[1.0, 1.0], 3);
        assert!(detect_transitions(&s, &DetectorConfig { tolerance: 0.0, ..Default::default() }).is_err());
        assert!(detect_transitions(&s, &DetectorConfig { floor: 0.0, ..Default::default() }).is_err());
    }

    #[test]
    fn waits_for_coarse_level_and_debounces() {
        let l0 = level((0..8).collect(), vec![None, Some(1.0), Some(1.0), Some(5.0), Some(1.0), Some(1.0), Some(1.0), Some(1.0)], 0);
        let l1 = level(vec![1, 3, 5, 7], vec![None, Some(1.0), Some(1.0), Some(1.0)], 1);
        let stack = TemperatureStack::from_levels(vec![l0, l1]).unwrap();
        let events = detect_transitions(&stack, &DetectorConfig::default()).unwrap();
        let ts: Vec<i64> = events.iter().map(|e| e.timestamp).collect();
        assert_eq!(ts, vec![4]);
        assert_eq!(events[0].source_timestamps, vec![4, 3]);
    }

    #[test]
    fn csv_layout() {
        let events = detect_transitions(&constant_stack(&[2.0, 2.0], 2), &DetectorConfig::default()).unwrap();
        assert_eq!(
            events_csv(&events, 2),
            "timestamp,spread,T0,T1\n0,0.0000000000000000e0,2.0000000000000000e0,2.0000000000000000e0\n"
        );
    }
}
