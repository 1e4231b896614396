use proptest::prelude::*;
use spinmarket_core::renorm::TemperatureStack;
use spinmarket_core::signal::{detect_transitions, DetectorConfig};
use spinmarket_core::thermometer::{SignMethod, TemperatureSeries};

fn level(ts: Vec<i64>, temps: Vec<Option<f64>>, k: usize) -> TemperatureSeries {
    TemperatureSeries {
        timestamps: ts,
        temperatures: temps,
        level: k,
        window: 3,
        sign_method: SignMethod::AlwaysPositive,
    }
}

/// Three levels over `n` instants; coarse levels close every 3 and 9 instants.
/// Values are drawn near 1 so that coincidences are common.
fn stack_strategy() -> impl Strategy<Value = TemperatureStack> {
    (30usize..120).prop_flat_map(|n| {
        let value = prop_oneof![8 => 0.8f64..1.2, 1 => -1.2f64..-0.8, 1 => Just(0.0)];
        (
            prop::collection::vec(value.clone(), n),
            prop::collection::vec(value.clone(), n / 3),
            prop::collection::vec(value, n / 9),
            0usize..4,
        )
            .prop_map(move |(v0, v1, v2, warm)| {
                let ts0: Vec<i64> = (0..n as i64).map(|i| 100 * i).collect();
                let coarse = |vals: Vec<f64>, b: usize, k| {
                    let ts = (0..vals.len()).map(|j| ts0[(j + 1) * b - 1]).collect();
                    let temps = vals.into_iter().enumerate().map(|(j, v)| (j >= warm).then_some(v)).collect();
                    level(ts, temps, k)
                };
                let l0 = level(ts0.clone(), v0.into_iter().map(Some).collect(), 0);
                TemperatureStack::from_levels(vec![l0, coarse(v1, 3, 1), coarse(v2, 9, 2)]).unwrap()
            })
    })
}

fn scaled(stack: &TemperatureStack, c: f64) -> TemperatureStack {
    let levels = stack
        .levels
        .iter()
        .map(|l| TemperatureSeries {
            temperatures: l.temperatures.iter().map(|t| t.map(|t| t * c)).collect(),
            ..l.clone()
        })
        .collect();
    TemperatureStack::from_levels(levels).unwrap()
}

proptest! {
    #[test]
    fn events_respect_tolerance_and_causality(stack in stack_strategy(), tol in 0.01f64..0.5) {
        let cfg = DetectorConfig { tolerance: tol, ..Default::default() };
        let events = detect_transitions(&stack, &cfg).unwrap();
        let mut last_index = None;
        for e in &events {
            prop_assert!(e.relative_spread < tol);
            prop_assert!(e.level_values.iter().all(|&v| v > 0.0) || e.level_values.iter().all(|&v| v < 0.0));
            prop_assert_eq!(stack.levels[0].timestamps[e.level0_index], e.timestamp);
            for (k, &src) in e.source_timestamps.iter().enumerate() {
                prop_assert!(src <= e.timestamp);
                let j = stack.levels[k].timestamps.binary_search(&src).unwrap();
                prop_assert!(stack.alignment[k][j].end <= e.level0_index);
            }
            if let Some(prev) = last_index {
                prop_assert!(e.level0_index > prev + 1, "debounced runs cannot touch");
            }
            last_index = Some(e.level0_index);
        }
    }

    #[test]
    fn power_of_two_scaling_changes_nothing(stack in stack_strategy(), k in -30i32..30) {
        let cfg = DetectorConfig::default();
        let a = detect_transitions(&stack, &cfg).unwrap();
        let b = detect_transitions(&scaled(&stack, 2f64.powi(k)), &cfg).unwrap();
        prop_assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            prop_assert_eq!(x.timestamp, y.timestamp);
            prop_assert_eq!(x.relative_spread, y.relative_spread);
        }
    }
}
