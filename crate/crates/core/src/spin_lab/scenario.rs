use super::SpinSystem;
use crate::error::{Error, Result};
use crate::stats::{batch_means, Estimate};
use crate::table::{float17, CsvTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    fn of(x: f64) -> Sign {
        if x.is_sign_negative() {
            Sign::Negative
        } else {
            Sign::Positive
        }
    }

    fn symbol(self) -> char {
        match self {
            Sign::Positive => '+',
            Sign::Negative => '-',
        }
    }
}

/// Two-level effective inverse temperature `beta = atanh(m) / h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EffectiveBeta {
    Finite(f64),
    /// `m = 0` with a nonzero field: `|T| = ∞`. The sign is the side the
    /// temperature diverged from (`-` when arriving from negative
    /// temperatures).
    InfiniteTemperature(Sign),
    /// Full polarization (`|m| = 1`) or a vanished field with `m ≠ 0`:
    /// `T = 0` approached with the given sign.
    ZeroTemperature(Sign),
}

impl EffectiveBeta {
    /// Classifies `(m, h)`; `previous` fixes the sign of an infinite-temperature marker.
    pub fn from_state(m: f64, h: f64, previous: Option<EffectiveBeta>) -> Self {
        if h == 0.0 {
            return if m == 0.0 {
                EffectiveBeta::Finite(0.0)
            } else {
                EffectiveBeta::ZeroTemperature(Sign::of(m))
            };
        }
        if m == 0.0 {
            let sign = match previous {
                Some(EffectiveBeta::Finite(b)) if b != 0.0 => Sign::of(b),
                Some(EffectiveBeta::InfiniteTemperature(s)) | Some(EffectiveBeta::ZeroTemperature(s)) => s,
                _ => Sign::Positive,
            };
            return EffectiveBeta::InfiniteTemperature(sign);
        }
        if m.abs() >= 1.0 {
            return EffectiveBeta::ZeroTemperature(Sign::of(m * h));
        }
        EffectiveBeta::Finite(m.atanh() / h)
    }

    /// Sign of beta (and of the temperature); `None` only for `beta = 0` with no field.
    pub fn sign(&self) -> Option<Sign> {
        match *self {
            EffectiveBeta::Finite(0.0) => None,
            EffectiveBeta::Finite(b) => Some(Sign::of(b)),
            EffectiveBeta::InfiniteTemperature(s) | EffectiveBeta::ZeroTemperature(s) => Some(s),
        }
    }

    pub fn is_infinite_temperature(&self) -> bool {
        matches!(self, EffectiveBeta::InfiniteTemperature(_))
    }

    /// `T = 1 / beta`, with the markers mapped to signed infinity / zero.
    pub fn temperature(&self) -> f64 {
        match *self {
            EffectiveBeta::Finite(b) => 1.0 / b,
            EffectiveBeta::InfiniteTemperature(Sign::Positive) => f64::INFINITY,
            EffectiveBeta::InfiniteTemperature(Sign::Negative) => f64::NEG_INFINITY,
            EffectiveBeta::ZeroTemperature(Sign::Positive) => 0.0,
            EffectiveBeta::ZeroTemperature(Sign::Negative) => -0.0,
        }
    }

    /// CSV cell: a float, `±inf` for the infinite-temperature marker, `±sat`
    /// for saturation.
    pub fn to_cell(&self) -> String {
        match *self {
            EffectiveBeta::Finite(b) => float17(b),
            EffectiveBeta::InfiniteTemperature(s) => format!("{}inf", s.symbol()),
            EffectiveBeta::ZeroTemperature(s) => format!("{}sat", s.symbol()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioStep {
    pub time_step: u64,
    pub magnetization: f64,
    pub field_h: f64,
    pub beta_eff: EffectiveBeta,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScenarioTrace {
    pub steps: Vec<ScenarioStep>,
}

impl ScenarioTrace {
    fn push(&mut self, time_step: u64, magnetization: f64, field_h: f64) {
        let previous = self.steps.last().map(|s| s.beta_eff);
        self.steps.push(ScenarioStep {
            time_step,
            magnetization,
            field_h,
            beta_eff: EffectiveBeta::from_state(magnetization, field_h, previous),
        });
    }

    pub fn to_csv(&self) -> String {
        let mut t = CsvTable::new(&["step", "magnetization", "field_h", "beta_eff"]);
        for s in &self.steps {
            t.row([s.time_step.to_string(), float17(s.magnetization), float17(s.field_h), s.beta_eff.to_cell()]);
        }
        t.finish()
    }

    /// Equilibrium inverse temperature estimated from the mean magnetization
    /// of the steps at or after `from_step`, sampled every `stride` steps.
    ///
    /// Uses `beta = atanh(<m>) / h` with a delta-method error. The field must
    /// be constant over the tail.
    pub fn tail_beta(&self, from_step: u64, stride: usize, n_batches: usize) -> Result<Estimate> {
        let tail: Vec<&ScenarioStep> = self.steps.iter().filter(|s| s.time_step >= from_step).collect();
        let Some(first) = tail.first() else {
            return Err(Error::InsufficientData {
                level: None,
                reason: "no steps after the requested start".into(),
            });
        };
        let h = first.field_h;
        if h == 0.0 || tail.iter().any(|s| s.field_h != h) {
            return Err(Error::invalid("from_step", "field must be constant and nonzero over the tail"));
        }
        let samples: Vec<f64> = tail.iter().step_by(stride.max(1)).map(|s| s.magnetization).collect();
        let m = batch_means(&samples, n_batches);
        if m.mean.abs() >= 1.0 {
            return Err(Error::DegenerateState("tail is fully polarized".into()));
        }
        Ok(Estimate {
            mean: m.mean.atanh() / h,
            std_err: m.std_err / ((1.0 - m.mean * m.mean) * h.abs()),
        })
    }
}

/// Sudden field inversion followed by Metropolis relaxation.
///
/// One step is one single-site Metropolis attempt, so the magnetization moves
/// by at most `2/N` per step and an even ring passes through `m = 0` exactly
/// on its way from one polarization to the other. Each step records the
/// state at its start; at `flip_time` the field is negated before recording.
pub fn population_inversion_run(system: &mut SpinSystem, flip_time: u64, total_steps: u64) -> Result<ScenarioTrace> {
    if flip_time >= total_steps {
        return Err(Error::invalid(
            "flip_time",
            format!("must precede total_steps ({flip_time} >= {total_steps})"),
        ));
    }
    if system.field_h() == 0.0 {
        return Err(Error::invalid("field_h", "a nonzero field is required to invert"));
    }
    system.metropolis_sweep(0)?;
    let mut trace = ScenarioTrace {
        steps: Vec::with_capacity(total_steps as usize),
    };
    for t in 0..total_steps {
        if t == flip_time {
            let h = system.field_h();
            system.set_field(-h)?;
        }
        trace.push(t, system.magnetization(), system.field_h());
        system.attempt();
    }
    Ok(trace)
}

/// Quasi-static adiabatic demagnetization of an ideal paramagnet.
///
/// The magnetization (hence the entropy) stays at `tanh(beta h)` while the
/// field ramps linearly to zero over `n_ramp_steps`, so `T_eff = h / atanh(m)`
/// falls in proportion to the field.
pub fn magnetocaloric_run(initial_beta: f64, initial_h: f64, n_ramp_steps: u64) -> Result<ScenarioTrace> {
    if !(initial_beta.is_finite() && initial_beta > 0.0) {
        return Err(Error::invalid("initial_beta", "must be positive and finite"));
    }
    if !(initial_h.is_finite() && initial_h > 0.0) {
        return Err(Error::invalid("initial_h", "must be positive and finite"));
    }
    if n_ramp_steps == 0 {
        return Err(Error::invalid("n_ramp_steps", "must be positive"));
    }
    let m = (initial_beta * initial_h).tanh();
    if m == 0.0 {
        return Err(Error::DegenerateState("initial magnetization is zero; T_eff is undefined".into()));
    }
    if m >= 1.0 {
        return Err(Error::DegenerateState("initial magnetization is saturated; T_eff is identically zero".into()));
    }
    let n = n_ramp_steps as f64;
    let mut trace = ScenarioTrace::default();
    for k in 0..=n_ramp_steps {
        let h = initial_h * (n_ramp_steps - k) as f64 / n;
        trace.push(k, m, h);
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_sign_logic() {
        let b = EffectiveBeta::from_state(0.6, -1.0, None);
        assert_eq!(b, EffectiveBeta::Finite(-(0.6f64.atanh())));
        assert_eq!(b.sign(), Some(Sign::Negative));
        let marker = EffectiveBeta::from_state(0.0, -1.0, Some(b));
        assert_eq!(marker, EffectiveBeta::InfiniteTemperature(Sign::Negative));
        assert_eq!(marker.to_cell(), "-inf");
        assert_eq!(EffectiveBeta::from_state(0.0, 1.0, None).to_cell(), "+inf");
        assert_eq!(EffectiveBeta::from_state(1.0, 2.0, None).to_cell(), "+sat");
        assert_eq!(EffectiveBeta::from_state(0.3, 0.0, None).temperature(), 0.0);
    }

    #[test]
    fn flip_step_records_negated_field() {
        let mut sys = SpinSystem::with_spins(vec![1, 1, 1, 1, -1], 0.0, 1.0, 1.0, 5).unwrap();
        let trace = population_inversion_run(&mut sys, 0, 3).unwrap();
        let s0 = trace.steps[0];
        assert_eq!(s0.field_h, -1.0);
        assert!((s0.magnetization - 0.6).abs() < 1e-15);
        assert_eq!(s0.beta_eff, EffectiveBeta::Finite(0.6f64.atanh() / -1.0));
    }

    #[test]
    fn flip_time_must_precede_end() {
        let mut sys = SpinSystem::new(4, 0.0, 1.0, 1.0, 5).unwrap();
        assert!(population_inversion_run(&mut sys, 10, 10).is_err());
    }

    #[test]
    fn marker_exactly_at_zero_magnetization() {
        let mut sys = SpinSystem::new(20, 0.0, 1.0, 1.0, 8).unwrap();
        sys.metropolis_sweep(50).unwrap();
        let trace = population_inversion_run(&mut sys, 1000, 5000).unwrap();
        assert!(trace.steps.iter().any(|s| s.beta_eff.is_infinite_temperature()));
        for s in &trace.steps {
            assert_eq!(s.beta_eff.is_infinite_temperature(), s.magnetization == 0.0 && s.field_h != 0.0);
        }
    }

    #[test]
    fn halving_field_halves_temperature() {
        let trace = magnetocaloric_run(1.0, 2.0, 2).unwrap();
        let t0 = trace.steps[0].beta_eff.temperature();
        let t1 = trace.steps[1].beta_eff.temperature();
        assert!((t1 / t0 - 0.5).abs() < 1e-15);
        assert_eq!(trace.steps[2].beta_eff.temperature(), 0.0);
        assert!(trace.steps.iter().all(|s| s.magnetization == trace.steps[0].magnetization));
    }

    #[test]
    fn magnetocaloric_errors() {
        assert!(matches!(magnetocaloric_run(1e-10, 1e-320, 4), Err(Error::DegenerateState(_))));
        assert!(matches!(magnetocaloric_run(1.0, 40.0, 4), Err(Error::DegenerateState(_))));
        assert!(magnetocaloric_run(-1.0, 1.0, 4).is_err());
        assert!(magnetocaloric_run(1.0, 1.0, 0).is_err());
    }

    #[test]
    fn csv_uses_markers() {
        let trace = magnetocaloric_run(1.0, 1.0, 1).unwrap();
        let csv = trace.to_csv();
        assert!(csv.starts_with("step,magnetization,field_h,beta_eff\n"));
        assert!(csv.trim_end().ends_with("+sat"));
    }
}
