use super::SpinSystem;
use crate::error::{Error, Result};
use crate::stats::iid_estimate;
use crate::table::{float17, CsvTable};

/// Which branch of the field cycle is run first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RampOrder {
    /// `+h_max → -h_max → +h_max`
    #[default]
    DownFirst,
    /// `-h_max → +h_max → -h_max`
    UpFirst,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchPoint {
    pub field_h: f64,
    pub magnetization: f64,
    pub std_err: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HysteresisLoop {
    /// Field decreasing from `+h_max` to `-h_max`.
    pub branch_down: Vec<BranchPoint>,
    /// Field increasing from `-h_max` to `+h_max`.
    pub branch_up: Vec<BranchPoint>,
    /// `-∮ m dh` along the cycle, i.e. `∫ (m_down - m_up) dh`. Positive when
    /// the magnetization lags the field.
    pub loop_area: f64,
    pub area_std_err: f64,
}

impl HysteresisLoop {
    pub fn to_csv(&self) -> String {
        let mut t = CsvTable::new(&["branch", "field_h", "magnetization", "std_err"]);
        for (name, branch) in [("down", &self.branch_down), ("up", &self.branch_up)] {
            for p in branch {
                t.row([name.to_owned(), float17(p.field_h), float17(p.magnetization), float17(p.std_err)]);
            }
        }
        t.finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HysteresisConfig {
    pub h_max: f64,
    pub n_field_steps: usize,
    pub sweeps_per_step: usize,
    pub order: RampOrder,
}

/// Trapezoid weights `w_k` with `∫ m dh ≈ Σ w_k m_k` along a branch.
fn trapezoid_weights(branch: &[BranchPoint]) -> Vec<f64> {
    let mut w = vec![0.0; branch.len()];
    for k in 0..branch.len().saturating_sub(1) {
        let dh = branch[k + 1].field_h - branch[k].field_h;
        w[k] += 0.5 * dh;
        w[k + 1] += 0.5 * dh;
    }
    w
}

fn run_branch(system: &mut SpinSystem, fields: &[f64], sweeps_per_step: usize) -> Result<Vec<BranchPoint>> {
    // the first fifth of each step is relaxation and is not recorded
    let discard = sweeps_per_step / 5;
    let mut out = Vec::with_capacity(fields.len());
    for &h in fields {
        system.set_field(h)?;
        system.metropolis_sweep(discard)?;
        let samples = system.sample_magnetization(sweeps_per_step - discard)?;
        let est = iid_estimate(&samples);
        out.push(BranchPoint {
            field_h: h,
            magnetization: est.mean,
            std_err: if est.std_err.is_finite() { est.std_err } else { 0.0 },
        });
    }
    Ok(out)
}

/// Ramps the field through a full cycle and records the mean magnetization
/// at each of `n_field_steps` evenly spaced fields per branch.
pub fn hysteresis_loop(system: &mut SpinSystem, config: &HysteresisConfig) -> Result<HysteresisLoop> {
    let HysteresisConfig {
        h_max,
        n_field_steps,
        sweeps_per_step,
        order,
    } = *config;
    if !(h_max.is_finite() && h_max >= 0.0) {
        return Err(Error::invalid("h_max", format!("must be finite and non-negative, got {h_max}")));
    }
    if n_field_steps < 2 {
        return Err(Error::invalid("n_field_steps", "at least 2 field steps are needed"));
    }
    if sweeps_per_step == 0 {
        return Err(Error::invalid("sweeps_per_step", "must be positive"));
    }
    let last = (n_field_steps - 1) as f64;
    let down: Vec<f64> = (0..n_field_steps)
        .map(|k| h_max - 2.0 * h_max * k as f64 / last)
        .collect();
    let up: Vec<f64> = down.iter().rev().copied().collect();

    let (branch_down, branch_up) = match order {
        RampOrder::DownFirst => {
            let d = run_branch(system, &down, sweeps_per_step)?;
            let u = run_branch(system, &up, sweeps_per_step)?;
            (d, u)
        }
        RampOrder::UpFirst => {
            let u = run_branch(system, &up, sweeps_per_step)?;
            let d = run_branch(system, &down, sweeps_per_step)?;
            (d, u)
        }
    };

    let mut area = 0.0;
    let mut var = 0.0;
    for branch in [&branch_down, &branch_up] {
        for (w, p) in trapezoid_weights(branch).into_iter().zip(branch.iter()) {
            area -= w * p.magnetization;
            var += w * w * p.std_err * p.std_err;
        }
    }
    Ok(HysteresisLoop {
        branch_down,
        branch_up,
        loop_area: area,
        area_std_err: var.sqrt(),
    })
}
