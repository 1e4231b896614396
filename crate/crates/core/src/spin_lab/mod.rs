//! Monte Carlo and exact enumeration for spin-1/2 rings: paramagnet vs.
//! weak ferromagnet contrasts, hysteresis, population inversion and
//! adiabatic demagnetization.

mod entropy;
mod hysteresis;
mod scenario;
mod system;

pub use entropy::{entropy_curve, paramagnet_entropy, paramagnet_entropy_limit, EntropyCurve, MAX_ENUMERATION_SITES};
pub use hysteresis::{hysteresis_loop, BranchPoint, HysteresisConfig, HysteresisLoop, RampOrder};
pub use scenario::{magnetocaloric_run, population_inversion_run, EffectiveBeta, ScenarioStep, ScenarioTrace, Sign};
pub use system::SpinSystem;
