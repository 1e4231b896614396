//! Statistical-mechanics numerics for reading markets as spin systems.
//!
//! * [`spin_lab`]: Metropolis Monte Carlo and exact enumeration on spin-1/2 rings.
//! * [`yang_lee`]: partition-function zeros and the hierarchical-lattice renormalization map.
//! * [`thermometer`]: signed effective temperature of a price series.
//! * [`renorm`]: volume-weighted block renormalization and temperature stacks.
//! * [`signal`]: coincidence detection across renormalization levels.

pub mod error;
pub mod renorm;
pub mod signal;
pub mod spin_lab;
pub mod stats;
pub mod table;
pub mod thermometer;
pub mod yang_lee;

pub use error::{Error, Result};
