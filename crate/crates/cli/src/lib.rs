//! Data ingestion, synthetic data, plotting and the end-to-end market
//! pipeline behind the `spinmarket` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod ingest;
pub mod pipeline;
pub mod plot;
pub mod synth;

pub use error::{CliError, Result};
