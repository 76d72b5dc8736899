//! Batch parameter sweeps over the optomechanical pipeline.

pub mod config;
pub mod emit;
pub mod run;

pub use config::{ConfigError, SweepConfig};
pub use emit::{emit, Format};
pub use run::{run_sweep, Reason, SweepRecord};

/// Environment variable overriding the default worker count.
pub const THREADS_ENV: &str = "OPTOMECH_THREADS";
