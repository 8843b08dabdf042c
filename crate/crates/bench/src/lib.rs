//! Command-line front end and benchmark harness for `proxsup`.

pub mod commands;
pub mod config;
pub mod error;
pub mod experiment;

pub use config::{Method, RunOptions, RunSettings, Threshold};
pub use error::{BenchError, BenchResult};
pub use experiment::{compare, compare_on, run_method, simulate, Comparison, ExperimentSpec, NoiseSpec};
