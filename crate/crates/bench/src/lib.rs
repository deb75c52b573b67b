//! Verification, benchmarking and model prediction for the `splitfft` engines.

pub mod bench;
pub mod cli;
pub mod config;
pub mod engines;
pub mod error;
pub mod instance;
pub mod predict;
pub mod verify;

pub use config::BenchConfig;
pub use error::{BenchError, Result};
