//! Experiment harness around `sumstat-privacy`: config files, a synthetic
//! data generator, parallel tradeoff sweeps and table emission.

pub mod app;
pub mod config;
pub mod emit;
pub mod error;
pub mod sweep;
pub mod synth;

pub use error::{CliError, Result};
