//! Interpolated-DFT estimation of the frequency, amplitude and phase of a
//! dominant sinusoid from short records, with the experiment harness used to
//! characterise it.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod estimator;
pub mod experiments;
pub mod metrics;
pub mod par;
pub mod persistence;
pub mod prefilter;
pub mod signalgen;
pub mod spectrum;
pub mod streamer;
pub mod windows;

#[cfg(test)]
mod proptests;

pub use error::{Error, Result};
pub use estimator::{estimate_all, Estimate, Estimator, EstimatorConfig};
