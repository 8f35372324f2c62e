//! Drivers for the characterisation studies. Each returns a typed result
//! that renders to a CSV [`Table`](crate::persistence::Table).

mod combined;
mod estimate;
mod fig1;
mod fig3;
mod tables;
mod transient;

pub use combined::{run_combined, CombinedResult, CombinedRow};
pub use estimate::{run_estimate, EstimateOutcome};
pub use fig1::{run_fig1, Fig1Point, Fig1Result};
pub use fig3::{run_fig3, Fig3Point, Fig3Result};
pub use tables::{run_tables, TableCell, TablesResult};
pub use transient::{run_transient, TransientResult, TransientRow};

use std::f64::consts::PI;

/// Cycles-in-record bound that pins the estimator to the `k = 1` triplet.
pub(crate) const LOW_BAND: f64 = 1.9;

/// `sin(2πλn/N)` and `cos(2πλn/N)`, so that a tone of phase `φ` is
/// `cos φ · s + sin φ · c`.
pub(crate) fn quadrature(lambda: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    (0..n)
        .map(|i| {
            let arg = 2.0 * PI * lambda * i as f64 / n as f64;
            (arg.sin(), arg.cos())
        })
        .unzip()
}

pub(crate) fn combine(phi: f64, s: &[f64], c: &[f64], extra: Option<&[f64]>) -> Vec<f64> {
    let (cp, sp) = (phi.cos(), phi.sin());
    match extra {
        Some(h) => s.iter().zip(c).zip(h).map(|((a, b), e)| cp * a + sp * b + e).collect(),
        None => s.iter().zip(c).map(|(a, b)| cp * a + sp * b).collect(),
    }
}

pub(crate) fn filter_label(kind: crate::config::FilterKind) -> &'static str {
    use crate::config::FilterKind::*;
    match kind {
        None => "none",
        A => "a",
        B => "b",
        File => "file",
    }
}
