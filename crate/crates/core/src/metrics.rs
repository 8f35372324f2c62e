//! Error statistics and Cramér–Rao bounds for single-tone estimation.
//!
//! The bounds follow Rife and Boorstyn's single-tone results with `σ²` the
//! variance of the additive white noise.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::estimator::wrap_phase;

/// Amplitude variance bound `σ²/N`.
pub fn crb_amplitude(sigma: f64, n: usize) -> f64 {
    sigma * sigma / n as f64
}

/// Amplitude variance bound for a real tone in real noise, `2σ²/N`.
pub fn crb_amplitude_real(sigma: f64, n: usize) -> f64 {
    2.0 * sigma * sigma / n as f64
}

/// Phase variance bound with unknown frequency, `2σ²(2N−1) / (A²N(N+1))`.
pub fn crb_phase(sigma: f64, amplitude: f64, n: usize) -> f64 {
    let n = n as f64;
    2.0 * sigma * sigma * (2.0 * n - 1.0) / (amplitude * amplitude * n * (n + 1.0))
}

/// Phase variance bound with known frequency, `σ²/(A²N)`.
pub fn crb_phase_known_frequency(sigma: f64, amplitude: f64, n: usize) -> f64 {
    sigma * sigma / (amplitude * amplitude * n as f64)
}

/// Mean squared deviation from the true value.
pub fn empirical_mse(estimates: &[f64], truth: f64) -> Result<f64> {
    if estimates.is_empty() {
        return Err(Error::Empty("estimates"));
    }
    let sum: f64 = estimates.iter().map(|e| (e - truth).powi(2)).sum();
    Ok(sum / estimates.len() as f64)
}

/// Like [`empirical_mse`] but measures each deviation as a wrapped angle.
pub fn empirical_mse_phase(estimates: &[f64], truth: &[f64]) -> Result<f64> {
    if estimates.is_empty() {
        return Err(Error::Empty("estimates"));
    }
    if estimates.len() != truth.len() {
        return Err(Error::Shape { signal: estimates.len(), window: truth.len() });
    }
    let sum: f64 = estimates
        .iter()
        .zip(truth)
        .map(|(e, t)| phase_error(*e, *t).powi(2))
        .sum();
    Ok(sum / estimates.len() as f64)
}

/// `|wrap(estimate − truth)|`, never more than π.
pub fn phase_error(estimate: f64, truth: f64) -> f64 {
    wrap_phase(estimate - truth).abs()
}

/// `|estimate − truth| / truth`.
pub fn relative_error(estimate: f64, truth: f64) -> f64 {
    ((estimate - truth) / truth).abs()
}

/// `n` phases `0, step, 2·step, …` covering `[0, 2π)`.
pub fn phase_grid(step: f64) -> Vec<f64> {
    let n = (2.0 * PI / step).ceil() as usize;
    (0..n).map(|i| i as f64 * step).filter(|p| *p < 2.0 * PI).collect()
}

/// Worst errors over a phase sweep.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WorstCase {
    /// Relative amplitude error.
    pub amplitude: f64,
    /// Absolute wrapped phase error, radians.
    pub phase: f64,
    /// Absolute frequency error in bins.
    pub lambda: f64,
}

impl WorstCase {
    pub fn absorb(&mut self, other: WorstCase) {
        self.amplitude = self.amplitude.max(other.amplitude);
        self.phase = self.phase.max(other.phase);
        self.lambda = self.lambda.max(other.lambda);
    }
}

/// Runs `estimate(φ)` on every phase of the grid and keeps the largest
/// errors. `estimate` returns `(amplitude, phase, λ)` for a tone of true
/// amplitude `amplitude`, phase `φ` and frequency `lambda`.
pub fn worst_phase_sweep<F>(grid: &[f64], amplitude: f64, lambda: f64, estimate: F) -> Result<WorstCase>
where
    F: Fn(f64) -> Result<(f64, f64, f64)> + Sync + Send,
{
    let per_phase = crate::par::map(grid, |&phi| {
        estimate(phi).map(|(a, p, l)| WorstCase {
            amplitude: relative_error(a, amplitude),
            phase: phase_error(p, phi),
            lambda: (l - lambda).abs(),
        })
    });
    let mut worst = WorstCase::default();
    for w in per_phase {
        worst.absorb(w?);
    }
    Ok(worst)
}

/// One row per grid point of a sweep.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepResult {
    pub axis_name: String,
    pub axis: Vec<f64>,
    pub worst: Vec<WorstCase>,
    pub emse: Vec<f64>,
    pub crb: Vec<f64>,
}

impl SweepResult {
    pub fn new(axis_name: impl Into<String>) -> Self {
        Self { axis_name: axis_name.into(), ..Self::default() }
    }

    pub fn push(&mut self, x: f64, worst: WorstCase, emse: f64, crb: f64) {
        self.axis.push(x);
        self.worst.push(worst);
        self.emse.push(emse);
        self.crb.push(crb);
    }

    pub fn len(&self) -> usize {
        self.axis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axis.is_empty()
    }

    pub fn header(&self) -> Vec<String> {
        [self.axis_name.as_str(), "err_amplitude", "err_phase", "emse", "crb"]
            .iter()
            .map(|s| s.to_string())
            .collect()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.len())
            .map(|i| {
                vec![
                    self.axis[i],
                    self.worst[i].amplitude,
                    self.worst[i].phase,
                    self.emse[i],
                    self.crb[i],
                ]
            })
            .collect()
    }
}

/// Least-squares slope of `log10 y` against `log10 x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.log10(), b.log10()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}
