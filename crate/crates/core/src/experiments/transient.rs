use std::f64::consts::PI;

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::estimator::wrap_phase;
use crate::persistence::Table;
use crate::signalgen::{quantize, step_test, StepKind, Tone};
use crate::streamer::{run_stream, settle_time, settle_time_phase, EstimateTrace, StreamConfig};

use super::LOW_BAND;

/// Step responses of the streaming loop for one record length.
#[derive(Debug, Clone, PartialEq)]
pub struct TransientRow {
    pub n: usize,
    pub cir: f64,
    /// Record duration `N·T` in seconds.
    pub record: f64,
    /// Seconds after the step; `None` if the trace never settles.
    pub amplitude_settle: Option<f64>,
    pub phase_settle: Option<f64>,
    /// Largest phase excursion after the step, relative to the pre-step phase.
    pub phase_peak: f64,
    /// Largest relative amplitude error before the step.
    pub steady_amplitude_error: f64,
    pub amplitude_trace: EstimateTrace,
    pub phase_trace: EstimateTrace,
}

impl TransientRow {
    pub fn amplitude_settle_nt(&self) -> Option<f64> {
        self.amplitude_settle.map(|t| t / self.record)
    }

    pub fn phase_settle_nt(&self) -> Option<f64> {
        self.phase_settle.map(|t| t / self.record)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TransientResult {
    pub rows: Vec<TransientRow>,
}

impl TransientResult {
    pub fn row(&self, n: usize) -> Option<&TransientRow> {
        self.rows.iter().find(|r| r.n == n)
    }

    /// Settle times in units of `N·T`; NaN marks a trace that never settles.
    pub fn table(&self) -> Table {
        let mut t = Table::new([
            "n",
            "cir",
            "amplitude_settle_nt",
            "phase_settle_nt",
            "phase_peak",
            "steady_amplitude_error",
        ]);
        for r in &self.rows {
            t.push(vec![
                r.n.into(),
                r.cir.into(),
                r.amplitude_settle_nt().unwrap_or(f64::NAN).into(),
                r.phase_settle_nt().unwrap_or(f64::NAN).into(),
                r.phase_peak.into(),
                r.steady_amplitude_error.into(),
            ]);
        }
        t
    }
}

/// Runs the 10 % amplitude step and the 90° phase step through the loop with
/// the frequency estimated. Three records of signal precede and follow each
/// step.
pub fn run_transient(cfg: &ExperimentConfig) -> Result<TransientResult> {
    let tc = &cfg.transient;
    let tone = Tone::new(tc.amplitude, tc.f1, tc.phase);
    let mut rows = Vec::new();
    for &n in &tc.n {
        let pre = 3 * n;
        let t0 = -(pre as f64) / tc.fs;
        let stream = StreamConfig::new(n, tc.fs, cfg.window.order)
            .with_stride(tc.stride)
            .with_max_cir(LOW_BAND);
        let trace = |kind| -> Result<EstimateTrace> {
            let mut x = step_test(kind, tone, tc.fs, pre, pre);
            if tc.bits > 0 {
                x = quantize(&x, tc.bits, tc.full_scale)?.samples;
            }
            run_stream(&stream, &x, t0)
        };
        let amp = trace(StepKind::Amplitude)?;
        let ph = trace(StepKind::Phase)?;

        let amp_pts: Vec<(f64, f64)> = amp.valid().map(|p| (p.t, p.estimate.map_or(f64::NAN, |e| e.amplitude))).collect();
        let ph_pts: Vec<(f64, f64)> = ph.valid().map(|p| (p.t, p.phase_t0)).collect();
        let target_a = 1.1 * tc.amplitude;
        let target_p = tc.phase + PI / 2.0;
        let phase_peak = ph_pts
            .iter()
            .filter(|p| p.0 >= 0.0)
            .map(|p| wrap_phase(p.1 - tc.phase))
            .fold(f64::NEG_INFINITY, f64::max);
        let steady_amplitude_error = amp_pts
            .iter()
            .filter(|p| p.0 < 0.0)
            .map(|p| ((p.1 - tc.amplitude) / tc.amplitude).abs())
            .fold(0.0, f64::max);
        rows.push(TransientRow {
            n,
            cir: tc.f1 * n as f64 / tc.fs,
            record: n as f64 / tc.fs,
            amplitude_settle: settle_time(&amp_pts, target_a, tc.amplitude_tol * target_a),
            phase_settle: settle_time_phase(&ph_pts, target_p, tc.phase_tol),
            phase_peak,
            steady_amplitude_error,
            amplitude_trace: amp,
            phase_trace: ph,
        });
    }
    Ok(TransientResult { rows })
}
