use std::f64::consts::PI;

use crate::config::{build_filter, ExperimentConfig};
use crate::error::Result;
use crate::metrics::{phase_error, relative_error};
use crate::persistence::Table;
use crate::signalgen::{snr_db, synth, Drift, SignalSpec, Tone};
use crate::streamer::{run_stream, EstimateTrace, StreamConfig, TracePoint};

use super::LOW_BAND;

/// Largest errors over a span of the trace.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SpanErrors {
    /// Relative.
    pub amplitude: f64,
    /// Radians.
    pub phase: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CombinedRow {
    pub n: usize,
    pub filter_order: usize,
    /// Windows past warm-up where estimation failed.
    pub failed: usize,
    /// Windows whose input, including the filter support, ends before the
    /// drift onset.
    pub before: SpanErrors,
    /// Windows whose input straddles the onset.
    pub transient: SpanErrors,
    /// Windows whose input starts after the onset; the drift is still
    /// present but its switch-on edge has left the filter.
    pub after: SpanErrors,
    /// Same signal without the drift, every valid window.
    pub baseline: SpanErrors,
    pub trace: EstimateTrace,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CombinedResult {
    pub thd: f64,
    pub snr_db: f64,
    pub rows: Vec<CombinedRow>,
}

impl CombinedResult {
    pub fn row(&self, n: usize) -> Option<&CombinedRow> {
        self.rows.iter().find(|r| r.n == n)
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new([
            "n",
            "filter_order",
            "failed_windows",
            "thd",
            "snr_db",
            "err_amplitude_before",
            "err_phase_before",
            "err_amplitude_transient",
            "err_phase_transient",
            "err_amplitude_after",
            "err_phase_after",
            "err_amplitude_no_drift",
            "err_phase_no_drift",
        ]);
        for r in &self.rows {
            t.push(vec![
                r.n.into(),
                r.filter_order.into(),
                r.failed.into(),
                self.thd.into(),
                self.snr_db.into(),
                r.before.amplitude.into(),
                r.before.phase.into(),
                r.transient.amplitude.into(),
                r.transient.phase.into(),
                r.after.amplitude.into(),
                r.after.phase.into(),
                r.baseline.amplitude.into(),
                r.baseline.phase.into(),
            ]);
        }
        t
    }
}

fn span_errors<'a>(
    trace: impl Iterator<Item = &'a TracePoint>,
    fundamental: &Tone,
) -> SpanErrors {
    let mut out = SpanErrors::default();
    for p in trace {
        let Some(e) = p.estimate else { continue };
        let truth = fundamental.phase + 2.0 * PI * fundamental.frequency * p.t_start;
        out.amplitude = out.amplitude.max(relative_error(e.amplitude, fundamental.amplitude));
        out.phase = out.phase.max(phase_error(e.phase, truth));
        out.points += 1;
    }
    out
}

/// Streams the distorted, noisy, drifting signal through the prefilter and
/// the full estimator. Estimated phases are compared with the fundamental's
/// true phase at each window's first sample.
pub fn run_combined(cfg: &ExperimentConfig, seed: u64) -> Result<CombinedResult> {
    let cc = &cfg.combined;
    let a1 = cc.amplitude;
    let mut tones = vec![Tone::new(a1, cc.f1, cc.phase_deg.to_radians())];
    tones.extend(
        cc.harmonics
            .iter()
            .map(|&(h, r, p)| Tone::new(r * a1, h as f64 * cc.f1, p.to_radians())),
    );
    let spec = SignalSpec {
        tones,
        fs: cc.fs,
        noise_sigma: cc.noise_sigma,
        drift: Some(Drift { amplitude: cc.drift * a1, tau: cc.tau, onset: 0.0 }),
        quantizer: None,
        seed,
    };
    spec.validate()?;
    let fundamental = spec.tones[0];
    let filter = build_filter(cc.filter, cfg.prefilter.path.as_deref(), cc.fs)?;
    let taps = filter.as_ref().map_or(1, |f| f.taps.len());
    let mut rows = Vec::new();
    for &n in &cc.n {
        let lead = taps + n + (0.05 * cc.fs) as usize;
        let total = lead + (cc.duration * cc.fs).round() as usize;
        let t0 = -(lead as f64) / cc.fs;
        let mut stream = StreamConfig::new(n, cc.fs, cfg.window.order)
            .with_stride(cc.stride)
            .with_max_cir(LOW_BAND);
        if let Some(f) = &filter {
            stream = stream.with_filter(f.clone());
        }
        let trace = run_stream(&stream, &synth(&spec, total, t0)?, t0)?;
        let clean = SignalSpec { drift: None, ..spec.clone() };
        let reference = run_stream(&stream, &synth(&clean, total, t0)?, t0)?;
        let failed = trace.points.iter().filter(|p| !p.warmup && p.estimate.is_none()).count();
        let reach = filter.as_ref().map_or(0, |f| f.order() / 2) as f64 / cc.fs;
        let span = |p: &&TracePoint| (p.t_start - reach, p.t + reach);
        rows.push(CombinedRow {
            n,
            filter_order: filter.as_ref().map_or(0, |f| f.order()),
            failed,
            before: span_errors(trace.valid().filter(|p| span(p).1 < 0.0), &fundamental),
            transient: span_errors(
                trace.valid().filter(|p| span(p).0 < 0.0 && span(p).1 >= 0.0),
                &fundamental,
            ),
            after: span_errors(trace.valid().filter(|p| span(p).0 >= 0.0), &fundamental),
            baseline: span_errors(reference.valid(), &fundamental),
            trace,
        });
    }
    Ok(CombinedResult { thd: spec.thd(), snr_db: snr_db(&spec), rows })
}
