//! Sliding-window estimation loop: a ring buffer of the latest `N` samples,
//! an optional streaming prefilter, and a full estimate every `stride`
//! incoming samples.

use std::collections::VecDeque;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::estimator::{wrap_phase, Estimate, Estimator, EstimatorConfig};
use crate::par;
use crate::persistence::{Field, Table};
use crate::prefilter::{FirFilter, StreamingFir};

/// Snapshots estimated together when running a whole stream.
const BATCH: usize = 256;

#[derive(Debug, Clone)]
pub struct StreamConfig {
    pub len: usize,
    pub fs: f64,
    pub stride: usize,
    pub order: usize,
    pub filter: Option<FirFilter>,
    /// Upper bound on the cycles per window, forwarded to the estimator.
    pub max_cir: f64,
}

impl StreamConfig {
    pub fn new(len: usize, fs: f64, order: usize) -> Self {
        Self { len, fs, stride: 4, order, filter: None, max_cir: f64::INFINITY }
    }

    pub fn with_filter(mut self, filter: FirFilter) -> Self {
        self.filter = Some(filter);
        self
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.stride = stride;
        self
    }

    pub fn with_max_cir(mut self, max_cir: f64) -> Self {
        self.max_cir = max_cir;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.stride == 0 {
            return Err(Error::Config("update stride must be at least 1".into()));
        }
        if !self.len.is_power_of_two() {
            return Err(Error::Config(format!("window length {} is not a power of two", self.len)));
        }
        if let Some(f) = &self.filter {
            if f.fs != self.fs {
                return Err(Error::Config(format!(
                    "filter designed for {} Hz, stream runs at {} Hz",
                    f.fs, self.fs
                )));
            }
        }
        Ok(())
    }

    pub fn estimator(&self) -> EstimatorConfig {
        EstimatorConfig::new(self.order, self.len, self.fs).with_max_cir(self.max_cir)
    }

    /// Filter delay plus window length, in seconds.
    pub fn latency(&self) -> f64 {
        let delay = self.filter.as_ref().map_or(0.0, FirFilter::group_delay);
        (delay + self.len as f64) / self.fs
    }
}

/// Fixed-capacity buffer keeping the most recent samples.
#[derive(Debug, Clone)]
pub struct RingBuffer {
    data: VecDeque<f64>,
    capacity: usize,
}

impl RingBuffer {
    pub fn new(capacity: usize) -> Self {
        Self { data: VecDeque::with_capacity(capacity), capacity }
    }

    pub fn push(&mut self, x: f64) {
        if self.data.len() == self.capacity {
            self.data.pop_front();
        }
        self.data.push_back(x);
    }

    pub fn is_full(&self) -> bool {
        self.data.len() == self.capacity
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Oldest to newest.
    pub fn snapshot(&self) -> Vec<f64> {
        self.data.iter().copied().collect()
    }
}

/// One update of the loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    /// Time of the newest sample in the window, corrected for the filter delay.
    pub t: f64,
    /// Time of the oldest sample in the window, same correction.
    pub t_start: f64,
    pub estimate: Option<Estimate>,
    /// Phase of the fundamental referred to `t = 0`.
    pub phase_t0: f64,
    /// Window not yet full, or the filter still holds start-up samples.
    pub warmup: bool,
}

impl TracePoint {
    pub fn is_valid(&self) -> bool {
        self.estimate.is_some() && !self.warmup
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EstimateTrace {
    pub points: Vec<TracePoint>,
}

impl EstimateTrace {
    pub fn valid(&self) -> impl Iterator<Item = &TracePoint> {
        self.points.iter().filter(|p| p.is_valid())
    }

    /// Columns `t, f1, A1, phi1, valid`.
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(["t", "f1", "A1", "phi1", "valid"]);
        for p in &self.points {
            let (f, a) = p.estimate.map_or((f64::NAN, f64::NAN), |e| (e.frequency, e.amplitude));
            t.push(vec![p.t.into(), f.into(), a.into(), p.phase_t0.into(), Field::from(p.is_valid())]);
        }
        t
    }
}

/// A window handed from the loop to the estimator.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    /// Time of the oldest sample in the window.
    pub t_start: f64,
    pub window: Vec<f64>,
    pub warmup: bool,
}

/// The stateful part of the loop: filter state, ring buffer and clock.
#[derive(Debug, Clone)]
pub struct Streamer {
    cfg: StreamConfig,
    fir: Option<StreamingFir>,
    ring: RingBuffer,
    t0: f64,
    seen: usize,
    settle_after: usize,
}

impl Streamer {
    /// `t0` is the time of the first sample that will be pushed.
    pub fn new(cfg: StreamConfig, t0: f64) -> Result<Self> {
        cfg.validate()?;
        let fir = cfg.filter.as_ref().map(StreamingFir::new);
        let taps = cfg.filter.as_ref().map_or(1, |f| f.taps.len());
        Ok(Self {
            ring: RingBuffer::new(cfg.len),
            settle_after: taps - 1 + cfg.len,
            cfg,
            fir,
            t0,
            seen: 0,
        })
    }

    pub fn config(&self) -> &StreamConfig {
        &self.cfg
    }

    fn delay(&self) -> f64 {
        self.fir.as_ref().map_or(0, StreamingFir::delay) as f64
    }

    /// Feeds one sample; every `stride` samples returns the current window.
    pub fn push(&mut self, x: f64) -> Option<Snapshot> {
        let y = match self.fir.as_mut() {
            Some(f) => f.push(x),
            None => x,
        };
        self.ring.push(y);
        self.seen += 1;
        if !self.seen.is_multiple_of(self.cfg.stride) {
            return None;
        }
        let newest = self.seen - 1;
        let t = self.t0 + (newest as f64 - self.delay()) / self.cfg.fs;
        let t_start = t - (self.cfg.len as f64 - 1.0) / self.cfg.fs;
        Some(Snapshot {
            t,
            t_start,
            window: self.ring.snapshot(),
            warmup: !self.ring.is_full() || self.seen < self.settle_after,
        })
    }
}

/// Runs the estimator on a snapshot. Short windows and estimation failures
/// give a point without an estimate.
pub fn evaluate(estimator: &Estimator, snap: &Snapshot) -> TracePoint {
    let estimate = if snap.window.len() == estimator.config().len {
        estimator.estimate(&snap.window).ok()
    } else {
        None
    };
    let phase_t0 = estimate.map_or(f64::NAN, |e| {
        wrap_phase(e.phase - 2.0 * PI * e.frequency * snap.t_start)
    });
    TracePoint { t: snap.t, t_start: snap.t_start, estimate, phase_t0, warmup: snap.warmup }
}

/// Streams `x`, whose first sample is at time `t0`, through the loop.
pub fn run_stream(cfg: &StreamConfig, x: &[f64], t0: f64) -> Result<EstimateTrace> {
    let estimator = Estimator::new(cfg.estimator())?;
    let mut streamer = Streamer::new(cfg.clone(), t0)?;
    if x.len() < cfg.len {
        return Err(Error::InsufficientData { len: x.len(), taps: cfg.len });
    }
    let mut points = Vec::with_capacity(x.len() / cfg.stride + 1);
    let mut pending = Vec::with_capacity(BATCH);
    for &v in x {
        if let Some(s) = streamer.push(v) {
            pending.push(s);
            if pending.len() == BATCH {
                points.extend(par::map(&pending, |s| evaluate(&estimator, s)));
                pending.clear();
            }
        }
    }
    points.extend(par::map(&pending, |s| evaluate(&estimator, s)));
    Ok(EstimateTrace { points })
}

/// Time after `t = 0` from which every later valid value stays within `tol`
/// of `target`; `0` when no point after the step is out of tolerance, `None`
/// when the trace ends out of tolerance.
pub fn settle_time(points: &[(f64, f64)], target: f64, tol: f64) -> Option<f64> {
    let after: Vec<&(f64, f64)> = points.iter().filter(|p| p.0 >= 0.0).collect();
    match after.iter().rposition(|p| !((p.1 - target).abs() <= tol)) {
        None => Some(0.0),
        Some(i) => after.get(i + 1).map(|p| p.0),
    }
}

/// Same as [`settle_time`] with the distance measured as a wrapped angle.
pub fn settle_time_phase(points: &[(f64, f64)], target: f64, tol: f64) -> Option<f64> {
    let wrapped: Vec<(f64, f64)> = points
        .iter()
        .map(|&(t, p)| (t, target + wrap_phase(p - target)))
        .collect();
    settle_time(&wrapped, target, tol)
}
