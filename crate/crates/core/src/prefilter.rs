//! Linear-phase FIR bandpass prefilters: design against a template, check the
//! realized response, and apply in batch or streaming form.
//!
//! Design starts from Herrmann's length estimate for the template ripples and
//! runs a Parks-McClellan exchange; the order grows until the measured
//! response meets the template. A Kaiser-windowed design stands in whenever
//! the exchange does not converge.

use std::collections::VecDeque;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;

/// Upper limit on the filter order tried by [`design_bandpass`].
pub const MAX_ORDER: usize = 8192;

const GRID_DENSITY: usize = 16;
const CHECK_POINTS: usize = 4096;

/// Band edges in Hz and attenuation limits in dB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterTemplate {
    pub f_stop1: f64,
    pub f_pass1: f64,
    pub f_pass2: f64,
    pub f_stop2: f64,
    /// Minimum stopband attenuation.
    pub a_stop: f64,
    /// Maximum peak-to-peak passband ripple.
    pub a_pass: f64,
    pub fs: f64,
}

impl FilterTemplate {
    /// 10/40/60/90 Hz edges, 40 dB stopband, 0.1 dB ripple.
    pub fn filter_a(fs: f64) -> Self {
        Self {
            f_stop1: 10.0,
            f_pass1: 40.0,
            f_pass2: 60.0,
            f_stop2: 90.0,
            a_stop: 40.0,
            a_pass: 0.1,
            fs,
        }
    }

    /// 10/40/60/90 Hz edges, 60 dB stopband, 0.01 dB ripple.
    pub fn filter_b(fs: f64) -> Self {
        Self {
            a_stop: 60.0,
            a_pass: 0.01,
            ..Self::filter_a(fs)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ordered = 0.0 < self.f_stop1
            && self.f_stop1 < self.f_pass1
            && self.f_pass1 < self.f_pass2
            && self.f_pass2 < self.f_stop2
            && self.f_stop2 < self.fs / 2.0;
        if !ordered {
            return Err(Error::InvalidTemplate(format!(
                "edges must satisfy 0 < {} < {} < {} < {} < fs/2 = {}",
                self.f_stop1,
                self.f_pass1,
                self.f_pass2,
                self.f_stop2,
                self.fs / 2.0
            )));
        }
        if !(self.a_stop > 0.0 && self.a_pass > 0.0) {
            return Err(Error::InvalidTemplate("attenuation limits must be positive".into()));
        }
        Ok(())
    }

    /// Linear passband deviation for a peak-to-peak ripple of `a_pass` dB.
    pub fn passband_deviation(&self) -> f64 {
        let g = 10f64.powf(self.a_pass / 20.0);
        (g - 1.0) / (g + 1.0)
    }

    pub fn stopband_deviation(&self) -> f64 {
        10f64.powf(-self.a_stop / 20.0)
    }

    fn narrowest_transition(&self) -> f64 {
        (self.f_pass1 - self.f_stop1).min(self.f_stop2 - self.f_pass2) / self.fs
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DesignMethod {
    Equiripple,
    Kaiser,
    /// Taps supplied from outside (for example a coefficient file).
    External,
}

/// Symmetric FIR filter.
#[derive(Debug, Clone, PartialEq)]
pub struct FirFilter {
    pub taps: Vec<f64>,
    pub fs: f64,
    pub method: DesignMethod,
}

impl FirFilter {
    pub fn new(taps: Vec<f64>, fs: f64) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::Empty("filter taps"));
        }
        Ok(Self {
            taps,
            fs,
            method: DesignMethod::External,
        })
    }

    pub fn order(&self) -> usize {
        self.taps.len() - 1
    }

    /// Group delay in samples, `order / 2`.
    pub fn group_delay(&self) -> f64 {
        self.order() as f64 / 2.0
    }

    /// Largest deviation from even symmetry.
    pub fn asymmetry(&self) -> f64 {
        let n = self.taps.len();
        (0..n / 2)
            .map(|i| (self.taps[i] - self.taps[n - 1 - i]).abs())
            .fold(0.0, f64::max)
    }

    pub fn response(&self, freq: f64) -> Complex64 {
        let w = -2.0 * PI * freq / self.fs;
        self.taps
            .iter()
            .enumerate()
            .map(|(n, &h)| Complex64::from_polar(h, w * n as f64))
            .sum()
    }

    /// Zero-phase (signed) amplitude response: `H(f) e^{jπ f order / fs}`.
    pub fn amplitude(&self, freq: f64) -> f64 {
        let mid = self.group_delay();
        let w = 2.0 * PI * freq / self.fs;
        self.taps
            .iter()
            .enumerate()
            .map(|(n, &h)| h * (w * (n as f64 - mid)).cos())
            .sum()
    }
}

/// Magnitude response in dB at each frequency.
pub fn freq_response(filter: &FirFilter, freqs: &[f64]) -> Vec<f64> {
    freqs
        .iter()
        .map(|&f| 20.0 * filter.response(f).norm().log10())
        .collect()
}

/// Herrmann's estimate of the filter order for given ripples and transition
/// width (normalized to the sampling rate).
pub fn estimate_order(dev_pass: f64, dev_stop: f64, transition: f64) -> usize {
    let (a1, a2, a3, a4, a5, a6) = (5.309e-3, 7.114e-2, -4.761e-1, -2.66e-3, -5.941e-1, -4.278e-1);
    let (b1, b2) = (11.01217, 0.51244);
    let lp = dev_pass.log10();
    let ls = dev_stop.log10();
    let d_inf = (a1 * lp * lp + a2 * lp + a3) * ls + (a4 * lp * lp + a5 * lp + a6);
    let f = b1 + b2 * (lp - ls);
    let len = (d_inf / transition - f * transition + 1.0).ceil();
    (len as usize).saturating_sub(1)
}

/// How a response measured against a template falls short.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Compliance {
    /// Worst stopband gain in dB (must not exceed `-a_stop`).
    pub stop_db: f64,
    /// Passband gain extremes in dB.
    pub pass_min_db: f64,
    pub pass_max_db: f64,
}

impl Compliance {
    pub fn meets(&self, t: &FilterTemplate) -> bool {
        self.stop_db <= -t.a_stop
            && self.pass_max_db - self.pass_min_db <= t.a_pass
            && self.pass_max_db <= t.a_pass
            && self.pass_min_db >= -t.a_pass
    }
}

/// Measures the response on a uniform grid of 4096 points over `[0, fs/2]`
/// plus the four band edges.
pub fn check_template(filter: &FirFilter, t: &FilterTemplate) -> Compliance {
    let mut freqs: Vec<f64> = (0..=CHECK_POINTS)
        .map(|i| t.fs / 2.0 * i as f64 / CHECK_POINTS as f64)
        .collect();
    freqs.extend([t.f_stop1, t.f_pass1, t.f_pass2, t.f_stop2]);
    let mut c = Compliance {
        stop_db: f64::NEG_INFINITY,
        pass_min_db: f64::INFINITY,
        pass_max_db: f64::NEG_INFINITY,
    };
    let gains = par::map(&freqs, |&f| 20.0 * filter.response(f).norm().log10());
    for (f, db) in freqs.into_iter().zip(gains) {
        if f <= t.f_stop1 || f >= t.f_stop2 {
            c.stop_db = c.stop_db.max(db);
        } else if f >= t.f_pass1 && f <= t.f_pass2 {
            c.pass_min_db = c.pass_min_db.min(db);
            c.pass_max_db = c.pass_max_db.max(db);
        }
    }
    c
}

/// Designs a linear-phase bandpass meeting the template.
pub fn design_bandpass(t: &FilterTemplate) -> Result<FirFilter> {
    t.validate()?;
    let dp = t.passband_deviation();
    let ds = t.stopband_deviation();
    let mut order = estimate_order(dp, ds, t.narrowest_transition()).max(4);
    order += order % 2;
    let mut last = None;
    while order <= MAX_ORDER {
        let candidates = [
            equiripple_bandpass(t, order).ok().map(|taps| (taps, DesignMethod::Equiripple)),
            Some((kaiser_bandpass(t, order), DesignMethod::Kaiser)),
        ];
        for (taps, method) in candidates.into_iter().flatten() {
            let filter = FirFilter { taps, fs: t.fs, method };
            let c = check_template(&filter, t);
            if c.meets(t) {
                return Ok(filter);
            }
            last = Some(c);
        }
        order += 2 * (order / 100).max(1);
    }
    Err(Error::DesignFailure(format!(
        "no design up to order {MAX_ORDER} meets the template (last attempt: {last:?})"
    )))
}

/// Parks-McClellan bandpass of the given even order, weighted so that each
/// band's error is proportional to its allowed deviation.
pub fn equiripple_bandpass(t: &FilterTemplate, order: usize) -> Result<Vec<f64>> {
    t.validate()?;
    let dp = t.passband_deviation();
    let ds = t.stopband_deviation();
    let wmax = dp.max(ds);
    let bands = [
        Band { lo: 0.0, hi: t.f_stop1 / t.fs, desired: 0.0, weight: wmax / ds },
        Band { lo: t.f_pass1 / t.fs, hi: t.f_pass2 / t.fs, desired: 1.0, weight: wmax / dp },
        Band { lo: t.f_stop2 / t.fs, hi: 0.5, desired: 0.0, weight: wmax / ds },
    ];
    let seed = kaiser_bandpass(t, order);
    remez_seeded(order, &bands, Some(&seed))
}

/// One band of a Parks-McClellan specification, frequencies in cycles/sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
    pub desired: f64,
    pub weight: f64,
}

struct Grid {
    band: Vec<usize>,
    freq: Vec<f64>,
    desired: Vec<f64>,
    weight: Vec<f64>,
}

fn dense_grid(bands: &[Band], r: usize) -> Grid {
    let step = 0.5 / (GRID_DENSITY * r) as f64;
    let mut g = Grid { band: Vec::new(), freq: Vec::new(), desired: Vec::new(), weight: Vec::new() };
    for (id, b) in bands.iter().enumerate() {
        let count = ((b.hi - b.lo) / step).ceil().max(1.0) as usize;
        for i in 0..=count {
            g.band.push(id);
            g.freq.push(b.lo + (b.hi - b.lo) * i as f64 / count as f64);
            g.desired.push(b.desired);
            g.weight.push(b.weight);
        }
    }
    g
}

/// `cos(2πa) - cos(2πb)` without cancellation for nearby arguments.
fn cos_diff(a: f64, b: f64) -> f64 {
    -2.0 * (PI * (a + b)).sin() * (PI * (a - b)).sin()
}

/// Barycentric weights `1 / Π_{i≠j} (x_j - x_i)` for nodes `x = cos(2πf)`,
/// returned as `(w, s)` with the true weights equal to `w e^{-s}`.
fn barycentric(f: &[f64]) -> (Vec<f64>, f64) {
    let logs: Vec<(f64, f64)> = f
        .iter()
        .enumerate()
        .map(|(j, &fj)| {
            let mut log = 0.0;
            let mut sign = 1.0;
            for (i, &fi) in f.iter().enumerate() {
                if i != j {
                    let d = cos_diff(fj, fi);
                    log += d.abs().ln();
                    if d < 0.0 {
                        sign = -sign;
                    }
                }
            }
            (log, sign)
        })
        .collect();
    let floor = logs.iter().map(|l| l.0).fold(f64::INFINITY, f64::min);
    (logs.iter().map(|&(l, s)| s * (floor - l).exp()).collect(), floor)
}

/// Lagrange interpolant in `x = cos(2πf)` in the first barycentric form,
/// `p(x) = ℓ(x) Σ w_j y_j / (x - x_j)`, which stays accurate for clustered
/// nodes. Nodes are given by frequency; `ℓ` is accumulated in logarithms.
struct Interpolant {
    f: Vec<f64>,
    w: Vec<f64>,
    y: Vec<f64>,
    log_scale: f64,
}

impl Interpolant {
    fn at(&self, f: f64) -> f64 {
        let mut sum = 0.0;
        let mut log_l = -self.log_scale;
        let mut negative = false;
        for ((&fj, &wj), &yj) in self.f.iter().zip(&self.w).zip(&self.y) {
            let d = cos_diff(f, fj);
            if d == 0.0 {
                return yj;
            }
            sum += wj * yj / d;
            log_l += d.abs().ln();
            negative ^= d < 0.0;
        }
        let mag = (log_l + sum.abs().ln()).exp();
        if negative != (sum < 0.0) {
            -mag
        } else {
            mag
        }
    }
}

/// Minimax linear-phase (type I) design via the Remez exchange.
pub fn remez(order: usize, bands: &[Band]) -> Result<Vec<f64>> {
    remez_seeded(order, bands, None)
}

/// Zero-phase amplitude of symmetric taps, `h_m + 2 Σ h_{m-k} cos(2πfk)`.
fn symmetric_amplitude(taps: &[f64], f: f64) -> f64 {
    let m = taps.len() / 2;
    let c = (2.0 * PI * f).cos();
    // cos(kθ) by the Chebyshev recurrence
    let (mut prev, mut cur) = (1.0, c);
    let mut acc = taps[m];
    for k in 1..=m {
        acc += 2.0 * taps[m - k] * cur;
        let next = 2.0 * c * cur - prev;
        prev = cur;
        cur = next;
    }
    acc
}

/// Starting extremal set: the alternation points of `seed`'s error when a
/// seed design is given, evenly spaced grid points otherwise. Gaps are
/// filled at their midpoints until there are `count` points.
fn initial_extrema(grid: &Grid, count: usize, seed: Option<&[f64]>) -> Vec<usize> {
    let size = grid.freq.len();
    let uniform = || (0..count).map(|j| j * (size - 1) / (count - 1)).collect();
    let Some(taps) = seed else {
        return uniform();
    };
    let err = par::map_range(size, |i| {
        grid.weight[i] * (grid.desired[i] - symmetric_amplitude(taps, grid.freq[i]))
    });
    let mut ext = alternating_extrema(&err, &grid.band, 0.0);
    trim_extrema(&err, &mut ext, count);
    while ext.len() < count {
        let (j, gap) = ext
            .windows(2)
            .map(|w| w[1] - w[0])
            .enumerate()
            .max_by_key(|g| g.1)
            .unwrap_or((0, 0));
        if gap < 2 {
            return uniform();
        }
        ext.insert(j + 1, ext[j] + gap / 2);
    }
    ext
}

fn remez_seeded(order: usize, bands: &[Band], seed: Option<&[f64]>) -> Result<Vec<f64>> {
    if !order.is_multiple_of(2) || order < 2 {
        return Err(Error::DesignFailure(format!("order {order} must be even and at least 2")));
    }
    let r = order / 2 + 1;
    let grid = dense_grid(bands, r);
    let size = grid.freq.len();
    if size < r + 1 {
        return Err(Error::DesignFailure("frequency grid too coarse".into()));
    }
    let mut ext = initial_extrema(&grid, r + 1, seed);
    let mut interp = None;
    for _ in 0..MAX_EXCHANGES {
        let nodes: Vec<f64> = ext.iter().map(|&i| grid.freq[i]).collect();
        let (b, log_scale) = barycentric(&nodes);
        let mut num = 0.0;
        let mut den = 0.0;
        for (j, &i) in ext.iter().enumerate() {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            num += b[j] * grid.desired[i];
            den += sign * b[j] / grid.weight[i];
        }
        let delta = num / den;
        let y: Vec<f64> = ext
            .iter()
            .enumerate()
            .map(|(j, &i)| {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                grid.desired[i] - sign * delta / grid.weight[i]
            })
            .collect();
        // drop the last node; its weight correction keeps the rest exact
        let w: Vec<f64> = (0..r).map(|j| b[j] * cos_diff(nodes[j], nodes[r])).collect();
        let current = Interpolant {
            f: nodes[..r].to_vec(),
            w,
            y: y[..r].to_vec(),
            log_scale,
        };
        let err = par::map_range(size, |i| {
            grid.weight[i] * (grid.desired[i] - current.at(grid.freq[i]))
        });
        let next = exchange(&err, &grid.band, delta.abs(), r + 1)
            .ok_or_else(|| Error::DesignFailure("extremal search lost alternation".into()))?;
        let (lo, hi) = next
            .iter()
            .map(|&i| err[i].abs())
            .fold((f64::INFINITY, 0.0f64), |(a, b), e| (a.min(e), b.max(e)));
        let done = next == ext || (hi - lo) <= 1e-6 * hi;
        ext = next;
        interp = Some(current);
        if done {
            return Ok(impulse_response(order, interp.as_ref().unwrap()));
        }
    }
    let _ = interp;
    Err(Error::DesignFailure(format!("Remez exchange did not converge in {MAX_EXCHANGES} iterations")))
}

const MAX_EXCHANGES: usize = 100;

/// Picks `count` alternating extrema of the error curve, ignoring local
/// extrema smaller than the current levelled error `floor`.
fn exchange(err: &[f64], band: &[usize], floor: f64, count: usize) -> Option<Vec<usize>> {
    let mut alt = alternating_extrema(err, band, floor * (1.0 - 1e-3));
    trim_extrema(err, &mut alt, count);
    (alt.len() == count).then_some(alt)
}

/// Local extrema of at least `floor` in magnitude, with runs of equal sign
/// merged into their largest member. Neighbours are compared within a band.
fn alternating_extrema(err: &[f64], band: &[usize], floor: f64) -> Vec<usize> {
    let n = err.len();
    let mut alt: Vec<usize> = Vec::new();
    for i in 0..n {
        let e = err[i];
        if e.abs() < floor || e == 0.0 {
            continue;
        }
        let left = if i > 0 && band[i - 1] == band[i] { err[i - 1] } else { f64::NAN };
        let right = if i + 1 < n && band[i + 1] == band[i] { err[i + 1] } else { f64::NAN };
        let is_max = e > 0.0 && !(left > e) && !(right > e);
        let is_min = e < 0.0 && !(left < e) && !(right < e);
        if !(is_max || is_min) || e == left {
            continue;
        }
        match alt.last_mut() {
            Some(last) if (err[*last] > 0.0) == (e > 0.0) => {
                if e.abs() > err[*last].abs() {
                    *last = i;
                }
            }
            _ => alt.push(i),
        }
    }
    alt
}

/// Drops extrema until at most `count` remain, keeping the signs alternating.
fn trim_extrema(err: &[f64], alt: &mut Vec<usize>, count: usize) {
    while alt.len() > count {
        let extra = alt.len() - count;
        if extra == 1 {
            if err[alt[0]].abs() < err[alt[alt.len() - 1]].abs() {
                alt.remove(0);
            } else {
                alt.pop();
            }
        } else {
            // removing an interior extremum breaks alternation; drop it
            // together with the smaller of its neighbours
            let (j, _) = alt
                .iter()
                .enumerate()
                .min_by(|a, b| err[*a.1].abs().total_cmp(&err[*b.1].abs()))
                .unwrap();
            if j == 0 || j == alt.len() - 1 {
                alt.remove(j);
            } else {
                let other = if err[alt[j - 1]].abs() < err[alt[j + 1]].abs() { j - 1 } else { j + 1 };
                alt.remove(j.max(other));
                alt.remove(j.min(other));
            }
        }
    }
}

/// Taps from samples of the amplitude response on `order + 1` equispaced
/// frequencies.
fn impulse_response(order: usize, a: &Interpolant) -> Vec<f64> {
    let len = order + 1;
    let m = order / 2;
    let samples: Vec<f64> = (0..=m).map(|k| a.at(k as f64 / len as f64)).collect();
    let taps: Vec<f64> = (0..=m)
        .map(|n| {
            let shift = n as f64 - m as f64;
            let mut acc = samples[0];
            for (k, s) in samples.iter().enumerate().skip(1) {
                acc += 2.0 * s * (2.0 * PI * k as f64 * shift / len as f64).cos();
            }
            acc / len as f64
        })
        .collect();
    let mut full = taps.clone();
    full.extend(taps.iter().rev().skip(1));
    full
}

fn bessel_i0(x: f64) -> f64 {
    let y = x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        term *= y / (k * k) as f64;
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum
}

/// Kaiser-windowed ideal bandpass with cutoffs at the transition centres.
pub fn kaiser_bandpass(t: &FilterTemplate, order: usize) -> Vec<f64> {
    let atten = t.a_stop.max(-20.0 * t.passband_deviation().log10());
    let beta = if atten > 50.0 {
        0.1102 * (atten - 8.7)
    } else if atten >= 21.0 {
        0.5842 * (atten - 21.0).powf(0.4) + 0.07886 * (atten - 21.0)
    } else {
        0.0
    };
    let f1 = 0.5 * (t.f_stop1 + t.f_pass1) / t.fs;
    let f2 = 0.5 * (t.f_pass2 + t.f_stop2) / t.fs;
    let mid = order as f64 / 2.0;
    let norm = bessel_i0(beta);
    let ideal = |m: f64, f: f64| if m == 0.0 { 2.0 * f } else { (2.0 * PI * f * m).sin() / (PI * m) };
    let taps: Vec<f64> = (0..=order)
        .map(|n| {
            let m = n as f64 - mid;
            let r = m / mid;
            let w = bessel_i0(beta * (1.0 - r * r).max(0.0).sqrt()) / norm;
            (ideal(m, f2) - ideal(m, f1)) * w
        })
        .collect();
    let centre = 0.5 * (t.f_pass1 + t.f_pass2) / t.fs;
    let gain: f64 = taps
        .iter()
        .enumerate()
        .map(|(n, h)| h * (2.0 * PI * centre * (n as f64 - mid)).cos())
        .sum();
    taps.iter().map(|h| h / gain).collect()
}

/// Causal direct-form convolution with zero initial state; output has the
/// input's length.
pub fn convolve(taps: &[f64], x: &[f64]) -> Vec<f64> {
    (0..x.len())
        .map(|n| {
            let kmax = n.min(taps.len() - 1);
            (0..=kmax).map(|k| taps[k] * x[n - k]).sum()
        })
        .collect()
}

/// Filter output re-indexed to input time.
#[derive(Debug, Clone, PartialEq)]
pub struct Filtered {
    /// `samples[n]` is the response attributed to input sample `n`.
    pub samples: Vec<f64>,
    /// First index whose computation saw a full tap history.
    pub valid_from: usize,
}

impl Filtered {
    pub fn steady(&self) -> &[f64] {
        &self.samples[self.valid_from..]
    }
}

/// Filters `x` and advances the result by the group delay so that sample `n`
/// of the output lines up with input sample `n`.
pub fn apply_fir(filter: &FirFilter, x: &[f64]) -> Result<Filtered> {
    let taps = filter.taps.len();
    if x.len() <= taps {
        return Err(Error::InsufficientData { len: x.len(), taps });
    }
    let delay = filter.order() / 2;
    let y = convolve(&filter.taps, x);
    Ok(Filtered {
        samples: y[delay..].to_vec(),
        valid_from: delay,
    })
}

/// Sample-by-sample FIR with persistent state.
#[derive(Debug, Clone)]
pub struct StreamingFir {
    taps: Vec<f64>,
    history: VecDeque<f64>,
    seen: usize,
}

impl StreamingFir {
    pub fn new(filter: &FirFilter) -> Self {
        let len = filter.taps.len();
        Self {
            taps: filter.taps.clone(),
            history: VecDeque::from(vec![0.0; len]),
            seen: 0,
        }
    }

    pub fn delay(&self) -> usize {
        (self.taps.len() - 1) / 2
    }

    /// Whether the tap line has been filled with real input.
    pub fn is_settled(&self) -> bool {
        self.seen >= self.taps.len()
    }

    pub fn push(&mut self, x: f64) -> f64 {
        self.history.pop_back();
        self.history.push_front(x);
        self.seen += 1;
        self.taps.iter().zip(&self.history).map(|(h, v)| h * v).sum()
    }
}
