//! Deterministic synthesis of test signals: harmonic tones, white Gaussian
//! noise, exponential drift, step changes and uniform quantization.
//!
//! Noise is drawn from `ChaCha8Rng::seed_from_u64(seed)` through the Ziggurat
//! sampler of `rand_distr::StandardNormal`, so a seed pins a realization on
//! every platform.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tone {
    pub amplitude: f64,
    /// Hz.
    pub frequency: f64,
    /// Radians, sine convention: `A sin(2πft + φ)`.
    pub phase: f64,
}

impl Tone {
    pub fn new(amplitude: f64, frequency: f64, phase: f64) -> Self {
        Self { amplitude, frequency, phase }
    }

    pub fn at(&self, t: f64) -> f64 {
        self.amplitude * (2.0 * PI * self.frequency * t + self.phase).sin()
    }
}

/// `A_e e^{-(t - t0)/τ}` for `t ≥ t0`, zero before.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Drift {
    pub amplitude: f64,
    /// Seconds.
    pub tau: f64,
    /// Seconds.
    pub onset: f64,
}

impl Drift {
    pub fn at(&self, t: f64) -> f64 {
        if t >= self.onset {
            self.amplitude * (-(t - self.onset) / self.tau).exp()
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantizer {
    pub bits: u32,
    pub full_scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalSpec {
    /// The first tone is the fundamental.
    pub tones: Vec<Tone>,
    pub fs: f64,
    #[serde(default)]
    pub noise_sigma: f64,
    #[serde(default)]
    pub drift: Option<Drift>,
    #[serde(default)]
    pub quantizer: Option<Quantizer>,
    #[serde(default)]
    pub seed: u64,
}

impl SignalSpec {
    pub fn pure(tone: Tone, fs: f64) -> Self {
        Self {
            tones: vec![tone],
            fs,
            noise_sigma: 0.0,
            drift: None,
            quantizer: None,
            seed: 0,
        }
    }

    pub fn fundamental(&self) -> Option<&Tone> {
        self.tones.first()
    }

    pub fn validate(&self) -> Result<()> {
        let f1 = self
            .fundamental()
            .ok_or_else(|| Error::InvalidSignal("no tones".into()))?;
        if !(f1.amplitude > 0.0 && f1.frequency > 0.0) {
            return Err(Error::InvalidSignal(
                "fundamental amplitude and frequency must be positive".into(),
            ));
        }
        if !(self.fs > 0.0) {
            return Err(Error::InvalidSignal(format!("sampling rate {}", self.fs)));
        }
        if !(self.noise_sigma >= 0.0) {
            return Err(Error::InvalidSignal(format!("noise sigma {}", self.noise_sigma)));
        }
        for t in &self.tones {
            if !(self.fs > 2.0 * t.frequency.abs()) {
                return Err(Error::Aliasing { freq: t.frequency, fs: self.fs });
            }
        }
        if let Some(d) = &self.drift {
            if !(d.tau > 0.0) {
                return Err(Error::InvalidSignal(format!("drift time constant {}", d.tau)));
            }
        }
        Ok(())
    }

    /// `sqrt(Σ A_i², i ≥ 2) / A_1`.
    pub fn thd(&self) -> f64 {
        let Some(f1) = self.fundamental() else {
            return 0.0;
        };
        let h: f64 = self.tones[1..].iter().map(|t| t.amplitude * t.amplitude).sum();
        h.sqrt() / f1.amplitude
    }
}

/// `n` samples starting at `t_start`: tones, drift and noise, then optional
/// quantization.
pub fn synth(spec: &SignalSpec, n: usize, t_start: f64) -> Result<Vec<f64>> {
    spec.validate()?;
    let mut x: Vec<f64> = (0..n)
        .map(|i| {
            let t = t_start + i as f64 / spec.fs;
            let tones: f64 = spec.tones.iter().map(|tone| tone.at(t)).sum();
            tones + spec.drift.map_or(0.0, |d| d.at(t))
        })
        .collect();
    if spec.noise_sigma > 0.0 {
        for (v, e) in x.iter_mut().zip(gaussian_noise(spec.seed, n, spec.noise_sigma)) {
            *v += e;
        }
    }
    if let Some(q) = spec.quantizer {
        x = quantize(&x, q.bits, q.full_scale)?.samples;
    }
    Ok(x)
}

/// White Gaussian noise with standard deviation `sigma`.
pub fn gaussian_noise(seed: u64, n: usize, sigma: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            sigma * z
        })
        .collect()
}

/// `10 log10((A_1²/2) / σ²)`; infinite for a noiseless spec.
pub fn snr_db(spec: &SignalSpec) -> f64 {
    let a = spec.fundamental().map_or(0.0, |t| t.amplitude);
    if spec.noise_sigma == 0.0 {
        return f64::INFINITY;
    }
    10.0 * (a * a / 2.0 / (spec.noise_sigma * spec.noise_sigma)).log10()
}

/// Noise standard deviation giving `snr` dB for a tone of amplitude `a`.
pub fn sigma_for_snr(a: f64, snr: f64) -> f64 {
    (a * a / 2.0 / 10f64.powf(snr / 10.0)).sqrt()
}

/// Drift samples at `t_n = n / fs`.
pub fn exponential_drift(amplitude: f64, tau: f64, onset: f64, n: usize, fs: f64) -> Result<Vec<f64>> {
    if !(tau > 0.0) {
        return Err(Error::InvalidSignal(format!("drift time constant {tau}")));
    }
    let d = Drift { amplitude, tau, onset };
    Ok((0..n).map(|i| d.at(i as f64 / fs)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepKind {
    /// Amplitude rises by 10 %.
    Amplitude,
    /// Phase advances by 90°.
    Phase,
}

/// Tone with a step at `t = 0`. Sample `i` is taken at `(i - pre) / fs`, so
/// `pre` samples precede the step and `post` follow it.
pub fn step_test(kind: StepKind, tone: Tone, fs: f64, pre: usize, post: usize) -> Vec<f64> {
    (0..pre + post)
        .map(|i| {
            let t = (i as f64 - pre as f64) / fs;
            let after = t >= 0.0;
            let (a, p) = match kind {
                StepKind::Amplitude if after => (1.1 * tone.amplitude, tone.phase),
                StepKind::Phase if after => (tone.amplitude, tone.phase + PI / 2.0),
                _ => (tone.amplitude, tone.phase),
            };
            a * (2.0 * PI * tone.frequency * t + p).sin()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Quantized {
    pub samples: Vec<f64>,
    /// Samples that fell outside the converter range.
    pub clipped: usize,
}

/// Uniform mid-tread quantization to `2^bits` levels spanning `±full_scale`.
pub fn quantize(x: &[f64], bits: u32, full_scale: f64) -> Result<Quantized> {
    if !(8..=24).contains(&bits) {
        return Err(Error::InvalidSignal(format!("quantizer bits {bits} outside 8..=24")));
    }
    if !(full_scale > 0.0) {
        return Err(Error::InvalidSignal(format!("full scale {full_scale}")));
    }
    let half = (1i64 << (bits - 1)) as f64;
    let step = full_scale / half;
    let mut clipped = 0;
    let samples = x
        .iter()
        .map(|&v| {
            let code = (v / step).round();
            let bounded = code.clamp(-half, half - 1.0);
            if bounded != code {
                clipped += 1;
            }
            bounded * step
        })
        .collect();
    Ok(Quantized { samples, clipped })
}
