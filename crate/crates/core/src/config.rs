//! TOML experiment configuration. Every section is optional and falls back to
//! the settings that reproduce the reference studies.
//!
//! ```toml
//! seed = 7
//! output = "fig3.csv"
//!
//! [window]
//! order = 2
//!
//! [noise]
//! cir = [0.7, 1.5]
//! snr_db = [30, 40, 50, 60, 70, 80, 90]
//! realizations = 10000
//! ```

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::persistence::read_coefficients;
use crate::prefilter::{design_bandpass, FilterTemplate, FirFilter};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
#[derive(Default)]
pub struct ExperimentConfig {
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub window: WindowSection,
    pub prefilter: PrefilterSection,
    pub sweep: SweepSection,
    pub noise: NoiseSection,
    pub tables: TableSection,
    pub transient: TransientSection,
    pub combined: CombinedSection,
    pub estimate: EstimateSection,
}


impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::Config(msg.to_string()));
        if self.window.order < 2 {
            return Err(Error::Config(format!("window order {} (need at least 2)", self.window.order)));
        }
        if self.sweep.n.is_empty() || self.sweep.cir.is_empty() {
            return fail("sweep grids must not be empty");
        }
        if !(self.sweep.phase_step > 0.0) || !(self.tables.phase_step > 0.0) {
            return fail("phase step must be positive");
        }
        if self.noise.cir.is_empty() || self.noise.snr_db.is_empty() {
            return fail("noise grids must not be empty");
        }
        if self.noise.realizations == 0 {
            return fail("realization count must be positive");
        }
        if self.tables.n.is_empty() || self.tables.harmonic_sets.is_empty() || self.tables.filters.is_empty() {
            return fail("table grids must not be empty");
        }
        if self.transient.n.is_empty() || self.combined.n.is_empty() {
            return fail("window length lists must not be empty");
        }
        if self.prefilter.kind == FilterKind::File && self.prefilter.path.is_none() {
            return fail("prefilter kind \"file\" needs a path");
        }
        let lengths = self.sweep.n.iter().chain(&self.tables.n).chain(&self.transient.n).chain(&self.combined.n);
        for &n in lengths.chain([self.noise.n].iter()) {
            if n < 2 * self.window.order {
                return Err(Error::Config(format!("window length {n} too short")));
            }
        }
        Ok(())
    }

    /// Divides grids and realization counts by ten or more.
    pub fn quick(&mut self) {
        self.sweep.phase_step *= 10.0;
        self.sweep.cir = thin(&self.sweep.cir, 2);
        self.noise.realizations = (self.noise.realizations / 10).max(1);
        self.tables.phase_step *= 10.0;
    }
}

fn thin(v: &[f64], keep_every: usize) -> Vec<f64> {
    v.iter().step_by(keep_every).copied().collect()
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindowSection {
    pub order: usize,
}

impl Default for WindowSection {
    fn default() -> Self {
        Self { order: 2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterKind {
    None,
    A,
    B,
    File,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PrefilterSection {
    pub kind: FilterKind,
    pub path: Option<PathBuf>,
    pub fs: f64,
}

impl Default for PrefilterSection {
    fn default() -> Self {
        Self { kind: FilterKind::None, path: None, fs: 24000.0 }
    }
}

impl PrefilterSection {
    pub fn build(&self) -> Result<Option<FirFilter>> {
        build_filter(self.kind, self.path.as_deref(), self.fs)
    }
}

/// Designs or loads the selected filter.
pub fn build_filter(kind: FilterKind, path: Option<&Path>, fs: f64) -> Result<Option<FirFilter>> {
    Ok(match kind {
        FilterKind::None => None,
        FilterKind::A => Some(design_bandpass(&FilterTemplate::filter_a(fs))?),
        FilterKind::B => Some(design_bandpass(&FilterTemplate::filter_b(fs))?),
        FilterKind::File => {
            let path = path.ok_or_else(|| Error::Config("filter file path missing".into()))?;
            Some(read_coefficients(path, fs)?)
        }
    })
}

/// Noiseless worst-phase sweep over record length and cycles in range.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub n: Vec<usize>,
    pub cir: Vec<f64>,
    pub phase_step: f64,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            n: (5..=11).map(|e| 1 << e).collect(),
            cir: (0..=38).map(|i| 0.1 + 0.05 * i as f64).collect(),
            phase_step: 0.01,
        }
    }
}

/// Monte Carlo comparison with the Cramér–Rao bounds.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSection {
    pub n: usize,
    pub cir: Vec<f64>,
    pub snr_db: Vec<f64>,
    pub realizations: usize,
    pub amplitude: f64,
}

impl Default for NoiseSection {
    fn default() -> Self {
        Self {
            n: 512,
            cir: vec![0.7, 1.5],
            snr_db: (3..=9).map(|i| 10.0 * i as f64).collect(),
            realizations: 10_000,
            amplitude: 1.0,
        }
    }
}

/// Harmonic-influence tables.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TableSection {
    pub n: Vec<usize>,
    pub fs: f64,
    pub f1: f64,
    /// Harmonic amplitude relative to the fundamental.
    pub ratio: f64,
    pub harmonic_sets: Vec<Vec<u32>>,
    pub filters: Vec<FilterKind>,
    pub phase_step: f64,
}

impl Default for TableSection {
    fn default() -> Self {
        Self {
            n: vec![64, 128, 256, 512],
            fs: 24000.0,
            f1: 50.0,
            ratio: 0.1,
            harmonic_sets: vec![
                vec![2],
                vec![3],
                vec![4],
                vec![5],
                vec![6],
                vec![7],
                vec![2, 3],
                vec![3, 4],
                vec![2, 3, 4],
            ],
            filters: vec![FilterKind::None, FilterKind::A, FilterKind::B],
            phase_step: 0.01,
        }
    }
}

/// Step response of the streaming loop.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransientSection {
    pub n: Vec<usize>,
    pub fs: f64,
    pub f1: f64,
    pub amplitude: f64,
    /// Phase of the carrier before the step (sine convention).
    pub phase: f64,
    pub stride: usize,
    /// Converter resolution; `0` disables quantization.
    pub bits: u32,
    pub full_scale: f64,
    /// Relative amplitude tolerance.
    pub amplitude_tol: f64,
    /// Phase tolerance in radians.
    pub phase_tol: f64,
}

impl Default for TransientSection {
    fn default() -> Self {
        Self {
            n: vec![64, 128, 256],
            fs: 24000.0,
            f1: 50.0,
            amplitude: 1.0,
            phase: PI / 2.0,
            stride: 4,
            bits: 16,
            full_scale: 1.5,
            amplitude_tol: 0.01,
            phase_tol: 0.15,
        }
    }
}

/// Harmonics, noise and a decaying offset through a prefiltered loop.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CombinedSection {
    pub n: Vec<usize>,
    pub fs: f64,
    pub f1: f64,
    pub amplitude: f64,
    /// Degrees.
    pub phase_deg: f64,
    /// `(order, amplitude relative to the fundamental, phase in degrees)`.
    pub harmonics: Vec<(u32, f64, f64)>,
    pub noise_sigma: f64,
    /// Drift amplitude relative to the fundamental.
    pub drift: f64,
    pub tau: f64,
    pub filter: FilterKind,
    /// Seconds of signal after the drift onset.
    pub duration: f64,
    pub stride: usize,
}

impl Default for CombinedSection {
    fn default() -> Self {
        Self {
            n: vec![256, 512],
            fs: 24000.0,
            f1: 50.0,
            amplitude: 31.6,
            phase_deg: 80.0,
            harmonics: vec![
                (3, 0.5 / 1.5, 60.0),
                (5, 0.2 / 1.5, 45.0),
                (7, 0.15 / 1.5, 36.0),
                (11, 0.1 / 1.5, 30.0),
            ],
            noise_sigma: 0.05,
            drift: 0.25,
            tau: 0.05,
            filter: FilterKind::A,
            duration: 0.5,
            stride: 4,
        }
    }
}

/// One-shot estimation on a stored record.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimateSection {
    pub input: Option<PathBuf>,
    /// Window length; the last `n` samples are used. Defaults to the
    /// largest power of two that fits.
    pub n: Option<usize>,
    pub max_cir: f64,
}

impl Default for EstimateSection {
    fn default() -> Self {
        Self { input: None, n: None, max_cir: f64::INFINITY }
    }
}
