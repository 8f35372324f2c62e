//! Interpolated-DFT estimation of frequency, amplitude and phase from three
//! spectrum bins, with explicit cancellation of the negative-frequency image.
//!
//! A real tone `A sin(2πλn/N + φ)` contributes to bin `m`
//!
//! ```text
//! X_m = U·W(m - λ) + V·W(m + λ),   U = (A/2j) e^{jφ},   V = -(A/2j) e^{-jφ}
//! ```
//!
//! Writing `W(x) = e^{-jπx} K(x)` with a real kernel `K` turns the bins
//! `Y_m = (-1)^m X_m` into a real-coefficient linear system in the rotated
//! phasors `U e^{jπλ}` and `V e^{-jπλ}`. Two rows determine the phasors; the
//! third row fixes `λ`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectrum::{select_triplet, SpectrumTriplet, WindowedDft};
use crate::windows::{kernel, WindowSpec};

pub use crate::windows::{dirichlet_d, poly_p};

const J: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Which two of the three bins determine the phasors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RowPair {
    /// Bins `k-1` and `k`.
    #[default]
    Lower,
    /// Bins `k` and `k+1`.
    Upper,
}

impl RowPair {
    fn indices(self) -> (usize, usize) {
        match self {
            RowPair::Lower => (0, 1),
            RowPair::Upper => (1, 2),
        }
    }
}

/// How the phase is read off the solved phasors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhaseForm {
    /// `arg(2jF⁻ / (Â D(k-λ)))` with the complex root `Â = 2√(F⁻F⁺/(D D))`.
    /// Uses both components and equals the image-based form exactly.
    #[default]
    Symmetric,
    /// `arg(2jF⁻ / (|Â| D(k-λ)))`: the fundamental component only.
    Fundamental,
    /// `arg(-|Â| D(k+λ) / (2jF⁺))`: the image component only.
    Image,
}

/// Whether the image term takes part in the fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ImageModel {
    #[default]
    Cancelled,
    /// Treat bin `k` as pure fundamental leakage (`F⁺ = 0`).
    Ignored,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FrequencyMode {
    /// Solve for `λ` from the bins.
    Estimate,
    /// Use a known normalized frequency in bins.
    Known(f64),
}

/// Coefficients of the fundamental (`F⁻`) and image (`F⁺`) components after
/// the common `D` factor has been pulled out.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoupledAmplitudes {
    pub fminus: Complex64,
    pub fplus: Complex64,
}

/// Complex amplitudes `U`, `V` of the positive- and negative-frequency terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Phasors {
    pub fundamental: Complex64,
    pub image: Complex64,
}

impl Phasors {
    /// Principal complex root `2√(UV)`; its modulus is the amplitude.
    pub fn amplitude_root(&self) -> Complex64 {
        2.0 * (self.fundamental * self.image).sqrt()
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude_root().norm()
    }

    pub fn phase(&self, form: PhaseForm) -> f64 {
        let raw = match form {
            PhaseForm::Symmetric => (2.0 * J * self.fundamental / self.amplitude_root()).arg(),
            PhaseForm::Fundamental => (2.0 * J * self.fundamental).arg(),
            PhaseForm::Image => (-1.0 / (2.0 * J * self.image)).arg(),
        };
        wrap_phase(raw)
    }

    pub fn coupled(&self, k: usize, lambda: f64, order: usize, n: usize) -> CoupledAmplitudes {
        CoupledAmplitudes {
            fminus: self.fundamental * dirichlet_d(order, n, k as f64 - lambda),
            fplus: self.image * dirichlet_d(order, n, k as f64 + lambda),
        }
    }
}

/// Result of one estimation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    /// Normalized frequency in bins (cycles in the record).
    pub lambda: f64,
    pub amplitude: f64,
    /// Phase of the sine at the first sample of the record, in `(-π, π]`.
    pub phase: f64,
    /// Frequency in Hz.
    pub frequency: f64,
    /// Centre bin of the triplet used.
    pub k: usize,
    /// Set when `λ` was nudged by `1e-9` bins off a degenerate point.
    pub perturbed: bool,
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_phase(x: f64) -> f64 {
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    if y <= -PI {
        y += 2.0 * PI;
    }
    y
}

fn columns(t: &SpectrumTriplet, lambda: f64) -> ([f64; 3], [f64; 3]) {
    let mut a = [0.0; 3];
    let mut b = [0.0; 3];
    for r in 0..3 {
        let m = (t.k + r - 1) as f64;
        a[r] = kernel(t.order, t.n, m - lambda);
        b[r] = kernel(t.order, t.n, m + lambda);
    }
    (a, b)
}

fn alternated(t: &SpectrumTriplet) -> [Complex64; 3] {
    let mut y = t.bins;
    for (r, v) in y.iter_mut().enumerate() {
        if (t.k + r - 1) % 2 == 1 {
            *v = -*v;
        }
    }
    y
}

/// Solves two rows of the bin system for `U` and `V`.
pub fn solve_phasors(t: &SpectrumTriplet, lambda: f64, rows: RowPair) -> Result<Phasors> {
    let (a, b) = columns(t, lambda);
    let y = alternated(t);
    let (i, j) = rows.indices();
    let det = a[i] * b[j] - a[j] * b[i];
    let frob = a[i] * a[i] + a[j] * a[j] + b[i] * b[i] + b[j] * b[j];
    if !(det.abs() > 1e-12 * frob) {
        return Err(Error::Degenerate { lambda });
    }
    let u = (y[i] * b[j] - y[j] * b[i]) / det;
    let v = (y[j] * a[i] - y[i] * a[j]) / det;
    let rot = Complex64::from_polar(1.0, PI * lambda);
    Ok(Phasors {
        fundamental: u / rot,
        image: v * rot,
    })
}

/// Fit of bin `k` alone with the image term dropped.
pub fn solve_without_image(t: &SpectrumTriplet, lambda: f64) -> Result<Phasors> {
    let (a, _) = columns(t, lambda);
    if a[1] == 0.0 {
        return Err(Error::Degenerate { lambda });
    }
    let y = alternated(t);
    let rot = Complex64::from_polar(1.0, PI * lambda);
    Ok(Phasors {
        fundamental: y[1] / a[1] / rot,
        image: Complex64::new(0.0, 0.0),
    })
}

/// `(F⁻, F⁺)` from bins `k-1` and `k`.
pub fn solve_f(t: &SpectrumTriplet, lambda: f64) -> Result<CoupledAmplitudes> {
    Ok(solve_phasors(t, lambda, RowPair::Lower)?.coupled(t.k, lambda, t.order, t.n))
}

fn d_pair(lambda: f64, k: usize, order: usize, n: usize) -> Result<(Complex64, Complex64)> {
    let dm = dirichlet_d(order, n, k as f64 - lambda);
    let dp = dirichlet_d(order, n, k as f64 + lambda);
    let tiny = 1e-14 * n as f64;
    if dm.norm() <= tiny || dp.norm() <= tiny {
        return Err(Error::Singular { lambda });
    }
    Ok((dm, dp))
}

/// Complex root `2√(F⁻F⁺ / (D(k+λ) D(k-λ)))` (principal branch).
pub fn amplitude_root(
    f: &CoupledAmplitudes,
    lambda: f64,
    k: usize,
    order: usize,
    n: usize,
) -> Result<Complex64> {
    let (dm, dp) = d_pair(lambda, k, order, n)?;
    Ok(2.0 * (f.fminus * f.fplus / (dp * dm)).sqrt())
}

/// Amplitude estimate: modulus of [`amplitude_root`].
pub fn estimate_amplitude(
    f: &CoupledAmplitudes,
    lambda: f64,
    k: usize,
    order: usize,
    n: usize,
) -> Result<f64> {
    Ok(amplitude_root(f, lambda, k, order, n)?.norm())
}

/// `arg(2jF⁻ / (Â D(k-λ)))`. Passing the complex root gives the symmetric
/// estimate; passing a real amplitude gives the fundamental-only estimate.
pub fn estimate_phase(
    f: &CoupledAmplitudes,
    amplitude: Complex64,
    lambda: f64,
    k: usize,
    order: usize,
    n: usize,
) -> Result<f64> {
    let (dm, _) = d_pair(lambda, k, order, n)?;
    Ok(wrap_phase((2.0 * J * f.fminus / (amplitude * dm)).arg()))
}

/// `arg(-Â D(k+λ) / (2jF⁺))`, the image-based counterpart of [`estimate_phase`].
pub fn estimate_phase_from_image(
    f: &CoupledAmplitudes,
    amplitude: Complex64,
    lambda: f64,
    k: usize,
    order: usize,
    n: usize,
) -> Result<f64> {
    let (_, dp) = d_pair(lambda, k, order, n)?;
    Ok(wrap_phase((-amplitude * dp / (2.0 * J * f.fplus)).arg()))
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x.sin() / x
    }
}

/// Closed-form amplitude for the Hanning window and `k = 1`, from `X_0`, `X_1`.
/// The returned value carries an extra `e^{jπλ}` rotation; its modulus is the
/// amplitude.
pub fn amplitude_closed_form_h2(x0: Complex64, x1: Complex64, lambda: f64, n: usize) -> Complex64 {
    let l = lambda;
    let radicand = -(l * l - 4.0) * (x1 * (l + 2.0) - x0 * (l - 1.0)) * (x1 * (l - 2.0) - x0 * (l + 1.0));
    let pre = 2.0 * (1.0 + l) / (3.0 * n as f64 * sinc((l - 1.0) * PI));
    Complex64::from_polar(pre, PI * l) * radicand.sqrt()
}

/// Closed-form phase for the Hanning window and `k = 1`, from `X_0`, `X_1`.
/// With the complex amplitude root it equals [`PhaseForm::Symmetric`]; with a
/// real amplitude it equals [`PhaseForm::Fundamental`].
pub fn phase_closed_form_h2(
    x0: Complex64,
    x1: Complex64,
    lambda: f64,
    n: usize,
    amplitude: Complex64,
) -> f64 {
    let l = lambda;
    let rot = Complex64::from_polar(1.0, -PI * (l - 1.0));
    let num = -2.0 * J * rot * (l - 2.0);
    let den = amplitude * n as f64 * sinc((l - 1.0) * PI) * (l + 2.0 + 2.0 * (l - 1.0));
    let bins = l * x1 * (l + 1.0) * (l + 2.0) - l * x0 * (l * l - 1.0);
    wrap_phase((num / den * bins).arg())
}

/// Closed-form frequency for the Hanning window and `k = 1`: the real value
/// of `λ²` making the three bins consistent.
pub fn frequency_closed_form_h2(bins: &[Complex64; 3]) -> f64 {
    let num = bins[0] + 2.0 * bins[1] + 9.0 * bins[2];
    let den = bins[0] - 2.0 * bins[1] + bins[2];
    let s = (den.conj() * num).re / den.norm_sqr();
    s.max(0.0).sqrt()
}

/// Distance of the bins from the two-component model at `λ`: the projection
/// of the alternated bins on the unit normal of the model plane.
fn consistency(t: &SpectrumTriplet, y: &[Complex64; 3], lambda: f64) -> Option<Complex64> {
    let (a, b) = columns(t, lambda);
    let nrm = [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ];
    let len = (nrm[0] * nrm[0] + nrm[1] * nrm[1] + nrm[2] * nrm[2]).sqrt();
    let scale = (a.iter().map(|v| v * v).sum::<f64>() * b.iter().map(|v| v * v).sum::<f64>()).sqrt();
    if !(len > 1e-12 * scale) {
        return None;
    }
    Some((y[0] * nrm[0] + y[1] * nrm[1] + y[2] * nrm[2]) / len)
}

/// Half the derivative of `|r(λ)|²`, with `r'` by central differences.
fn slope(t: &SpectrumTriplet, y: &[Complex64; 3], lambda: f64) -> Option<f64> {
    const STEP: f64 = 1e-6;
    let r = consistency(t, y, lambda)?;
    let hi = consistency(t, y, lambda + STEP)?;
    let lo = consistency(t, y, lambda - STEP)?;
    let dr = (hi - lo) / (2.0 * STEP);
    Some((dr.conj() * r).re)
}

const SCAN_POINTS: usize = 64;
const MAX_ITER: usize = 80;
const TOL: f64 = 1e-12;

/// Solves the three-bin system for `λ` in `(max(k-1, 0.01), k+1)`.
///
/// The model plane spanned by the fundamental and image columns moves with
/// `λ`; the estimate is the `λ` that brings the bins closest to it. Local
/// minima of the distance are bracketed on a scan grid and refined by
/// bisection with secant steps; the deepest minimum wins.
pub fn estimate_frequency(t: &SpectrumTriplet) -> Result<f64> {
    if t.bins.iter().all(|b| b.norm_sqr() == 0.0) {
        return Err(Error::NoSignal);
    }
    let y = alternated(t);
    let lo = (t.k as f64 - 1.0).max(0.01) + 1e-6;
    let hi = t.k as f64 + 1.0 - 1e-6;
    let grid: Vec<f64> = (0..SCAN_POINTS)
        .map(|i| lo + (hi - lo) * i as f64 / (SCAN_POINTS - 1) as f64)
        .collect();
    let values: Vec<Option<f64>> = grid.iter().map(|&l| slope(t, &y, l)).collect();

    let mut best: Option<(f64, f64)> = None;
    for i in 0..SCAN_POINTS - 1 {
        let (Some(ga), Some(gb)) = (values[i], values[i + 1]) else {
            continue;
        };
        if !(ga < 0.0 && gb >= 0.0) {
            continue;
        }
        let Some(root) = refine(t, &y, (grid[i], ga), (grid[i + 1], gb)) else {
            continue;
        };
        let Some(r) = consistency(t, &y, root) else {
            continue;
        };
        let cost = r.norm_sqr();
        if best.is_none_or(|(_, c)| cost < c) {
            best = Some((root, cost));
        }
    }
    best.map(|(l, _)| l).ok_or_else(|| {
        Error::Estimation(format!("no consistent frequency in ({lo:.6}, {hi:.6}) bins"))
    })
}

fn refine(t: &SpectrumTriplet, y: &[Complex64; 3], lo: (f64, f64), hi: (f64, f64)) -> Option<f64> {
    let (mut a, mut ga) = lo;
    let (mut b, mut gb) = hi;
    for iter in 0..MAX_ITER {
        if b - a < TOL {
            break;
        }
        let mid = 0.5 * (a + b);
        // alternate secant and bisection steps; the secant point is kept only
        // if it falls well inside the bracket
        let trial = if iter % 2 == 0 && gb != ga {
            let s = a - ga * (b - a) / (gb - ga);
            if s > a + 0.01 * (b - a) && s < b - 0.01 * (b - a) {
                s
            } else {
                mid
            }
        } else {
            mid
        };
        let g = slope(t, y, trial)?;
        if g < 0.0 {
            a = trial;
            ga = g;
        } else {
            b = trial;
            gb = g;
        }
    }
    Some(0.5 * (a + b))
}

/// Settings for [`Estimator`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorConfig {
    pub order: usize,
    pub len: usize,
    pub fs: f64,
    pub frequency: FrequencyMode,
    pub rows: RowPair,
    pub phase_form: PhaseForm,
    pub image: ImageModel,
    /// Upper bound on the expected cycles in the record; below 2 the centre
    /// bin is fixed at `k = 1`, otherwise the spectral peak is used.
    pub max_cir: f64,
}

impl EstimatorConfig {
    pub fn new(order: usize, len: usize, fs: f64) -> Self {
        Self {
            order,
            len,
            fs,
            frequency: FrequencyMode::Estimate,
            rows: RowPair::Lower,
            phase_form: PhaseForm::Symmetric,
            image: ImageModel::Cancelled,
            max_cir: f64::INFINITY,
        }
    }

    pub fn with_frequency(mut self, mode: FrequencyMode) -> Self {
        self.frequency = mode;
        self
    }

    pub fn with_rows(mut self, rows: RowPair) -> Self {
        self.rows = rows;
        self
    }

    pub fn with_phase_form(mut self, form: PhaseForm) -> Self {
        self.phase_form = form;
        self
    }

    pub fn with_image(mut self, image: ImageModel) -> Self {
        self.image = image;
        self
    }

    pub fn with_max_cir(mut self, max_cir: f64) -> Self {
        self.max_cir = max_cir;
        self
    }
}

/// Window, FFT, triplet selection, frequency, phasors, amplitude and phase
/// in one reusable object.
#[derive(Debug, Clone)]
pub struct Estimator {
    config: EstimatorConfig,
    dft: WindowedDft,
}

impl Estimator {
    pub fn new(config: EstimatorConfig) -> Result<Self> {
        if config.order < 2 {
            return Err(Error::InvalidOrder(config.order));
        }
        if !(config.fs > 0.0) {
            return Err(Error::Config(format!("sampling rate must be positive, got {}", config.fs)));
        }
        let spec = WindowSpec::new(config.order, config.len)?;
        Ok(Self {
            config,
            dft: WindowedDft::new(&spec),
        })
    }

    pub fn config(&self) -> &EstimatorConfig {
        &self.config
    }

    pub fn dft(&self) -> &WindowedDft {
        &self.dft
    }

    pub fn estimate(&self, x: &[f64]) -> Result<Estimate> {
        let spectrum = self.dft.transform(x)?;
        let t = select_triplet(&spectrum, self.config.order, self.config.max_cir)?;
        self.estimate_triplet(&t)
    }

    pub fn estimate_triplet(&self, t: &SpectrumTriplet) -> Result<Estimate> {
        if t.bins.iter().all(|b| b.norm_sqr() == 0.0) {
            return Err(Error::NoSignal);
        }
        let lambda = match self.config.frequency {
            FrequencyMode::Known(l) => l,
            FrequencyMode::Estimate => estimate_frequency(t)?,
        };
        let (phasors, lambda, perturbed) = self.phasors(t, lambda)?;
        Ok(Estimate {
            lambda,
            amplitude: phasors.amplitude(),
            phase: phasors.phase(self.config.phase_form),
            frequency: lambda * self.config.fs / self.config.len as f64,
            k: t.k,
            perturbed,
        })
    }

    fn phasors(&self, t: &SpectrumTriplet, lambda: f64) -> Result<(Phasors, f64, bool)> {
        let solve = |l: f64| match self.config.image {
            ImageModel::Cancelled => solve_phasors(t, l, self.config.rows),
            ImageModel::Ignored => solve_without_image(t, l),
        };
        match solve(lambda) {
            Ok(p) => Ok((p, lambda, false)),
            Err(Error::Degenerate { .. }) => {
                let nudged = lambda + 1e-9;
                Ok((solve(nudged)?, nudged, true))
            }
            Err(e) => Err(e),
        }
    }
}

/// One-shot estimation on a record with default settings.
pub fn estimate_all(x: &[f64], order: usize, fs: f64) -> Result<Estimate> {
    Estimator::new(EstimatorConfig::new(order, x.len(), fs))?.estimate(x)
}
