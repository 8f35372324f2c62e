//! Windowed DFT, direct DtFT evaluation and three-bin extraction.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::windows::WindowSpec;

/// Three consecutive spectrum values `X_{k-1}, X_k, X_{k+1}` from one record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumTriplet {
    pub k: usize,
    pub bins: [Complex64; 3],
    pub n: usize,
    pub order: usize,
}

impl SpectrumTriplet {
    /// Takes bins `k-1..=k+1` from a full spectrum.
    pub fn at(spectrum: &[Complex64], k: usize, order: usize) -> Result<Self> {
        let n = spectrum.len();
        if n < 3 || k == 0 || k + 1 >= n {
            return Err(Error::BinOutOfRange { k, max: n.saturating_sub(2) });
        }
        Ok(Self {
            k,
            bins: [spectrum[k - 1], spectrum[k], spectrum[k + 1]],
            n,
            order,
        })
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            bins: self.bins.map(|b| b * c),
            ..*self
        }
    }
}

/// Reusable FFT plan bound to a window.
#[derive(Clone)]
pub struct WindowedDft {
    window: Vec<f64>,
    order: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for WindowedDft {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WindowedDft")
            .field("len", &self.window.len())
            .field("order", &self.order)
            .finish()
    }
}

impl WindowedDft {
    pub fn new(spec: &WindowSpec) -> Self {
        let fft = FftPlanner::new().plan_fft_forward(spec.len());
        Self {
            window: spec.samples(),
            order: spec.order(),
            fft,
        }
    }

    pub fn len(&self) -> usize {
        self.window.len()
    }

    pub fn is_empty(&self) -> bool {
        self.window.is_empty()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn window(&self) -> &[f64] {
        &self.window
    }

    pub fn transform(&self, x: &[f64]) -> Result<Vec<Complex64>> {
        if x.len() != self.window.len() {
            return Err(Error::Shape {
                signal: x.len(),
                window: self.window.len(),
            });
        }
        let mut buf: Vec<Complex64> = x
            .iter()
            .zip(&self.window)
            .map(|(s, w)| Complex64::new(s * w, 0.0))
            .collect();
        self.fft.process(&mut buf);
        Ok(buf)
    }

    pub fn triplet(&self, x: &[f64], k: usize) -> Result<SpectrumTriplet> {
        SpectrumTriplet::at(&self.transform(x)?, k, self.order)
    }
}

/// `X_k = Σ x_n w_n e^(-j2πnk/N)` for all `k`, computed by FFT.
pub fn windowed_dft(x: &[f64], w: &[f64]) -> Result<Vec<Complex64>> {
    if x.len() != w.len() {
        return Err(Error::Shape {
            signal: x.len(),
            window: w.len(),
        });
    }
    let mut buf: Vec<Complex64> = x
        .iter()
        .zip(w)
        .map(|(s, w)| Complex64::new(s * w, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(x.len()).process(&mut buf);
    Ok(buf)
}

/// Direct-sum DtFT of the windowed record at a real frequency `λ` in bins.
pub fn dtft_at(x: &[f64], w: &[f64], lambda: f64) -> Result<Complex64> {
    if x.len() != w.len() {
        return Err(Error::Shape {
            signal: x.len(),
            window: w.len(),
        });
    }
    let n = x.len() as f64;
    Ok(x.iter()
        .zip(w)
        .enumerate()
        .map(|(i, (s, w))| {
            // reduce the phase index modulo N so large records keep full accuracy
            let arg = (lambda * i as f64).rem_euclid(n);
            Complex64::from_polar(s * w, -2.0 * PI * arg / n)
        })
        .sum())
}

/// Picks the bin of the spectral peak (searching `1..=N/2-1`), forced to
/// `k = 1` when the caller guarantees fewer than two cycles in the record.
pub fn select_triplet(
    spectrum: &[Complex64],
    order: usize,
    expected_cir_max: f64,
) -> Result<SpectrumTriplet> {
    let n = spectrum.len();
    if n < 4 {
        return Err(Error::BinOutOfRange { k: 1, max: n.saturating_sub(2) });
    }
    if spectrum.iter().all(|x| x.norm_sqr() == 0.0) {
        return Err(Error::NoSignal);
    }
    let k = if expected_cir_max < 2.0 {
        1
    } else {
        (1..n / 2)
            .max_by(|&a, &b| spectrum[a].norm_sqr().total_cmp(&spectrum[b].norm_sqr()))
            .unwrap_or(1)
    };
    SpectrumTriplet::at(spectrum, k, order)
}
