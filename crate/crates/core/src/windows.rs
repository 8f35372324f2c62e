//! Maximum-decay-sidelobes cosine windows and their analytic spectrum model.
//!
//! A window of order `H` is `w_n = Σ_h (-1)^h a_h cos(2πnh/N)` with binomial
//! coefficients. For `λ ≪ N` its DtFT is well approximated by
//! `W(λ) = D(λ) / P(λ)` where
//!
//! ```text
//! D(λ) = N (2H-2)! / (π 2^(2H-2)) · sin(πλ) · e^(-jπλ)
//! P(λ) = λ · Π_{h=1}^{H-1} (h² - λ²)
//! ```

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Window order and record length together with the generated coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSpec {
    order: usize,
    len: usize,
    coeffs: Vec<f64>,
}

impl WindowSpec {
    pub fn new(order: usize, len: usize) -> Result<Self> {
        let coeffs = window_coefficients(order)?;
        let min = (2 * order).max(2);
        if len < min {
            return Err(Error::RecordTooShort { n: len, h: order, min });
        }
        Ok(Self { order, len, coeffs })
    }

    /// Hanning window (order 2).
    pub fn hanning(len: usize) -> Result<Self> {
        Self::new(2, len)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn samples(&self) -> Vec<f64> {
        window_samples(self)
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Coefficients `a_0..a_{H-1}` of the maximum-decay-sidelobes window of order `h`.
pub fn window_coefficients(h: usize) -> Result<Vec<f64>> {
    if h == 0 {
        return Err(Error::InvalidOrder(h));
    }
    if h == 1 {
        return Ok(vec![1.0]);
    }
    let m = 2 * h - 2;
    let scale = 2f64.powi(m as i32);
    let mut a = Vec::with_capacity(h);
    a.push(binomial(m, h - 1) / scale);
    for k in 1..h {
        a.push(2.0 * binomial(m, h - 1 - k) / scale);
    }
    Ok(a)
}

pub fn window_samples(spec: &WindowSpec) -> Vec<f64> {
    let n = spec.len as f64;
    (0..spec.len)
        .map(|i| {
            spec.coeffs
                .iter()
                .enumerate()
                .map(|(h, a)| {
                    let sign = if h % 2 == 0 { 1.0 } else { -1.0 };
                    sign * a * (2.0 * PI * (i * h) as f64 / n).cos()
                })
                .sum()
        })
        .collect()
}

/// `P(λ) = λ · Π_{h=1}^{H-1} (h² - λ²)`.
pub fn poly_p(h: usize, lambda: f64) -> f64 {
    (1..h).fold(lambda, |acc, k| {
        let k = k as f64;
        acc * (k * k - lambda * lambda)
    })
}

/// The constant `N (2H-2)! / (π 2^(2H-2))` in front of `D`.
pub fn model_scale(h: usize, n: usize) -> f64 {
    let m = 2 * h.max(1) - 2;
    let fact: f64 = (1..=m).map(|k| k as f64).product();
    n as f64 * fact / (PI * 2f64.powi(m as i32))
}

/// Splits `x` into its nearest integer and the remainder, returning
/// `(m, δ, (-1)^m)`.
fn split(x: f64) -> (f64, f64, f64) {
    let m = x.round();
    let parity = if (m.abs() as u64).is_multiple_of(2) { 1.0 } else { -1.0 };
    (m, x - m, parity)
}

/// `e^(-jπx)` evaluated through the reduced argument for accuracy.
fn half_turn(x: f64) -> Complex64 {
    let (_, d, parity) = split(x);
    Complex64::from_polar(parity, -PI * d)
}

/// `D(λ) = N (2H-2)! / (π 2^(2H-2)) · sin(πλ) · e^(-jπλ)`.
pub fn dirichlet_d(h: usize, n: usize, lambda: f64) -> Complex64 {
    let (_, d, parity) = split(lambda);
    half_turn(lambda) * (model_scale(h, n) * parity * (PI * d).sin())
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Real part of the model with its linear phase removed:
/// `K(λ) = W(λ) e^(jπλ) = scale · sin(πλ) / P(λ)`.
///
/// Near an integer `m` with `|m| < H` the zero of `sin(πλ)` and the matching
/// factor of `P` are cancelled analytically, so the result is smooth through
/// the removable singularities.
pub fn kernel(h: usize, n: usize, lambda: f64) -> f64 {
    let scale = model_scale(h, n);
    let (m, d, parity) = split(lambda);
    let order = h as f64;
    if m.abs() >= order {
        return scale * parity * (PI * d).sin() / poly_p(h, lambda);
    }
    let mi = m.abs() as usize;
    let x2 = lambda * lambda;
    let mut rest: f64 = (1..h)
        .filter(|&k| k != mi)
        .map(|k| (k * k) as f64 - x2)
        .product();
    if mi != 0 {
        rest *= lambda;
        rest *= if m > 0.0 { -(lambda + m) } else { -m - lambda };
    }
    scale * parity * PI * sinc(PI * d) / rest
}

/// Analytic spectrum model `W(λ) = D(λ) / P(λ)` with finite limits at the
/// shared zeros of numerator and denominator.
pub fn window_spectrum_model(h: usize, n: usize, lambda: f64) -> Complex64 {
    half_turn(lambda) * kernel(h, n, lambda)
}
