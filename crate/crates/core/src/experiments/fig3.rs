use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::estimator::{Estimator, EstimatorConfig, FrequencyMode};
use crate::metrics::{crb_amplitude, crb_phase, crb_phase_known_frequency, phase_error, phase_grid};
use crate::persistence::Table;
use crate::signalgen::{gaussian_noise, sigma_for_snr};

use super::{combine, quadrature, LOW_BAND};

/// Noise study at one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fig3Point {
    pub cir: f64,
    pub snr_db: f64,
    pub sigma: f64,
    pub emse_amplitude: f64,
    /// Standard error of `emse_amplitude`.
    pub se_amplitude: f64,
    pub crb_amplitude: f64,
    pub emse_phase: f64,
    pub se_phase: f64,
    /// Known-frequency phase bound.
    pub crb_phase: f64,
    /// Phase bound with the frequency estimated jointly.
    pub crb_phase_joint: f64,
}

impl Fig3Point {
    pub fn ratio_amplitude(&self) -> f64 {
        (self.emse_amplitude / self.crb_amplitude).sqrt()
    }

    pub fn ratio_phase(&self) -> f64 {
        (self.emse_phase / self.crb_phase).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Fig3Result {
    pub n: usize,
    pub realizations: usize,
    pub points: Vec<Fig3Point>,
}

impl Fig3Result {
    pub fn at_cir(&self, cir: f64) -> impl Iterator<Item = &Fig3Point> {
        self.points.iter().filter(move |p| (p.cir - cir).abs() < 1e-9)
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new([
            "cir",
            "snr_db",
            "sigma",
            "rmse_amplitude",
            "sqrt_crb_amplitude",
            "ratio_amplitude",
            "rmse_phase",
            "sqrt_crb_phase",
            "ratio_phase",
            "sqrt_crb_phase_joint",
        ]);
        for p in &self.points {
            t.push(vec![
                p.cir.into(),
                p.snr_db.into(),
                p.sigma.into(),
                p.emse_amplitude.sqrt().into(),
                p.crb_amplitude.sqrt().into(),
                p.ratio_amplitude().into(),
                p.emse_phase.sqrt().into(),
                p.crb_phase.sqrt().into(),
                p.ratio_phase().into(),
                p.crb_phase_joint.sqrt().into(),
            ]);
        }
        t
    }
}

/// Mean and standard error of the mean.
fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, (var / n).sqrt())
}

/// Realization `r` uses phase `(r mod 629) · 0.01` and noise seed `seed + r`,
/// with the frequency known to the estimator.
pub fn run_fig3(cfg: &ExperimentConfig, seed: u64) -> Result<Fig3Result> {
    let nc = &cfg.noise;
    let n = nc.n;
    let a = nc.amplitude;
    let phases = phase_grid(0.01);
    let mut points = Vec::new();
    for &cir in &nc.cir {
        let est = Estimator::new(
            EstimatorConfig::new(cfg.window.order, n, 1.0)
                .with_frequency(FrequencyMode::Known(cir))
                .with_max_cir(LOW_BAND),
        )?;
        let (s, c) = quadrature(cir, n);
        for &snr in &nc.snr_db {
            let sigma = sigma_for_snr(a, snr);
            let sq = crate::par::map_range(nc.realizations, |r| {
                let phi = phases[r % phases.len()];
                let noise = gaussian_noise(seed.wrapping_add(r as u64), n, sigma);
                let x: Vec<f64> = combine(phi, &s, &c, None)
                    .iter()
                    .zip(&noise)
                    .map(|(v, e)| a * v + e)
                    .collect();
                est.estimate(&x).map(|e| ((e.amplitude - a).powi(2), phase_error(e.phase, phi).powi(2)))
            });
            let sq: Vec<(f64, f64)> = sq.into_iter().collect::<Result<_>>()?;
            let (ea, sa) = mean_se(&sq.iter().map(|p| p.0).collect::<Vec<_>>());
            let (ep, sp) = mean_se(&sq.iter().map(|p| p.1).collect::<Vec<_>>());
            points.push(Fig3Point {
                cir,
                snr_db: snr,
                sigma,
                emse_amplitude: ea,
                se_amplitude: sa,
                crb_amplitude: crb_amplitude(sigma, n),
                emse_phase: ep,
                se_phase: sp,
                crb_phase: crb_phase_known_frequency(sigma, a, n),
                crb_phase_joint: crb_phase(sigma, a, n),
            });
        }
    }
    Ok(Fig3Result { n, realizations: nc.realizations, points })
}
