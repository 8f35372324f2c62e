use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::estimator::{Estimator, EstimatorConfig, FrequencyMode};
use crate::metrics::{loglog_slope, phase_grid, worst_phase_sweep, WorstCase};
use crate::persistence::Table;

use super::{combine, quadrature, LOW_BAND};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fig1Point {
    pub cir: f64,
    pub n: usize,
    pub worst: WorstCase,
}

/// Worst-phase systematic error of noiseless tones over record length and
/// cycles in range, with the frequency known.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Fig1Result {
    pub points: Vec<Fig1Point>,
}

impl Fig1Result {
    fn series(&self, cir: f64) -> impl Iterator<Item = &Fig1Point> {
        self.points.iter().filter(move |p| (p.cir - cir).abs() < 1e-9)
    }

    /// Log-log slope of the amplitude and phase errors against `N` at `cir`.
    pub fn slopes(&self, cir: f64) -> (Option<f64>, Option<f64>) {
        let pts: Vec<&Fig1Point> = self.series(cir).collect();
        let n: Vec<f64> = pts.iter().map(|p| p.n as f64).collect();
        let a: Vec<f64> = pts.iter().map(|p| p.worst.amplitude).collect();
        let ph: Vec<f64> = pts.iter().map(|p| p.worst.phase).collect();
        (loglog_slope(&n, &a), loglog_slope(&n, &ph))
    }

    /// Cycles in range minimising the amplitude and the phase error at `n`.
    pub fn argmin_cir(&self, n: usize) -> Option<(f64, f64)> {
        let pts: Vec<&Fig1Point> = self.points.iter().filter(|p| p.n == n).collect();
        let best = |key: fn(&WorstCase) -> f64| {
            pts.iter()
                .min_by(|a, b| key(&a.worst).total_cmp(&key(&b.worst)))
                .map(|p| p.cir)
        };
        Some((best(|w| w.amplitude)?, best(|w| w.phase)?))
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(["cir", "n", "err_amplitude", "err_phase"]);
        for p in &self.points {
            t.push(vec![p.cir.into(), p.n.into(), p.worst.amplitude.into(), p.worst.phase.into()]);
        }
        t
    }
}

/// Worst error over the phase grid for one record length and frequency.
pub fn worst_at(order: usize, n: usize, cir: f64, phase_step: f64) -> Result<WorstCase> {
    let est = Estimator::new(
        EstimatorConfig::new(order, n, 1.0)
            .with_frequency(FrequencyMode::Known(cir))
            .with_max_cir(LOW_BAND),
    )?;
    let (s, c) = quadrature(cir, n);
    worst_phase_sweep(&phase_grid(phase_step), 1.0, cir, |phi| {
        let e = est.estimate(&combine(phi, &s, &c, None))?;
        Ok((e.amplitude, e.phase, e.lambda))
    })
}

pub fn run_fig1(cfg: &ExperimentConfig) -> Result<Fig1Result> {
    let grid: Vec<(f64, usize)> = cfg
        .sweep
        .cir
        .iter()
        .flat_map(|&c| cfg.sweep.n.iter().map(move |&n| (c, n)))
        .collect();
    let points = crate::par::map(&grid, |&(cir, n)| {
        worst_at(cfg.window.order, n, cir, cfg.sweep.phase_step).map(|worst| Fig1Point { cir, n, worst })
    });
    Ok(Fig1Result { points: points.into_iter().collect::<Result<_>>()? })
}
