use std::f64::consts::PI;

use crate::config::{build_filter, ExperimentConfig, FilterKind};
use crate::error::Result;
use crate::estimator::{Estimator, EstimatorConfig, FrequencyMode};
use crate::metrics::{phase_grid, worst_phase_sweep};
use crate::persistence::Table;
use crate::prefilter::{apply_fir, FirFilter};

use super::{combine, filter_label, LOW_BAND};

/// Worst-phase errors for one record length, harmonic set and prefilter.
#[derive(Debug, Clone, PartialEq)]
pub struct TableCell {
    pub n: usize,
    pub cir: f64,
    pub filter: FilterKind,
    pub harmonics: Vec<u32>,
    /// Percent.
    pub amplitude_pct: f64,
    /// Radians.
    pub phase: f64,
}

impl TableCell {
    pub fn harmonics_label(&self) -> String {
        self.harmonics.iter().map(u32::to_string).collect::<Vec<_>>().join("+")
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TablesResult {
    pub cells: Vec<TableCell>,
}

impl TablesResult {
    pub fn get(&self, n: usize, filter: FilterKind, harmonics: &[u32]) -> Option<&TableCell> {
        self.cells
            .iter()
            .find(|c| c.n == n && c.filter == filter && c.harmonics == harmonics)
    }

    fn render(&self, value: &str, pick: fn(&TableCell) -> f64) -> Table {
        let mut t = Table::new(["n", "cir", "filter", "harmonics", value]);
        for c in &self.cells {
            t.push(vec![
                c.n.into(),
                c.cir.into(),
                filter_label(c.filter).into(),
                c.harmonics_label().into(),
                pick(c).into(),
            ]);
        }
        t
    }

    /// Amplitude errors in percent.
    pub fn amplitude_table(&self) -> Table {
        self.render("err_amplitude_pct", |c| c.amplitude_pct)
    }

    /// Phase errors in radians.
    pub fn phase_table(&self) -> Table {
        self.render("err_phase", |c| c.phase)
    }
}

/// Records of `n` samples starting at `t = 0`: the fundamental's sine and
/// cosine parts and, per harmonic set, the harmonics summed. With a filter
/// the record is extended by its order and the delay-compensated output is
/// cut back to `n` samples starting at `t = 0`.
struct Bases {
    s: Vec<f64>,
    c: Vec<f64>,
    sets: Vec<Vec<f64>>,
}

fn bases(cfg: &ExperimentConfig, n: usize, filter: Option<&FirFilter>) -> Result<Bases> {
    let tc = &cfg.tables;
    let delay = filter.map_or(0, |f| f.order() / 2);
    let len = n + filter.map_or(0, |f| f.order());
    let time = |i: usize| (i as f64 - delay as f64) / tc.fs;
    let tone = |f: f64, cosine: bool| -> Vec<f64> {
        (0..len)
            .map(|i| {
                let arg = 2.0 * PI * f * time(i);
                if cosine { arg.cos() } else { arg.sin() }
            })
            .collect()
    };
    let cut = |x: Vec<f64>| -> Result<Vec<f64>> {
        Ok(match filter {
            Some(f) => apply_fir(f, &x)?.steady()[..n].to_vec(),
            None => x,
        })
    };
    let s = cut(tone(tc.f1, false))?;
    let c = cut(tone(tc.f1, true))?;
    let mut sets = Vec::with_capacity(tc.harmonic_sets.len());
    for set in &tc.harmonic_sets {
        let mut h = vec![0.0; len];
        for &i in set {
            for (acc, v) in h.iter_mut().zip(tone(i as f64 * tc.f1, false)) {
                *acc += tc.ratio * v;
            }
        }
        sets.push(cut(h)?);
    }
    Ok(Bases { s, c, sets })
}

/// Fundamental of unit amplitude and swept phase plus harmonics of relative
/// amplitude `ratio` and zero phase, frequency known, optionally prefiltered.
pub fn run_tables(cfg: &ExperimentConfig) -> Result<TablesResult> {
    let tc = &cfg.tables;
    let grid = phase_grid(tc.phase_step);
    let mut cells = Vec::new();
    for &kind in &tc.filters {
        let filter = build_filter(kind, cfg.prefilter.path.as_deref(), tc.fs)?;
        for &n in &tc.n {
            let cir = tc.f1 * n as f64 / tc.fs;
            let est = Estimator::new(
                EstimatorConfig::new(cfg.window.order, n, tc.fs)
                    .with_frequency(FrequencyMode::Known(cir))
                    .with_max_cir(LOW_BAND),
            )?;
            let b = bases(cfg, n, filter.as_ref())?;
            for (set, h) in tc.harmonic_sets.iter().zip(&b.sets) {
                let w = worst_phase_sweep(&grid, 1.0, cir, |phi| {
                    let e = est.estimate(&combine(phi, &b.s, &b.c, Some(h)))?;
                    Ok((e.amplitude, e.phase, e.lambda))
                })?;
                cells.push(TableCell {
                    n,
                    cir,
                    filter: kind,
                    harmonics: set.clone(),
                    amplitude_pct: 100.0 * w.amplitude,
                    phase: w.phase,
                });
            }
        }
    }
    Ok(TablesResult { cells })
}
