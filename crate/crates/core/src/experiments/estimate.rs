use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::estimator::{Estimate, Estimator, EstimatorConfig};
use crate::persistence::{read_samples, Table};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateOutcome {
    pub n: usize,
    pub fs: f64,
    pub estimate: Estimate,
}

impl EstimateOutcome {
    pub fn table(&self) -> Table {
        let e = &self.estimate;
        let mut t = Table::new(["n", "fs", "k", "lambda", "frequency", "amplitude", "phase", "perturbed"]);
        t.push(vec![
            self.n.into(),
            self.fs.into(),
            e.k.into(),
            e.lambda.into(),
            e.frequency.into(),
            e.amplitude.into(),
            e.phase.into(),
            e.perturbed.into(),
        ]);
        t
    }
}

fn largest_power_of_two(n: usize) -> usize {
    if n == 0 { 0 } else { 1 << (usize::BITS - 1 - n.leading_zeros()) }
}

/// Estimates the dominant tone in the last `n` samples of a stored record.
/// The phase refers to the first sample of that window.
pub fn run_estimate(cfg: &ExperimentConfig) -> Result<EstimateOutcome> {
    let path = cfg
        .estimate
        .input
        .as_deref()
        .ok_or_else(|| Error::Config("estimate needs an input record".into()))?;
    let rec = read_samples(path)?;
    let n = cfg.estimate.n.unwrap_or_else(|| largest_power_of_two(rec.samples.len()));
    if n > rec.samples.len() {
        return Err(Error::Config(format!("window of {n} samples exceeds record of {}", rec.samples.len())));
    }
    let est = Estimator::new(
        EstimatorConfig::new(cfg.window.order, n, rec.fs).with_max_cir(cfg.estimate.max_cir),
    )?;
    let estimate = est.estimate(&rec.samples[rec.samples.len() - n..])?;
    Ok(EstimateOutcome { n, fs: rec.fs, estimate })
}
