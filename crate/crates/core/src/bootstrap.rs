//! Percentile bootstrap intervals for R² and L².
//!
//! Each replicate resamples whole rows with replacement and reruns the full
//! pipeline: model fit, censoring weights, measures. Replicate `b` draws from
//! its own counter-based stream, so results do not depend on evaluation
//! order or thread count.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::models::PredictionKind;
use crate::pipeline::{evaluate, Dataset, Predictor, WeightScheme};
use crate::rng::stream;

/// Largest tolerated share of failed replicates.
pub const MAX_FAILURE_FRACTION: f64 = 0.10;

#[derive(Debug, Clone, Copy)]
pub struct BootstrapConfig {
    pub replicates: usize,
    pub level: f64,
    pub seed: u64,
    pub execution: Execution,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            replicates: 1000,
            level: 0.95,
            seed: 0,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    pub point: (f64, f64),
    /// Successful replicates in replicate order, `(r2, l2)`.
    pub replicates: Vec<(f64, f64)>,
    pub ci_r2: (f64, f64),
    pub ci_l2: (f64, f64),
    pub level: f64,
    pub seed: u64,
    pub failures: usize,
}

impl BootstrapResult {
    /// Sample standard deviation of the R² replicates.
    pub fn sd_r2(&self) -> f64 {
        sample_sd(self.replicates.iter().map(|r| r.0))
    }

    pub fn sd_l2(&self) -> f64 {
        sample_sd(self.replicates.iter().map(|r| r.1))
    }
}

fn sample_sd(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let n = values.clone().count();
    if n < 2 {
        return 0.0;
    }
    let mean = values.clone().sum::<f64>() / n as f64;
    (values.map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// `(lo, hi)` percentile interval at `level`.
pub fn percentile_interval(values: &[f64], level: f64) -> (f64, f64) {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let alpha = 1.0 - level;
    (quantile(&v, alpha / 2.0), quantile(&v, 1.0 - alpha / 2.0))
}

pub fn bootstrap_accuracy(
    data: &Dataset,
    predictor: &Predictor,
    kind: PredictionKind,
    scheme: WeightScheme,
    config: &BootstrapConfig,
) -> Result<BootstrapResult> {
    if config.replicates == 0 {
        return Err(Error::InvalidArgument("bootstrap needs at least one replicate".into()));
    }
    if !(config.level > 0.0 && config.level < 1.0) {
        return Err(Error::InvalidArgument(format!("level {} not in (0, 1)", config.level)));
    }
    let point = evaluate(data, predictor, kind, scheme)?.report;
    let n = data.len();

    let outcomes = map_indexed(config.execution, config.replicates, |b| {
        let mut rng = stream(config.seed, &[b as u64]);
        let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
        let resampled = data.select(&idx)?;
        let pred = match predictor {
            Predictor::External(m) => Predictor::External(m.select(&idx)),
            model => model.clone(),
        };
        evaluate(&resampled, &pred, kind, scheme).map(|e| (e.report.r2, e.report.l2))
    });

    let mut replicates = Vec::with_capacity(config.replicates);
    let mut failures = 0;
    for o in outcomes {
        match o {
            Ok(v) => replicates.push(v),
            Err(e) => {
                log::debug!("bootstrap replicate failed: {e}");
                failures += 1;
            }
        }
    }
    if failures as f64 > MAX_FAILURE_FRACTION * config.replicates as f64 || replicates.is_empty() {
        return Err(Error::TooManyFailures {
            failures,
            replicates: config.replicates,
        });
    }
    if failures > 0 {
        log::warn!(
            "{failures} of {} bootstrap replicates failed and were dropped",
            config.replicates
        );
    }
    let r2: Vec<f64> = replicates.iter().map(|r| r.0).collect();
    let l2: Vec<f64> = replicates.iter().map(|r| r.1).collect();
    Ok(BootstrapResult {
        point: (point.r2, point.l2),
        ci_r2: percentile_interval(&r2, config.level),
        ci_l2: percentile_interval(&l2, config.level),
        replicates,
        level: config.level,
        seed: config.seed,
        failures,
    })
}
