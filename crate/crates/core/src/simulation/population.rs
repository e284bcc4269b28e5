//! Monte Carlo approximation of population ρ² and λ²: the average sample
//! R² and L² over large uncensored samples.

use serde::{Deserialize, Serialize};

use super::design::Design;
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::models::{ModelSpec, PredictionKind};
use crate::pipeline::{evaluate_censored, Predictor, WeightScheme};
use crate::rng::stream;

#[derive(Debug, Clone, Copy)]
pub struct PopulationConfig {
    pub mc_reps: usize,
    pub mc_n: usize,
    pub seed: u64,
    pub execution: Execution,
}

impl Default for PopulationConfig {
    fn default() -> Self {
        Self {
            mc_reps: 100,
            mc_n: 5000,
            seed: 0,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationEstimate {
    pub rho2: f64,
    pub lambda2: f64,
    /// Successful replicates.
    pub mc_reps: usize,
    pub mc_n: usize,
    /// Monte Carlo standard error of `rho2`.
    pub standard_error: f64,
    pub lambda2_standard_error: f64,
    pub failures: usize,
}

/// Mean and sample standard deviation (`n - 1` divisor, 0 for one value).
pub(crate) fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Average R² and L² of `model` over `mc_reps` uncensored samples of size
/// `mc_n`. Censoring in `design` is ignored. Replicate `r` uses stream
/// `[r]` of the seed.
pub fn approx_population(
    design: &Design,
    model: ModelSpec,
    kind: PredictionKind,
    config: &PopulationConfig,
) -> Result<PopulationEstimate> {
    if config.mc_reps == 0 || config.mc_n < 2 {
        return Err(Error::InvalidArgument(
            "population run needs mc_reps ≥ 1 and mc_n ≥ 2".into(),
        ));
    }
    let design = design.with_n(config.mc_n).without_censoring();
    design.validate()?;
    let predictor = Predictor::Model(model);

    let outcomes = map_indexed(config.execution, config.mc_reps, |r| {
        let sample = design.generate(&mut stream(config.seed, &[r as u64]))?;
        evaluate_censored(&sample, &predictor, kind, WeightScheme::KaplanMeier).map(|e| (e.report.r2, e.report.l2))
    });

    let mut r2 = Vec::with_capacity(config.mc_reps);
    let mut l2 = Vec::with_capacity(config.mc_reps);
    let mut failures = 0;
    for o in outcomes {
        match o {
            Ok((a, b)) => {
                r2.push(a);
                l2.push(b);
            }
            Err(e) => {
                log::debug!("population replicate failed: {e}");
                failures += 1;
            }
        }
    }
    if r2.is_empty() {
        return Err(Error::TooManyFailures {
            failures,
            replicates: config.mc_reps,
        });
    }
    if failures > 0 {
        log::warn!(
            "{failures} of {} population replicates failed and were dropped",
            config.mc_reps
        );
    }
    let (rho2, sd_r) = mean_sd(&r2);
    let (lambda2, sd_l) = mean_sd(&l2);
    let k = (r2.len() as f64).sqrt();
    Ok(PopulationEstimate {
        rho2,
        lambda2,
        mc_reps: r2.len(),
        mc_n: config.mc_n,
        standard_error: sd_r / k,
        lambda2_standard_error: sd_l / k,
        failures,
    })
}
