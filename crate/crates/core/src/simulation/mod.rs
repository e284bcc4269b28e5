//! Simulation designs, censoring calibration, population approximation and
//! the scenario runner that produces `mean(sd)` table cells.
//!
//! Random streams are keyed off the scenario seed:
//!
//! - `[design, rate, n, rep]` for the sample of one replication (shared by
//!   all models, so models are compared on the same data)
//! - `[u64::MAX, design, rate]` for censoring calibration

pub mod calibrate;
pub mod design;
pub mod population;

use serde::{Deserialize, Serialize};

pub use calibrate::{calibrate_censoring, expected_censoring_rate, Calibration, CensoringFamily, CALIBRATION_DRAWS};
pub use design::{cox_weibull_time, extreme_value, AftWeibullDesign, CensoringDesign, CoxWeibullDesign, Design};
pub use population::{approx_population, PopulationConfig, PopulationEstimate};

use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::models::{ModelSpec, PredictionKind, PredictionTarget};
use crate::pipeline::{evaluate_censored, Predictor, WeightScheme};
use crate::rng::stream;
use crate::sample::censoring_rate;
use population::mean_sd;

const CALIBRATION_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CensoringKind {
    #[default]
    None,
    Independent,
    Dependent,
}

/// Censoring mechanism plus the target rates to calibrate to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CensoringPlan {
    #[serde(default)]
    pub kind: CensoringKind,
    #[serde(default)]
    pub rates: Vec<f64>,
    /// Weibull shape of an independent censoring time.
    #[serde(default = "default_shape")]
    pub shape: f64,
    /// Scale of `V` for dependent censoring.
    #[serde(default = "default_theta_c")]
    pub theta_c: f64,
}

fn default_shape() -> f64 {
    1.0
}

fn default_theta_c() -> f64 {
    4.0
}

impl Default for CensoringPlan {
    fn default() -> Self {
        Self {
            kind: CensoringKind::None,
            rates: vec![],
            shape: default_shape(),
            theta_c: default_theta_c(),
        }
    }
}

impl CensoringPlan {
    fn family(&self) -> Option<CensoringFamily> {
        match self.kind {
            CensoringKind::None => None,
            CensoringKind::Independent => Some(CensoringFamily::Independent { shape: self.shape }),
            CensoringKind::Dependent => Some(CensoringFamily::Dependent { theta_c: self.theta_c }),
        }
    }

    /// Target rates; no censoring means a single zero rate.
    pub fn target_rates(&self) -> Vec<f64> {
        if self.kind == CensoringKind::None || self.rates.is_empty() {
            vec![0.0]
        } else {
            self.rates.clone()
        }
    }
}

/// One model column: the model and which conditional summary it predicts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelChoice {
    Plain(ModelSpec),
    WithKind {
        model: ModelSpec,
        #[serde(default = "default_target")]
        predict: PredictionTarget,
    },
}

fn default_target() -> PredictionTarget {
    PredictionTarget::ConditionalMean
}

impl ModelChoice {
    pub fn spec(&self) -> ModelSpec {
        match *self {
            ModelChoice::Plain(m) | ModelChoice::WithKind { model: m, .. } => m,
        }
    }

    pub fn kind(&self) -> PredictionKind {
        match *self {
            ModelChoice::WithKind {
                predict: PredictionTarget::ConditionalMedian,
                ..
            } => PredictionKind::median(),
            _ => PredictionKind::mean(),
        }
    }

    pub fn label(&self) -> String {
        match self.kind().target {
            PredictionTarget::ConditionalMean => self.spec().name().to_string(),
            PredictionTarget::ConditionalMedian => format!("{}(median)", self.spec().name()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    R2,
    L2,
}

impl Measure {
    pub fn name(&self) -> &'static str {
        match self {
            Measure::R2 => "r2",
            Measure::L2 => "l2",
        }
    }
}

fn default_measures() -> Vec<Measure> {
    vec![Measure::R2, Measure::L2]
}

fn default_models() -> Vec<ModelChoice> {
    vec![ModelChoice::Plain(ModelSpec::Cox)]
}

fn default_replications() -> usize {
    1000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DesignList {
    One(Design),
    Many(Vec<Design>),
}

impl DesignList {
    pub fn as_vec(&self) -> Vec<Design> {
        match self {
            DesignList::One(d) => vec![*d],
            DesignList::Many(v) => v.clone(),
        }
    }
}

/// A table: every combination of design × censoring rate × sample size ×
/// model becomes one cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub design: DesignList,
    #[serde(default)]
    pub censoring: CensoringPlan,
    /// Sample sizes; empty means each design's own `n`.
    #[serde(default)]
    pub sample_sizes: Vec<usize>,
    #[serde(default = "default_models")]
    pub models: Vec<ModelChoice>,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub weights: WeightScheme,
    #[serde(default = "default_measures")]
    pub measures: Vec<Measure>,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let designs = self.design.as_vec();
        if designs.is_empty() {
            return Err(Error::InvalidArgument("design: at least one design required".into()));
        }
        for d in &designs {
            d.validate()?;
        }
        if self.replications == 0 {
            return Err(Error::InvalidArgument("replications: must be at least 1".into()));
        }
        if self.models.is_empty() {
            return Err(Error::InvalidArgument("models: at least one model required".into()));
        }
        if self.measures.is_empty() {
            return Err(Error::InvalidArgument("measures: at least one measure required".into()));
        }
        if self.sample_sizes.iter().any(|&n| n < 2)
            || (self.sample_sizes.is_empty() && designs.iter().any(|d| d.n() < 2))
        {
            return Err(Error::InvalidArgument(
                "sample_sizes: every size must be at least 2".into(),
            ));
        }
        for &r in &self.censoring.rates {
            if !(0.0..1.0).contains(&r) {
                return Err(Error::InvalidArgument(format!("censoring.rates: {r} not in [0, 1)")));
            }
        }
        let censored = self.censoring.target_rates().iter().any(|&r| r > 0.0);
        if censored && designs.iter().any(|d| matches!(d, Design::CoxWeibull(_))) {
            return Err(Error::InvalidArgument(
                "censoring: cox_weibull designs are generated without censoring".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioCell {
    pub design: String,
    pub censoring_rate: f64,
    /// Mean realised censoring rate over the cell's replications.
    pub achieved_censoring_rate: f64,
    pub n: usize,
    pub model: String,
    pub r2: Summary,
    pub l2: Summary,
    /// Successful replications.
    pub replications: usize,
    pub failures: usize,
}

impl ScenarioCell {
    pub fn measure(&self, m: Measure) -> Summary {
        match m {
            Measure::R2 => self.r2,
            Measure::L2 => self.l2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub seed: u64,
    pub measures: Vec<Measure>,
    pub cells: Vec<ScenarioCell>,
}

/// Calibrated design for one (design, rate) pair.
fn calibrated(config: &ScenarioConfig, seed: u64, di: usize, ri: usize, design: Design, rate: f64) -> Result<Design> {
    match (design, config.censoring.family()) {
        (Design::AftWeibull(d), Some(family)) => {
            let mut rng = stream(seed, &[CALIBRATION_STREAM, di as u64, ri as u64]);
            Ok(Design::AftWeibull(
                calibrate_censoring(&d, family, rate, &mut rng)?.design,
            ))
        }
        (d, _) => Ok(d.without_censoring()),
    }
}

/// Run every cell of `config`. The seed argument overrides the config seed.
pub fn run_scenario(config: &ScenarioConfig, seed: u64, execution: Execution) -> Result<ScenarioResult> {
    config.validate()?;
    let designs = config.design.as_vec();
    let rates = config.censoring.target_rates();

    // (design index, rate index, calibrated design)
    let mut groups = Vec::new();
    for (di, d) in designs.iter().enumerate() {
        for (ri, &rate) in rates.iter().enumerate() {
            groups.push((di, ri, calibrated(config, seed, di, ri, *d, rate)?));
        }
    }
    // (group, n)
    let mut blocks = Vec::new();
    for (g, (di, _, _)) in groups.iter().enumerate() {
        let sizes = if config.sample_sizes.is_empty() {
            vec![designs[*di].n()]
        } else {
            config.sample_sizes.clone()
        };
        for n in sizes {
            blocks.push((g, n));
        }
    }

    let reps = config.replications;
    // one job per (block, replication); each job evaluates every model
    let jobs = map_indexed(execution, blocks.len() * reps, |j| {
        let (g, n) = blocks[j / reps];
        let rep = j % reps;
        let (di, ri, design) = &groups[g];
        let mut rng = stream(seed, &[*di as u64, *ri as u64, n as u64, rep as u64]);
        let sample = design.with_n(n).generate(&mut rng);
        config
            .models
            .iter()
            .map(|mc| {
                let s = sample.as_ref().map_err(Clone::clone)?;
                let e = evaluate_censored(s, &Predictor::Model(mc.spec()), mc.kind(), config.weights)?;
                Ok((e.report.r2, e.report.l2, censoring_rate(s)))
            })
            .collect::<Vec<Result<(f64, f64, f64)>>>()
    });

    let mut cells = Vec::new();
    for (b, &(g, n)) in blocks.iter().enumerate() {
        let (di, ri, _) = groups[g];
        let runs = &jobs[b * reps..(b + 1) * reps];
        for (mi, mc) in config.models.iter().enumerate() {
            let mut r2 = Vec::with_capacity(reps);
            let mut l2 = Vec::with_capacity(reps);
            let mut cr = Vec::with_capacity(reps);
            let mut failures = 0;
            for run in runs {
                match &run[mi] {
                    Ok((a, l, c)) => {
                        r2.push(*a);
                        l2.push(*l);
                        cr.push(*c);
                    }
                    Err(e) => {
                        log::debug!("replication failed: {e}");
                        failures += 1;
                    }
                }
            }
            let label = designs[di].label();
            if r2.is_empty() {
                return Err(Error::TooManyFailures {
                    failures,
                    replicates: reps,
                });
            }
            if failures > 0 {
                log::warn!(
                    "{label}, n={n}, {}: {failures} of {reps} replications failed",
                    mc.label()
                );
            }
            let (r2m, r2s) = mean_sd(&r2);
            let (l2m, l2s) = mean_sd(&l2);
            cells.push(ScenarioCell {
                design: label,
                censoring_rate: rates[ri],
                achieved_censoring_rate: mean_sd(&cr).0,
                n,
                model: mc.label(),
                r2: Summary { mean: r2m, sd: r2s },
                l2: Summary { mean: l2m, sd: l2s },
                replications: r2.len(),
                failures,
            });
        }
    }
    Ok(ScenarioResult {
        seed,
        measures: config.measures.clone(),
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn aft_config(reps: usize) -> ScenarioConfig {
        ScenarioConfig {
            design: DesignList::One(Design::AftWeibull(AftWeibullDesign {
                beta: 1.0,
                sigma: 0.15,
                n: 50,
                censoring: CensoringDesign::None,
            })),
            censoring: CensoringPlan {
                kind: CensoringKind::Independent,
                rates: vec![0.25],
                ..CensoringPlan::default()
            },
            sample_sizes: vec![50],
            models: vec![
                ModelChoice::Plain(ModelSpec::Cox),
                ModelChoice::Plain(ModelSpec::AftWeibull),
            ],
            replications: reps,
            seed: None,
            weights: WeightScheme::KaplanMeier,
            measures: default_measures(),
        }
    }

    #[test]
    fn single_replication_has_zero_sd() {
        let r = run_scenario(&aft_config(1), 3, Execution::Sequential).unwrap();
        assert_eq!(r.cells.len(), 2);
        for c in &r.cells {
            assert_eq!(c.r2.sd, 0.0);
            assert_eq!(c.l2.sd, 0.0);
            assert_eq!(c.replications + c.failures, 1);
        }
    }

    #[test]
    fn deterministic_across_execution_modes() {
        let cfg = aft_config(8);
        let a = run_scenario(&cfg, 5, Execution::Parallel).unwrap();
        let b = run_scenario(&cfg, 5, Execution::Sequential).unwrap();
        assert_eq!(a, b);
        assert!(a
            .cells
            .iter()
            .all(|c| c.r2.sd >= 0.0 && (0.0..=1.0).contains(&c.r2.mean)));
    }

    #[test]
    fn config_parses_from_json() {
        let json = r#"{
            "design": [{"type": "cox_weibull", "beta": 0.2, "nu": 1.0, "n": 100}],
            "models": ["cox", {"model": "aft-lognormal", "predict": "median"}],
            "replications": 2,
            "seed": 7
        }"#;
        let cfg: ScenarioConfig = serde_json::from_str(json).unwrap();
        assert_eq!(cfg.models[1].label(), "aft-lognormal(median)");
        assert_eq!(cfg.censoring.target_rates(), vec![0.0]);
        cfg.validate().unwrap();
    }

    #[test]
    fn censored_cox_design_rejected() {
        let mut cfg = aft_config(1);
        cfg.design = DesignList::One(Design::CoxWeibull(CoxWeibullDesign {
            beta: 0.2,
            nu: 1.0,
            n: 10,
        }));
        assert!(cfg.validate().is_err());
    }
}
