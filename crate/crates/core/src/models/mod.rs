//! Model fitters and the prediction functions `m(x)` they induce.

pub mod aft;
pub mod cox;
pub mod ols;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sample::{CensoredSample, Covariates, PredictionVector};

pub use aft::{aft_predict, fit_aft, AftDistribution, AftFit};
pub use cox::{breslow_baseline, cox_predict, fit_cox, CoxFit, CumulativeHazard};
pub use ols::{fit_ols, fit_wls, OlsFit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictionTarget {
    #[serde(alias = "mean")]
    ConditionalMean,
    #[serde(alias = "median")]
    ConditionalMedian,
}

/// Upper integration limit for means computed from step baselines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HorizonPolicy {
    /// Largest observed event time.
    LargestEventTime,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictionKind {
    pub target: PredictionTarget,
    pub horizon: HorizonPolicy,
}

impl PredictionKind {
    pub fn mean() -> Self {
        Self {
            target: PredictionTarget::ConditionalMean,
            horizon: HorizonPolicy::LargestEventTime,
        }
    }

    pub fn median() -> Self {
        Self {
            target: PredictionTarget::ConditionalMedian,
            horizon: HorizonPolicy::LargestEventTime,
        }
    }
}

impl Default for PredictionKind {
    fn default() -> Self {
        Self::mean()
    }
}

/// Which model to fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelSpec {
    Ols,
    Cox,
    AftLognormal,
    AftWeibull,
}

impl ModelSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::Ols => "ols",
            ModelSpec::Cox => "cox",
            ModelSpec::AftLognormal => "aft-lognormal",
            ModelSpec::AftWeibull => "aft-weibull",
        }
    }

    /// Fit to a censored sample. OLS ignores the indicators, so it is only
    /// accepted when there is no censoring.
    pub fn fit(&self, sample: &CensoredSample) -> Result<FittedModel> {
        Ok(match self {
            ModelSpec::Ols => {
                if !sample.is_uncensored() {
                    return Err(Error::InvalidArgument("ols cannot be fitted to censored data".into()));
                }
                let complete = crate::sample::CompleteSample::new(sample.time().to_vec(), sample.x().clone())?;
                FittedModel::Ols(fit_ols(&complete)?)
            }
            ModelSpec::Cox => FittedModel::Cox(fit_cox(sample)?),
            ModelSpec::AftLognormal => FittedModel::Aft(fit_aft(sample, AftDistribution::Lognormal)?),
            ModelSpec::AftWeibull => FittedModel::Aft(fit_aft(sample, AftDistribution::Weibull)?),
        })
    }
}

impl std::str::FromStr for ModelSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ols" => Ok(ModelSpec::Ols),
            "cox" => Ok(ModelSpec::Cox),
            "aft-lognormal" | "lognormal" => Ok(ModelSpec::AftLognormal),
            "aft-weibull" | "weibull" => Ok(ModelSpec::AftWeibull),
            other => Err(Error::InvalidArgument(format!("unknown model `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum FittedModel {
    Ols(OlsFit),
    Cox(CoxFit),
    Aft(AftFit),
}

impl FittedModel {
    /// Predictions for new rows. OLS always predicts the fitted mean.
    pub fn predict(&self, x: &Covariates, kind: PredictionKind) -> Result<PredictionVector> {
        match self {
            FittedModel::Ols(f) => f.predict(x),
            FittedModel::Cox(f) => cox_predict(f, x, kind),
            FittedModel::Aft(f) => aft_predict(f, x, kind),
        }
    }

    pub fn converged(&self) -> bool {
        match self {
            FittedModel::Ols(_) => true,
            FittedModel::Cox(f) => f.converged,
            FittedModel::Aft(f) => f.converged,
        }
    }
}
