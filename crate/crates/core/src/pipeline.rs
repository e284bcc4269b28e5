//! Fit → predict → weight → measure, the path shared by the CLI, the
//! bootstrap and the simulation harness.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{accuracy_censored, accuracy_complete, AccuracyReport};
use crate::models::{FittedModel, ModelSpec, PredictionKind};
use crate::sample::{CensoredSample, CompleteSample, PredictionVector};
use crate::weights::{ipcw_weights, ipcw_weights_covariate, CoxCensoringModel, WeightVector};

/// How `Ĝ` is estimated for the weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightScheme {
    /// Marginal Kaplan–Meier.
    #[default]
    KaplanMeier,
    /// Cox model for the censoring time given the covariates.
    CoxCensoring,
}

/// Source of the raw predictions `m(X_i)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Predictor {
    Model(ModelSpec),
    /// Precomputed predictions, aligned with the sample rows.
    External(PredictionVector),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Dataset {
    Complete(CompleteSample),
    Censored(CensoredSample),
}

impl Dataset {
    pub fn len(&self) -> usize {
        match self {
            Dataset::Complete(s) => s.len(),
            Dataset::Censored(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn select(&self, idx: &[usize]) -> Result<Self> {
        Ok(match self {
            Dataset::Complete(s) => Dataset::Complete(s.select(idx)?),
            Dataset::Censored(s) => Dataset::Censored(s.select(idx)?),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub report: AccuracyReport,
    pub model: Option<FittedModel>,
    pub predictions: PredictionVector,
    /// Rows whose censoring survival had to be clamped.
    pub clamped_weights: usize,
}

pub fn censoring_weights(sample: &CensoredSample, scheme: WeightScheme) -> Result<WeightVector> {
    match scheme {
        WeightScheme::KaplanMeier => ipcw_weights(sample),
        WeightScheme::CoxCensoring => {
            if sample.is_uncensored() {
                return Ok(WeightVector::uniform(sample.len()));
            }
            let g = CoxCensoringModel::fit(sample)?;
            ipcw_weights_covariate(sample, &g)
        }
    }
}

fn predictions(
    sample: &CensoredSample,
    predictor: &Predictor,
    kind: PredictionKind,
) -> Result<(PredictionVector, Option<FittedModel>)> {
    match predictor {
        Predictor::External(m) => {
            if m.len() != sample.len() {
                return Err(Error::LengthMismatch {
                    what: "predictions",
                    expected: sample.len(),
                    found: m.len(),
                });
            }
            Ok((m.clone(), None))
        }
        Predictor::Model(spec) => {
            let fit = spec.fit(sample)?;
            let m = fit.predict(sample.x(), kind)?;
            Ok((m, Some(fit)))
        }
    }
}

pub fn evaluate_censored(
    sample: &CensoredSample,
    predictor: &Predictor,
    kind: PredictionKind,
    scheme: WeightScheme,
) -> Result<Evaluation> {
    let (m, model) = predictions(sample, predictor, kind)?;
    let w = censoring_weights(sample, scheme)?;
    let report = accuracy_censored(sample, &m, &w)?;
    Ok(Evaluation {
        report,
        model,
        predictions: m,
        clamped_weights: w.clamped(),
    })
}

pub fn evaluate_complete(sample: &CompleteSample, predictor: &Predictor, kind: PredictionKind) -> Result<Evaluation> {
    let (m, model) = match predictor {
        Predictor::Model(ModelSpec::Ols) => {
            let fit = crate::models::fit_ols(sample)?;
            (fit.fitted.clone(), Some(FittedModel::Ols(fit)))
        }
        other => predictions(&sample.to_censored(), other, kind)?,
    };
    let report = accuracy_complete(sample, &m)?;
    Ok(Evaluation {
        report,
        model,
        predictions: m,
        clamped_weights: 0,
    })
}

pub fn evaluate(
    data: &Dataset,
    predictor: &Predictor,
    kind: PredictionKind,
    scheme: WeightScheme,
) -> Result<Evaluation> {
    match data {
        Dataset::Complete(s) => evaluate_complete(s, predictor, kind),
        Dataset::Censored(s) => evaluate_censored(s, predictor, kind, scheme),
    }
}
