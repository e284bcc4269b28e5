//! Censoring survival estimation and inverse-probability-of-censoring weights.
//!
//! `Ĝ` is the survival function of the censoring time, `P(C >= t)` evaluated
//! as a left limit. The marginal estimate is a product-limit curve in which
//! censorings are the "events"; at a tied time, rows that failed stay in the
//! risk set for the censorings at that time.
//!
//! Weights are `w_i ∝ δ_i / Ĝ(T_i-)`, normalised to sum to one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::cox::{fit_cox, CoxFit};
use crate::numeric::csum;
use crate::sample::CensoredSample;

/// Right-continuous nonincreasing step function starting at 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepSurvival {
    jump_times: Vec<f64>,
    values: Vec<f64>,
}

impl StepSurvival {
    pub fn new(jump_times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if jump_times.len() != values.len() {
            return Err(Error::LengthMismatch {
                what: "survival values",
                expected: jump_times.len(),
                found: values.len(),
            });
        }
        if jump_times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidArgument("jump times must be strictly increasing".into()));
        }
        let mut prev = 1.0;
        for &v in &values {
            if !(0.0..=prev).contains(&v) {
                return Err(Error::InvalidArgument(
                    "survival values must be nonincreasing in [0, 1]".into(),
                ));
            }
            prev = v;
        }
        Ok(Self { jump_times, values })
    }

    /// The constant function 1.
    pub fn one() -> Self {
        Self {
            jump_times: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn jump_times(&self) -> &[f64] {
        &self.jump_times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `Ĝ(t)`: value at the largest jump time `<= t`, 1 before the first.
    pub fn value_at(&self, t: f64) -> f64 {
        let k = self.jump_times.partition_point(|&s| s <= t);
        if k == 0 {
            1.0
        } else {
            self.values[k - 1]
        }
    }

    /// `Ĝ(t-)`: value at the largest jump time `< t`, 1 if none.
    pub fn left_limit(&self, t: f64) -> f64 {
        let k = self.jump_times.partition_point(|&s| s < t);
        if k == 0 {
            1.0
        } else {
            self.values[k - 1]
        }
    }
}

/// Left-limit free function form of [`StepSurvival::left_limit`].
pub fn left_limit(g: &StepSurvival, t: f64) -> f64 {
    g.left_limit(t)
}

/// Product-limit estimate of the censoring survival function.
pub fn fit_censoring_km(sample: &CensoredSample) -> StepSurvival {
    let t = sample.time();
    let event = sample.event();
    let mut order: Vec<usize> = (0..t.len()).collect();
    order.sort_by(|&a, &b| t[a].total_cmp(&t[b]));

    let mut at_risk = t.len();
    let mut surv = 1.0;
    let mut jump_times = Vec::new();
    let mut values = Vec::new();
    let mut k = 0;
    while k < order.len() {
        let time = t[order[k]];
        let mut end = k;
        let mut censored = 0usize;
        while end < order.len() && t[order[end]] == time {
            censored += usize::from(!event[order[end]]);
            end += 1;
        }
        if censored > 0 {
            surv *= 1.0 - censored as f64 / at_risk as f64;
            jump_times.push(time);
            values.push(surv);
        }
        at_risk -= end - k;
        k = end;
    }
    StepSurvival { jump_times, values }
}

/// A censoring survival estimate that may depend on covariates.
pub trait ConditionalSurvival {
    /// `Ĝ(t- | x)`.
    fn left_limit(&self, t: f64, x: &[f64]) -> f64;
}

impl ConditionalSurvival for StepSurvival {
    fn left_limit(&self, t: f64, _x: &[f64]) -> f64 {
        StepSurvival::left_limit(self, t)
    }
}

/// Cox model for the censoring time (indicators flipped), giving
/// `Ĝ(t- | x) = exp(-Ĥ_c(t-) exp(β_c'(x - x̄)))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoxCensoringModel {
    pub fit: CoxFit,
}

impl CoxCensoringModel {
    /// Fit a Cox model to the censoring times. Fails if nothing is censored.
    pub fn fit(sample: &CensoredSample) -> Result<Self> {
        Ok(Self {
            fit: fit_cox(&sample.flipped())?,
        })
    }
}

impl ConditionalSurvival for CoxCensoringModel {
    fn left_limit(&self, t: f64, x: &[f64]) -> f64 {
        self.fit.survival_left(t, x)
    }
}

/// Normalised inverse-probability-of-censoring weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    w: Vec<f64>,
    /// Uncensored rows whose `Ĝ(T_i-)` was zero and had to be clamped.
    clamped: usize,
}

impl WeightVector {
    /// Arbitrary nonnegative weights, normalised to sum to one.
    pub fn from_raw(raw: Vec<f64>) -> Result<Self> {
        if raw.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidArgument("weights must be finite and nonnegative".into()));
        }
        let total = csum(raw.iter().copied());
        if !(total > 0.0) {
            return Err(Error::DegenerateWeights);
        }
        Ok(Self {
            w: raw.iter().map(|v| v / total).collect(),
            clamped: 0,
        })
    }

    /// `1/n` everywhere.
    pub fn uniform(n: usize) -> Self {
        Self {
            w: vec![1.0 / n as f64; n],
            clamped: 0,
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.w
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn clamped(&self) -> usize {
        self.clamped
    }

    pub fn is_uniform(&self) -> bool {
        self.w.iter().all(|&v| v == self.w[0])
    }
}

impl std::ops::Deref for WeightVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.w
    }
}

/// Weights from the marginal Kaplan–Meier `Ĝ`.
pub fn ipcw_weights(sample: &CensoredSample) -> Result<WeightVector> {
    let g = fit_censoring_km(sample);
    ipcw_weights_covariate(sample, &g)
}

/// Weights from any (possibly covariate-dependent) censoring survival.
pub fn ipcw_weights_covariate<G: ConditionalSurvival + ?Sized>(sample: &CensoredSample, g: &G) -> Result<WeightVector> {
    let n = sample.len();
    if sample.is_uncensored() {
        return Ok(WeightVector::uniform(n));
    }
    let t = sample.time();
    let event = sample.event();
    let mut surv = vec![0.0; n];
    for i in 0..n {
        if event[i] {
            surv[i] = g.left_limit(t[i], sample.x().row(i));
        }
    }
    let floor = surv
        .iter()
        .zip(event)
        .filter(|(s, &e)| e && **s > 0.0)
        .map(|(s, _)| *s)
        .fold(f64::INFINITY, f64::min);
    if !floor.is_finite() {
        return Err(Error::DegenerateWeights);
    }
    let mut clamped = 0;
    let raw: Vec<f64> = surv
        .iter()
        .zip(event)
        .map(|(&s, &e)| {
            if !e {
                0.0
            } else if s > 0.0 {
                1.0 / s
            } else {
                clamped += 1;
                1.0 / floor
            }
        })
        .collect();
    if clamped > 0 {
        log::warn!("{clamped} uncensored rows had zero censoring survival; clamped to {floor:e}");
    }
    let mut w = WeightVector::from_raw(raw)?;
    w.clamped = clamped;
    Ok(w)
}
