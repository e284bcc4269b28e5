//! Paired prediction-accuracy measures (R² and L²) for arbitrary prediction
//! functions on complete and right-censored data.
//!
//! The crate is organised bottom-up:
//!
//! - [`sample`]: validated complete and censored samples, prediction vectors
//! - [`weights`]: Kaplan–Meier censoring survival and inverse-probability-of-
//!   censoring weights, plus a covariate-dependent (Cox) variant
//! - [`measures`]: corrected predictors, the variance and prediction-error
//!   decompositions, and the R²/L² report
//! - [`models`]: OLS, Cox proportional hazards (Breslow baseline) and
//!   log-normal / Weibull AFT fitters with their prediction functions
//! - [`pipeline`]: fit → weight → measure, shared by everything above it
//! - [`bootstrap`]: percentile intervals by row resampling
//! - [`simulation`]: data generators, censoring calibration, population
//!   approximation and scenario tables
//!
//! Replicate loops run on rayon when the `parallel` feature is on (default)
//! and fall back to plain iteration otherwise; see [`exec`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bootstrap;
pub mod error;
pub mod exec;
pub mod measures;
pub mod models;
pub mod numeric;
pub mod pipeline;
pub mod rng;
pub mod sample;
pub mod simulation;
pub mod weights;

pub use error::{Error, Result};
pub use measures::{
    accuracy_censored, accuracy_complete, corrected_predictor, decomposition_check, squared_correlation,
    AccuracyReport, CorrectedPredictor,
};
pub use sample::{
    censoring_rate, validate_censored, validate_complete, CensoredSample, CompleteSample, PredictionVector,
};
pub use weights::{fit_censoring_km, ipcw_weights, ipcw_weights_covariate, StepSurvival, WeightVector};
