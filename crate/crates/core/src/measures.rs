//! Linearly corrected predictors and the R² / L² accuracy measures.
//!
//! For a response `T`, raw predictions `m` and nonnegative weights `w`
//! summing to one, the corrected predictor `m^c = a + b m` is the weighted
//! least squares line of `T` on `m`. It splits
//!
//! ```text
//! Σ w (T - T̄)²  = Σ w (m^c - T̄)² + Σ w (T - m^c)²      (total = explained + residual)
//! Σ w (T - m)²   = Σ w (T - m^c)² + Σ w (m^c - m)²      (mspe  = residual + gap)
//! ```
//!
//! and `R² = explained / total`, `L² = residual / mspe`. Complete data is the
//! special case `w_i = 1/n`; both paths share one implementation, so they
//! agree bit for bit when there is no censoring.
//!
//! All sums are compensated.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::csum;
use crate::sample::{censoring_rate, CensoredSample, CompleteSample, PredictionVector};
use crate::weights::WeightVector;

/// Relative tolerance for the two decomposition identities.
pub const DECOMPOSITION_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrectedPredictor {
    pub intercept: f64,
    pub slope: f64,
    /// Fitted with non-uniform weights.
    pub weighted: bool,
    /// `m` was constant under the weights; slope forced to 0.
    pub degenerate: bool,
}

impl CorrectedPredictor {
    #[inline]
    pub fn apply(&self, m: f64) -> f64 {
        self.intercept + self.slope * m
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub r2: f64,
    pub l2: f64,
    pub total_ss: f64,
    pub explained_ss: f64,
    pub residual_ss: f64,
    pub mspe: f64,
    pub correction_gap_ss: f64,
    pub weighted_mean: f64,
    pub n: usize,
    pub censoring_rate: f64,
    pub corrected: CorrectedPredictor,
}

fn check_lengths(n: usize, m: &PredictionVector, w: &WeightVector) -> Result<()> {
    if m.len() != n {
        return Err(Error::LengthMismatch {
            what: "predictions",
            expected: n,
            found: m.len(),
        });
    }
    if w.len() != n {
        return Err(Error::LengthMismatch {
            what: "weights",
            expected: n,
            found: w.len(),
        });
    }
    Ok(())
}

fn constant_under(v: &[f64], w: &[f64]) -> bool {
    let mut support = v.iter().zip(w).filter(|(_, &wi)| wi > 0.0).map(|(x, _)| *x);
    match support.next() {
        Some(first) => support.all(|x| x == first),
        None => true,
    }
}

fn weighted_mean(v: &[f64], w: &[f64]) -> f64 {
    csum(v.iter().zip(w).map(|(a, b)| a * b))
}

/// Weighted least squares line of `y` on `m`.
pub fn corrected_predictor(y: &[f64], m: &PredictionVector, w: &WeightVector) -> Result<CorrectedPredictor> {
    check_lengths(y.len(), m, w)?;
    if let Some(row) = y.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteValue { what: "response", row });
    }
    let ybar = weighted_mean(y, w);
    let mbar = weighted_mean(m, w);
    let sxx = csum(m.iter().zip(w.iter()).map(|(mi, wi)| wi * (mi - mbar) * (mi - mbar)));
    let weighted = !w.is_uniform();
    if constant_under(m, w) || !(sxx > 0.0) {
        return Ok(CorrectedPredictor {
            intercept: ybar,
            slope: 0.0,
            weighted,
            degenerate: true,
        });
    }
    let sxy = csum(
        y.iter()
            .zip(m.iter())
            .zip(w.iter())
            .map(|((yi, mi), wi)| wi * (yi - ybar) * (mi - mbar)),
    );
    let slope = sxy / sxx;
    Ok(CorrectedPredictor {
        intercept: ybar - slope * mbar,
        slope,
        weighted,
        degenerate: false,
    })
}

fn weighted_report(y: &[f64], m: &PredictionVector, w: &WeightVector, censoring_rate: f64) -> Result<AccuracyReport> {
    let corrected = corrected_predictor(y, m, w)?;
    if constant_under(y, w) {
        return Err(Error::ZeroTotalVariance);
    }
    let ybar = weighted_mean(y, w);
    let mc: Vec<f64> = m.iter().map(|&v| corrected.apply(v)).collect();
    let sum_sq = |f: &dyn Fn(usize) -> f64| {
        csum((0..y.len()).map(|i| {
            let d = f(i);
            w[i] * d * d
        }))
    };
    let total_ss = sum_sq(&|i| y[i] - ybar);
    let explained_ss = sum_sq(&|i| mc[i] - ybar);
    let residual_ss = sum_sq(&|i| y[i] - mc[i]);
    let mspe = sum_sq(&|i| y[i] - m[i]);
    let correction_gap_ss = sum_sq(&|i| mc[i] - m[i]);
    if !(total_ss > 0.0) {
        return Err(Error::ZeroTotalVariance);
    }
    let r2 = if corrected.degenerate {
        0.0
    } else {
        (explained_ss / total_ss).clamp(0.0, 1.0)
    };
    let l2 = if mspe == 0.0 {
        1.0
    } else {
        (residual_ss / mspe).clamp(0.0, 1.0)
    };
    Ok(AccuracyReport {
        r2,
        l2,
        total_ss,
        explained_ss,
        residual_ss,
        mspe,
        correction_gap_ss,
        weighted_mean: ybar,
        n: y.len(),
        censoring_rate,
        corrected,
    })
}

/// R² and L² for complete data (uniform weights).
pub fn accuracy_complete(sample: &CompleteSample, m: &PredictionVector) -> Result<AccuracyReport> {
    let w = WeightVector::uniform(sample.len());
    weighted_report(sample.y(), m, &w, 0.0)
}

/// R² and L² for right-censored data under the given weights.
pub fn accuracy_censored(sample: &CensoredSample, m: &PredictionVector, w: &WeightVector) -> Result<AccuracyReport> {
    weighted_report(sample.time(), m, w, censoring_rate(sample))
}

/// R² and L² for any response and weights summing to one.
pub fn accuracy_weighted(y: &[f64], m: &PredictionVector, w: &WeightVector) -> Result<AccuracyReport> {
    weighted_report(y, m, w, 0.0)
}

fn close(lhs: f64, rhs: f64) -> bool {
    let scale = lhs.abs().max(rhs.abs());
    (lhs - rhs).abs() <= DECOMPOSITION_TOLERANCE * scale
}

/// Both decomposition identities hold to [`DECOMPOSITION_TOLERANCE`].
pub fn decomposition_check(report: &AccuracyReport) -> bool {
    close(report.total_ss, report.explained_ss + report.residual_ss)
        && close(report.mspe, report.residual_ss + report.correction_gap_ss)
}

/// Weighted squared Pearson correlation between `y` and `m`.
pub fn squared_correlation(y: &[f64], m: &PredictionVector, w: &WeightVector) -> Result<f64> {
    check_lengths(y.len(), m, w)?;
    if constant_under(y, w) {
        return Err(Error::DegenerateCorrelation("response"));
    }
    if constant_under(m, w) {
        return Err(Error::DegenerateCorrelation("prediction"));
    }
    let ybar = weighted_mean(y, w);
    let mbar = weighted_mean(m, w);
    let syy = csum(y.iter().zip(w.iter()).map(|(a, wi)| wi * (a - ybar) * (a - ybar)));
    let smm = csum(m.iter().zip(w.iter()).map(|(a, wi)| wi * (a - mbar) * (a - mbar)));
    let sym = csum(
        y.iter()
            .zip(m.iter())
            .zip(w.iter())
            .map(|((a, b), wi)| wi * (a - ybar) * (b - mbar)),
    );
    Ok((sym / smm) * (sym / syy))
}

/// Normal-equation residuals of the corrected fit, scaled to be
/// dimensionless: `Σ w (T - m^c) / Σ w|T|` and
/// `Σ w (T - m^c) m / (Σ w|T| · Σ w|m|)`. Both vanish in exact arithmetic.
pub fn orthogonality_residuals(
    y: &[f64],
    m: &PredictionVector,
    w: &WeightVector,
    cp: &CorrectedPredictor,
) -> (f64, f64) {
    let resid: Vec<f64> = y.iter().zip(m.iter()).map(|(a, b)| a - cp.apply(*b)).collect();
    let abs_y = csum(y.iter().zip(w.iter()).map(|(a, wi)| wi * a.abs()));
    let abs_m = csum(m.iter().zip(w.iter()).map(|(a, wi)| wi * a.abs()));
    let r0 = csum(resid.iter().zip(w.iter()).map(|(r, wi)| wi * r));
    let r1 = csum(
        resid
            .iter()
            .zip(m.iter())
            .zip(w.iter())
            .map(|((r, mi), wi)| wi * r * mi),
    );
    (
        r0 / abs_y.max(f64::MIN_POSITIVE),
        r1 / (abs_y * abs_m).max(f64::MIN_POSITIVE),
    )
}
