//! Least squares linear regression with an intercept (optionally weighted).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sample::{CompleteSample, Covariates, PredictionVector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OlsFit {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub fitted: PredictionVector,
}

impl OlsFit {
    pub fn predict(&self, x: &Covariates) -> Result<PredictionVector> {
        if x.ncols() != self.coefficients.len() {
            return Err(Error::LengthMismatch {
                what: "covariate columns",
                expected: self.coefficients.len(),
                found: x.ncols(),
            });
        }
        PredictionVector::new(
            x.rows()
                .map(|r| self.intercept + r.iter().zip(&self.coefficients).map(|(v, b)| v * b).sum::<f64>())
                .collect(),
        )
    }
}

pub fn fit_ols(sample: &CompleteSample) -> Result<OlsFit> {
    let n = sample.len();
    fit_wls(sample.y(), sample.x(), &vec![1.0; n])
}

/// Weighted least squares of `y` on `[1, x]`. Rows with zero weight do not
/// influence the fit but still receive fitted values.
pub fn fit_wls(y: &[f64], x: &Covariates, w: &[f64]) -> Result<OlsFit> {
    let n = y.len();
    let p = x.ncols();
    if x.nrows() != n || w.len() != n {
        return Err(Error::LengthMismatch {
            what: "regression inputs",
            expected: n,
            found: x.nrows().min(w.len()),
        });
    }
    let wsum: f64 = w.iter().sum();
    if !(wsum > 0.0) || w.iter().any(|&v| v < 0.0 || !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "weights must be nonnegative with positive sum".into(),
        ));
    }
    let ybar = y.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / wsum;
    let mut xbar = vec![0.0; p];
    for (row, &wi) in x.rows().zip(w) {
        for (m, v) in xbar.iter_mut().zip(row) {
            *m += wi * v;
        }
    }
    xbar.iter_mut().for_each(|m| *m /= wsum);

    let coefficients = if p == 0 {
        Vec::new()
    } else {
        let a = DMatrix::from_fn(n, p, |i, j| w[i].sqrt() * (x.row(i)[j] - xbar[j]));
        let b = DVector::from_fn(n, |i, _| w[i].sqrt() * (y[i] - ybar));
        let qr = a.clone().qr();
        let r = qr.r();
        let scale = a.column_iter().map(|c| c.norm()).fold(0.0f64, f64::max);
        if (0..p).any(|k| r[(k, k)].abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE)) || n <= p {
            return Err(Error::RankDeficient);
        }
        let qtb = qr.q().transpose() * b;
        let sol = r.solve_upper_triangular(&qtb).ok_or(Error::RankDeficient)?;
        sol.iter().copied().collect()
    };
    let intercept = ybar - xbar.iter().zip(&coefficients).map(|(m, b)| m * b).sum::<f64>();
    let partial = OlsFit {
        intercept,
        coefficients,
        fitted: PredictionVector::new(Vec::new())?,
    };
    let fitted = partial.predict(x)?;
    Ok(OlsFit { fitted, ..partial })
}
