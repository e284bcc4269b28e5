//! Validated samples and prediction vectors.
//!
//! Samples are immutable once validated. Covariates are stored as a dense
//! row-major `n × p` matrix; categorical columns must be encoded by the caller.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense row-major covariate matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Covariates {
    n: usize,
    p: usize,
    data: Vec<f64>,
}

impl Covariates {
    /// Build from rows; every row must have the same length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n * p);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != p {
                return Err(Error::LengthMismatch {
                    what: "covariate row",
                    expected: p,
                    found: row.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteValue { what: "x", row: i });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { n, p, data })
    }

    /// Row-major flat data of shape `n × p`.
    pub fn from_flat(n: usize, p: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * p {
            return Err(Error::LengthMismatch {
                what: "covariate data",
                expected: n * p,
                found: data.len(),
            });
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue {
                what: "x",
                row: pos / p.max(1),
            });
        }
        Ok(Self { n, p, data })
    }

    pub fn nrows(&self) -> usize {
        self.n
    }

    pub fn ncols(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.p..(i + 1) * self.p]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        (0..self.n).map(move |i| self.row(i))
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.data[i * self.p + j]).collect()
    }

    /// Rows selected by index (duplicates allowed).
    pub fn select(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(idx.len() * self.p);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Self {
            n: idx.len(),
            p: self.p,
            data,
        }
    }

    /// Column means.
    pub fn column_means(&self) -> Vec<f64> {
        let mut means = vec![0.0; self.p];
        for row in self.rows() {
            for (m, v) in means.iter_mut().zip(row) {
                *m += v;
            }
        }
        let n = self.n.max(1) as f64;
        means.iter_mut().for_each(|m| *m /= n);
        means
    }

    pub(crate) fn scale_column(&mut self, j: usize, c: f64) {
        for i in 0..self.n {
            self.data[i * self.p + j] *= c;
        }
    }
}

/// Uncensored sample `(Y_i, X_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompleteSample {
    y: Vec<f64>,
    x: Covariates,
}

/// Right-censored sample of triplets `(T_i, δ_i, X_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensoredSample {
    t: Vec<f64>,
    event: Vec<bool>,
    x: Covariates,
}

/// One prediction `m(X_i)` per sample row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionVector(Vec<f64>);

fn check_finite(what: &'static str, v: &[f64]) -> Result<()> {
    match v.iter().position(|x| !x.is_finite()) {
        Some(row) => Err(Error::NonFiniteValue { what, row }),
        None => Ok(()),
    }
}

fn check_len(what: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::LengthMismatch { what, expected, found });
    }
    Ok(())
}

/// Validate raw responses and covariate rows into a [`CompleteSample`].
pub fn validate_complete(y: &[f64], x: &[Vec<f64>]) -> Result<CompleteSample> {
    check_len("x rows", y.len(), x.len())?;
    let x = Covariates::from_rows(x)?;
    CompleteSample::new(y.to_vec(), x)
}

/// Validate raw times, indicators and covariate rows into a [`CensoredSample`].
pub fn validate_censored(t: &[f64], delta: &[f64], x: &[Vec<f64>]) -> Result<CensoredSample> {
    check_len("delta", t.len(), delta.len())?;
    check_len("x rows", t.len(), x.len())?;
    let mut event = Vec::with_capacity(delta.len());
    for (row, &d) in delta.iter().enumerate() {
        event.push(match d {
            1.0 => true,
            0.0 => false,
            value => return Err(Error::InvalidIndicator { row, value }),
        });
    }
    let x = Covariates::from_rows(x)?;
    CensoredSample::new(t.to_vec(), event, x)
}

impl CompleteSample {
    pub fn new(y: Vec<f64>, x: Covariates) -> Result<Self> {
        check_len("x rows", y.len(), x.nrows())?;
        check_finite("y", &y)?;
        if y.len() < 2 {
            return Err(Error::TooFewRows(y.len()));
        }
        Ok(Self { y, x })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn x(&self) -> &Covariates {
        &self.x
    }

    pub fn ncovariates(&self) -> usize {
        self.x.ncols()
    }

    /// The same data viewed as a censored sample with every row an event.
    pub fn to_censored(&self) -> CensoredSample {
        CensoredSample {
            t: self.y.clone(),
            event: vec![true; self.y.len()],
            x: self.x.clone(),
        }
    }

    pub fn select(&self, idx: &[usize]) -> Result<Self> {
        Self::new(idx.iter().map(|&i| self.y[i]).collect(), self.x.select(idx))
    }
}

impl CensoredSample {
    pub fn new(t: Vec<f64>, event: Vec<bool>, x: Covariates) -> Result<Self> {
        check_len("delta", t.len(), event.len())?;
        check_len("x rows", t.len(), x.nrows())?;
        check_finite("t", &t)?;
        if t.len() < 2 {
            return Err(Error::TooFewRows(t.len()));
        }
        if !event.iter().any(|&e| e) {
            return Err(Error::AllCensored);
        }
        Ok(Self { t, event, x })
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn time(&self) -> &[f64] {
        &self.t
    }

    pub fn event(&self) -> &[bool] {
        &self.event
    }

    pub fn x(&self) -> &Covariates {
        &self.x
    }

    pub fn ncovariates(&self) -> usize {
        self.x.ncols()
    }

    pub fn n_events(&self) -> usize {
        self.event.iter().filter(|&&e| e).count()
    }

    pub fn is_uncensored(&self) -> bool {
        self.event.iter().all(|&e| e)
    }

    /// Indicators as 0/1 reals.
    pub fn delta(&self) -> Vec<f64> {
        self.event.iter().map(|&e| if e { 1.0 } else { 0.0 }).collect()
    }

    /// Rows selected by index, revalidated (a resample can be all-censored).
    pub fn select(&self, idx: &[usize]) -> Result<Self> {
        Self::new(
            idx.iter().map(|&i| self.t[i]).collect(),
            idx.iter().map(|&i| self.event[i]).collect(),
            self.x.select(idx),
        )
    }

    /// Swap the roles of events and censorings, for modelling the censoring
    /// distribution. Not revalidated: a sample with no censoring yields no
    /// "events" here.
    pub(crate) fn flipped(&self) -> Self {
        Self {
            t: self.t.clone(),
            event: self.event.iter().map(|e| !e).collect(),
            x: self.x.clone(),
        }
    }

    /// Copy with covariate column `j` multiplied by `c`.
    pub fn with_scaled_column(&self, j: usize, c: f64) -> Self {
        let mut out = self.clone();
        out.x.scale_column(j, c);
        out
    }
}

/// Proportion of censored rows, `1 - mean(delta)`.
pub fn censoring_rate(sample: &CensoredSample) -> f64 {
    1.0 - sample.n_events() as f64 / sample.len() as f64
}

impl PredictionVector {
    pub fn new(m: Vec<f64>) -> Result<Self> {
        check_finite("prediction", &m)?;
        Ok(Self(m))
    }

    /// Predictions checked against the sample size they belong to.
    pub fn for_sample(m: Vec<f64>, n: usize) -> Result<Self> {
        check_len("predictions", n, m.len())?;
        Self::new(m)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn select(&self, idx: &[usize]) -> Self {
        Self(idx.iter().map(|&i| self.0[i]).collect())
    }

    /// `c + d * m`.
    pub fn affine(&self, c: f64, d: f64) -> Self {
        Self(self.0.iter().map(|m| c + d * m).collect())
    }
}

impl std::ops::Deref for PredictionVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complete_well_formed() {
        let s = validate_complete(&[1.0, 2.0, 3.0], &[vec![0.0], vec![1.0], vec![2.0]]).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.ncovariates(), 1);
    }

    #[test]
    fn complete_length_mismatch() {
        let e = validate_complete(&[1.0, 2.0], &[vec![0.0]]).unwrap_err();
        assert!(matches!(e, Error::LengthMismatch { .. }));
    }

    #[test]
    fn complete_non_finite() {
        let e = validate_complete(&[1.0, f64::NAN], &[vec![0.0], vec![1.0]]).unwrap_err();
        assert_eq!(e, Error::NonFiniteValue { what: "y", row: 1 });
        let e = validate_complete(&[1.0, 2.0], &[vec![0.0], vec![f64::INFINITY]]).unwrap_err();
        assert_eq!(e, Error::NonFiniteValue { what: "x", row: 1 });
    }

    #[test]
    fn complete_too_few_rows() {
        let e = validate_complete(&[1.0], &[vec![0.0]]).unwrap_err();
        assert_eq!(e, Error::TooFewRows(1));
    }

    #[test]
    fn ragged_rows_rejected() {
        let e = validate_complete(&[1.0, 2.0], &[vec![0.0], vec![1.0, 2.0]]).unwrap_err();
        assert!(matches!(e, Error::LengthMismatch { .. }));
    }

    #[test]
    fn censored_well_formed() {
        let s = validate_censored(
            &[1.0, 2.0, 3.0, 4.0],
            &[1.0, 0.0, 1.0, 1.0],
            &[vec![0.0], vec![0.0], vec![1.0], vec![1.0]],
        )
        .unwrap();
        assert_eq!(s.len(), 4);
        assert_eq!(s.n_events(), 3);
    }

    #[test]
    fn censored_all_censored() {
        let e = validate_censored(&[1.0, 2.0], &[0.0, 0.0], &[vec![], vec![]]).unwrap_err();
        assert_eq!(e, Error::AllCensored);
    }

    #[test]
    fn censored_invalid_indicator() {
        let e = validate_censored(&[1.0, 2.0], &[1.0, 2.0], &[vec![], vec![]]).unwrap_err();
        assert_eq!(e, Error::InvalidIndicator { row: 1, value: 2.0 });
    }

    #[test]
    fn censoring_rate_examples() {
        let x = vec![vec![]; 4];
        let s = validate_censored(&[1.0, 2.0, 3.0, 4.0], &[1.0, 0.0, 1.0, 1.0], &x).unwrap();
        assert_eq!(censoring_rate(&s), 0.25);
        let s = validate_censored(&[1.0, 2.0], &[1.0, 1.0], &x[..2]).unwrap();
        assert_eq!(censoring_rate(&s), 0.0);
        let s = validate_censored(&[1.0, 2.0], &[0.0, 1.0], &x[..2]).unwrap();
        assert_eq!(censoring_rate(&s), 0.5);
    }

    #[test]
    fn validation_is_idempotent() {
        let s = validate_censored(&[3.0, 1.0, 2.0], &[1.0, 0.0, 1.0], &[vec![1.0], vec![2.0], vec![3.0]]).unwrap();
        let again = validate_censored(
            s.time(),
            &s.delta(),
            &s.x().rows().map(<[f64]>::to_vec).collect::<Vec<_>>(),
        )
        .unwrap();
        assert_eq!(s, again);
    }

    #[test]
    fn resample_can_become_all_censored() {
        let s = validate_censored(&[1.0, 2.0], &[1.0, 0.0], &[vec![], vec![]]).unwrap();
        assert_eq!(s.select(&[1, 1]).unwrap_err(), Error::AllCensored);
    }
}
