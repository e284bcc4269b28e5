use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("length mismatch: {what} has {found} entries, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("non-finite value in {what} at row {row}")]
    NonFiniteValue { what: &'static str, row: usize },
    #[error("need at least 2 rows, got {0}")]
    TooFewRows(usize),
    #[error("event indicator at row {row} is {value}, expected 0 or 1")]
    InvalidIndicator { row: usize, value: f64 },
    #[error("every observation is censored")]
    AllCensored,
    #[error("censoring weights are degenerate: no uncensored row has positive censoring survival")]
    DegenerateWeights,
    #[error("response has zero (weighted) variance")]
    ZeroTotalVariance,
    #[error("correlation undefined: {0} is constant under the weights")]
    DegenerateCorrelation(&'static str),
    #[error("design matrix is rank deficient")]
    RankDeficient,
    #[error("{model} fit did not converge in {iterations} iterations (gradient norm {gradient_norm:e})")]
    NonConvergence {
        model: &'static str,
        iterations: usize,
        gradient_norm: f64,
    },
    #[error("monotone partial likelihood: |beta| exceeded {bound}")]
    MonotoneLikelihood { bound: f64 },
    #[error("model fit is not converged; refusing to predict")]
    UnconvergedFit,
    #[error("AFT scale collapsed to zero (exact fit)")]
    DegenerateScale,
    #[error("{failures} of {replicates} bootstrap replicates failed (limit 10%)")]
    TooManyFailures { failures: usize, replicates: usize },
    #[error("censoring calibration failed: {0}")]
    CalibrationFailure(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// True for failures of the numerical machinery rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::DegenerateWeights
                | Error::ZeroTotalVariance
                | Error::DegenerateCorrelation(_)
                | Error::RankDeficient
                | Error::NonConvergence { .. }
                | Error::MonotoneLikelihood { .. }
                | Error::UnconvergedFit
                | Error::DegenerateScale
                | Error::TooManyFailures { .. }
                | Error::CalibrationFailure(_)
        )
    }
}
