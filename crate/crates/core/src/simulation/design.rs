//! Data-generating designs.
//!
//! - Cox/Weibull: `Y = 2 (-log U · e^{-βx})^{1/ν}` with `x ∈ {0, 10}` equally
//!   likely, i.e. cumulative baseline hazard `(t/2)^ν`.
//! - Weibull AFT: `log Y = βx + σW`, `x ~ U(0, 1)`, `W` standard minimum
//!   extreme value, `W = log(-log(1 - U))`. Censoring is absent, independent
//!   Weibull(shape, scale), or covariate dependent `log C = γ_c x + θ_c V`
//!   with `V` drawn like `W`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sample::{CensoredSample, Covariates};

/// Standard minimum extreme-value variate from a uniform `u ∈ [0, 1)`.
#[inline]
pub fn extreme_value(u: f64) -> f64 {
    (-(1.0 - u).ln()).ln()
}

/// Event time of the Cox/Weibull design for a given uniform draw.
#[inline]
pub fn cox_weibull_time(u: f64, x: f64, beta: f64, nu: f64) -> f64 {
    2.0 * (-u.ln() * (-beta * x).exp()).powf(1.0 / nu)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoxWeibullDesign {
    pub beta: f64,
    /// Weibull shape.
    pub nu: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CensoringDesign {
    None,
    Independent { shape: f64, scale: f64 },
    Dependent { gamma_c: f64, theta_c: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AftWeibullDesign {
    pub beta: f64,
    pub sigma: f64,
    pub n: usize,
    pub censoring: CensoringDesign,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Design {
    CoxWeibull(CoxWeibullDesign),
    AftWeibull(AftWeibullDesign),
}

fn finite_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")))
    }
}

impl CoxWeibullDesign {
    pub fn validate(&self) -> Result<()> {
        finite_positive("nu", self.nu)?;
        if !self.beta.is_finite() {
            return Err(Error::InvalidArgument("beta must be finite".into()));
        }
        Ok(())
    }

    pub fn generate<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<CensoredSample> {
        self.validate()?;
        let mut t = Vec::with_capacity(self.n);
        let mut x = Vec::with_capacity(self.n);
        for _ in 0..self.n {
            let xi = if rng.random::<f64>() < 0.5 { 0.0 } else { 10.0 };
            let u = 1.0 - rng.random::<f64>();
            t.push(cox_weibull_time(u, xi, self.beta, self.nu));
            x.push(xi);
        }
        CensoredSample::new(t, vec![true; self.n], Covariates::from_flat(self.n, 1, x)?)
    }
}

impl AftWeibullDesign {
    pub fn validate(&self) -> Result<()> {
        finite_positive("sigma", self.sigma)?;
        match self.censoring {
            CensoringDesign::None => Ok(()),
            CensoringDesign::Independent { shape, scale } => {
                finite_positive("shape", shape)?;
                finite_positive("scale", scale)
            }
            CensoringDesign::Dependent { gamma_c, theta_c } => {
                finite_positive("theta_c", theta_c)?;
                if gamma_c.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidArgument("gamma_c must be finite".into()))
                }
            }
        }
    }

    /// One covariate and log event time.
    pub(crate) fn draw_event<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let x = rng.random::<f64>();
        let w = extreme_value(rng.random::<f64>());
        (x, self.beta * x + self.sigma * w)
    }

    pub fn generate<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<CensoredSample> {
        self.validate()?;
        let mut t = Vec::with_capacity(self.n);
        let mut event = Vec::with_capacity(self.n);
        let mut xs = Vec::with_capacity(self.n);
        for _ in 0..self.n {
            let (x, log_y) = self.draw_event(rng);
            let log_c = match self.censoring {
                CensoringDesign::None => f64::INFINITY,
                CensoringDesign::Independent { shape, scale } => {
                    scale.ln() + (-(1.0 - rng.random::<f64>()).ln()).ln() / shape
                }
                CensoringDesign::Dependent { gamma_c, theta_c } => {
                    gamma_c * x + theta_c * extreme_value(rng.random::<f64>())
                }
            };
            let observed = log_y <= log_c;
            t.push(if observed { log_y } else { log_c }.exp());
            event.push(observed);
            xs.push(x);
        }
        CensoredSample::new(t, event, Covariates::from_flat(self.n, 1, xs)?)
    }
}

impl Design {
    pub fn n(&self) -> usize {
        match self {
            Design::CoxWeibull(d) => d.n,
            Design::AftWeibull(d) => d.n,
        }
    }

    pub fn with_n(&self, n: usize) -> Self {
        match *self {
            Design::CoxWeibull(d) => Design::CoxWeibull(CoxWeibullDesign { n, ..d }),
            Design::AftWeibull(d) => Design::AftWeibull(AftWeibullDesign { n, ..d }),
        }
    }

    pub fn without_censoring(&self) -> Self {
        match *self {
            Design::AftWeibull(d) => Design::AftWeibull(AftWeibullDesign {
                censoring: CensoringDesign::None,
                ..d
            }),
            other => other,
        }
    }

    pub fn generate<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<CensoredSample> {
        match self {
            Design::CoxWeibull(d) => d.generate(rng),
            Design::AftWeibull(d) => d.generate(rng),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Design::CoxWeibull(d) => d.validate(),
            Design::AftWeibull(d) => d.validate(),
        }
    }

    /// Short label used in tables.
    pub fn label(&self) -> String {
        match self {
            Design::CoxWeibull(d) => format!("cox_weibull(beta={},nu={})", d.beta, d.nu),
            Design::AftWeibull(d) => format!("aft_weibull(beta={},sigma={})", d.beta, d.sigma),
        }
    }
}
