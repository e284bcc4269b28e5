//! Parametric accelerated failure time models, `log T = a + β'x + σ W`,
//! fitted by censored maximum likelihood in `(a, β, log σ)`.
//!
//! Events contribute the density of `T`, censored rows the survival
//! function. Maximisation is Newton ascent with analytic gradient and
//! Hessian, a ridge fallback when the Hessian is not negative definite, and
//! step-halving on the log-likelihood.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use statrs::function::gamma::gamma;

use super::cox::solve_spd;
use super::{PredictionKind, PredictionTarget};
use crate::error::{Error, Result};
use crate::models::ols::fit_wls;
use crate::sample::{CensoredSample, Covariates, PredictionVector};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
/// σ below this is treated as a collapsed (exact-fit) scale.
const MIN_LOG_SCALE: f64 = -23.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AftDistribution {
    /// Gaussian error on the log scale.
    Lognormal,
    /// Minimum extreme-value error on the log scale.
    Weibull,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AftFit {
    pub intercept: f64,
    pub beta: Vec<f64>,
    pub scale: f64,
    pub distribution: AftDistribution,
    pub loglik: f64,
    pub converged: bool,
    pub iterations: usize,
    pub gradient_norm: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct AftOptions {
    pub max_iter: usize,
    pub tolerance: f64,
}

impl Default for AftOptions {
    fn default() -> Self {
        Self {
            max_iter: 100,
            tolerance: 1e-8,
        }
    }
}

/// `(log Φ̄(z), φ(z)/Φ̄(z))` without underflow in the upper tail.
fn normal_upper_tail(z: f64) -> (f64, f64) {
    if z < 5.0 {
        let sf = 0.5 * erfc(z / std::f64::consts::SQRT_2);
        let pdf = (-0.5 * z * z - LN_SQRT_2PI).exp();
        (sf.ln(), pdf / sf)
    } else {
        // Mills ratio Φ̄/φ by its continued fraction.
        let mut frac = 0.0;
        for k in (1..=60).rev() {
            frac = k as f64 / (z + frac);
        }
        let mills = 1.0 / (z + frac);
        (mills.ln() - 0.5 * z * z - LN_SQRT_2PI, 1.0 / mills)
    }
}

impl AftDistribution {
    /// For a standardised residual `z`: `(ℓ, ∂ℓ/∂z, ∂²ℓ/∂z²)` of the log
    /// density (event) or log survival (censored), excluding the `-log σ`
    /// and `-log t` terms.
    fn terms(self, z: f64, event: bool) -> (f64, f64, f64) {
        match (self, event) {
            (AftDistribution::Lognormal, true) => (-0.5 * z * z - LN_SQRT_2PI, -z, -1.0),
            (AftDistribution::Lognormal, false) => {
                let (log_sf, lambda) = normal_upper_tail(z);
                (log_sf, -lambda, -lambda * (lambda - z))
            }
            (AftDistribution::Weibull, true) => {
                let ez = z.exp();
                (z - ez, 1.0 - ez, -ez)
            }
            (AftDistribution::Weibull, false) => {
                let ez = z.exp();
                (-ez, -ez, -ez)
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            AftDistribution::Lognormal => "lognormal",
            AftDistribution::Weibull => "weibull",
        }
    }
}

struct Eval {
    loglik: f64,
    grad: DVector<f64>,
    hess: DMatrix<f64>,
}

/// Log-likelihood and derivatives at `theta = (a, β, log σ)`.
fn evaluate(sample: &CensoredSample, dist: AftDistribution, theta: &[f64], second: bool) -> Eval {
    let p = sample.ncovariates();
    let k = p + 2;
    let s = theta[k - 1];
    let sigma = s.exp();
    let mut loglik = 0.0;
    let mut grad = DVector::zeros(k);
    let mut hess = DMatrix::zeros(k, k);
    let mut design = vec![0.0; p + 1];
    design[0] = 1.0;

    for ((&t, &event), row) in sample.time().iter().zip(sample.event()).zip(sample.x().rows()) {
        design[1..].copy_from_slice(row);
        let eta: f64 = design.iter().zip(theta).map(|(d, b)| d * b).sum();
        let lt = t.ln();
        let z = (lt - eta) / sigma;
        let (l, u, du) = dist.terms(z, event);
        let ev = if event { 1.0 } else { 0.0 };
        loglik += l - ev * (s + lt);
        // dz/dη = -1/σ, dz/ds = -z
        let d_eta = -u / sigma;
        let d_s = -ev - z * u;
        for j in 0..=p {
            grad[j] += d_eta * design[j];
        }
        grad[k - 1] += d_s;
        if second {
            let h_ee = du / (sigma * sigma);
            let h_es = (z * du + u) / sigma;
            let h_ss = z * u + z * z * du;
            for i in 0..=p {
                for j in 0..=p {
                    hess[(i, j)] += h_ee * design[i] * design[j];
                }
                hess[(i, k - 1)] += h_es * design[i];
                hess[(k - 1, i)] += h_es * design[i];
            }
            hess[(k - 1, k - 1)] += h_ss;
        }
    }
    Eval { loglik, grad, hess }
}

/// Censored log-likelihood at `theta = (intercept, β..., log σ)`.
pub fn aft_loglik(sample: &CensoredSample, dist: AftDistribution, theta: &[f64]) -> f64 {
    evaluate(sample, dist, theta, false).loglik
}

/// Gradient of [`aft_loglik`].
pub fn aft_gradient(sample: &CensoredSample, dist: AftDistribution, theta: &[f64]) -> Vec<f64> {
    evaluate(sample, dist, theta, false).grad.iter().copied().collect()
}

fn check_positive_times(sample: &CensoredSample) -> Result<()> {
    match sample.time().iter().position(|&t| t <= 0.0) {
        Some(row) => Err(Error::InvalidArgument(format!(
            "AFT models need positive times (row {row} is {})",
            sample.time()[row]
        ))),
        None => Ok(()),
    }
}

fn initial_theta(sample: &CensoredSample, dist: AftDistribution) -> Vec<f64> {
    let p = sample.ncovariates();
    let logt: Vec<f64> = sample.time().iter().map(|t| t.ln()).collect();
    let n = logt.len();
    let fit = fit_wls(&logt, sample.x(), &vec![1.0; n]).ok();
    let (mut a, beta, resid_var) = match &fit {
        Some(f) => {
            let rv = logt
                .iter()
                .zip(f.fitted.iter())
                .map(|(y, m)| (y - m).powi(2))
                .sum::<f64>()
                / n as f64;
            (f.intercept, f.coefficients.clone(), rv)
        }
        None => {
            let mean = logt.iter().sum::<f64>() / n as f64;
            let rv = logt.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / n as f64;
            (mean, vec![0.0; p], rv)
        }
    };
    let mut sigma = resid_var.sqrt();
    if dist == AftDistribution::Weibull {
        // sd of the extreme-value law is π/√6
        sigma /= std::f64::consts::PI / 6f64.sqrt();
        a += EULER_GAMMA * sigma;
    }
    let s = if sigma > 1e-8 { sigma.ln() } else { 0.0 };
    let mut theta = Vec::with_capacity(p + 2);
    theta.push(a);
    theta.extend(beta);
    theta.push(s);
    theta
}

pub fn fit_aft(sample: &CensoredSample, dist: AftDistribution) -> Result<AftFit> {
    fit_aft_with(sample, dist, &AftOptions::default())
}

pub fn fit_aft_with(sample: &CensoredSample, dist: AftDistribution, opts: &AftOptions) -> Result<AftFit> {
    check_positive_times(sample)?;
    if sample.n_events() == 0 {
        return Err(Error::AllCensored);
    }
    let k = sample.ncovariates() + 2;
    let mut theta = initial_theta(sample, dist);
    let mut cur = evaluate(sample, dist, &theta, true);
    let mut iterations = 0;
    let mut converged = cur.grad.norm() <= opts.tolerance;

    while !converged && iterations < opts.max_iter {
        iterations += 1;
        let neg_hess = -&cur.hess;
        let step = solve_spd(&neg_hess, &cur.grad).unwrap_or_else(|| cur.grad.clone());
        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..50 {
            let cand: Vec<f64> = theta.iter().zip(step.iter()).map(|(t, d)| t + scale * d).collect();
            let next = evaluate(sample, dist, &cand, true);
            if next.loglik.is_finite() && next.loglik >= cur.loglik - 1e-12 * cur.loglik.abs() {
                accepted = Some((cand, next));
                break;
            }
            scale *= 0.5;
        }
        let Some((cand, next)) = accepted else {
            break;
        };
        if cand[k - 1] < MIN_LOG_SCALE {
            return Err(Error::DegenerateScale);
        }
        let step_norm = scale * step.norm();
        let theta_norm = theta.iter().map(|v| v * v).sum::<f64>().sqrt();
        theta = cand;
        cur = next;
        converged = cur.grad.norm() <= opts.tolerance || (scale == 1.0 && step_norm <= 1e-12 * (1.0 + theta_norm));
    }
    if !converged {
        if theta[k - 1] < -10.0 {
            return Err(Error::DegenerateScale);
        }
        return Err(Error::NonConvergence {
            model: "aft",
            iterations,
            gradient_norm: cur.grad.norm(),
        });
    }
    Ok(AftFit {
        intercept: theta[0],
        beta: theta[1..k - 1].to_vec(),
        scale: theta[k - 1].exp(),
        distribution: dist,
        loglik: cur.loglik,
        converged,
        iterations,
        gradient_norm: cur.grad.norm(),
    })
}

impl AftFit {
    pub fn linear_predictor(&self, row: &[f64]) -> f64 {
        self.intercept + row.iter().zip(&self.beta).map(|(v, b)| v * b).sum::<f64>()
    }

    /// Conditional mean or median of `T` given `eta`.
    pub fn predict_eta(&self, eta: f64, target: PredictionTarget) -> f64 {
        let sigma = self.scale;
        match (self.distribution, target) {
            (AftDistribution::Lognormal, PredictionTarget::ConditionalMean) => (eta + 0.5 * sigma * sigma).exp(),
            (AftDistribution::Lognormal, PredictionTarget::ConditionalMedian) => eta.exp(),
            (AftDistribution::Weibull, PredictionTarget::ConditionalMean) => eta.exp() * gamma(1.0 + sigma),
            (AftDistribution::Weibull, PredictionTarget::ConditionalMedian) => {
                eta.exp() * std::f64::consts::LN_2.powf(sigma)
            }
        }
    }
}

pub fn aft_predict(fit: &AftFit, x: &Covariates, kind: PredictionKind) -> Result<PredictionVector> {
    if !fit.converged {
        return Err(Error::UnconvergedFit);
    }
    if x.ncols() != fit.beta.len() {
        return Err(Error::LengthMismatch {
            what: "covariate columns",
            expected: fit.beta.len(),
            found: x.ncols(),
        });
    }
    PredictionVector::new(
        x.rows()
            .map(|r| fit.predict_eta(fit.linear_predictor(r), kind.target))
            .collect(),
    )
}
