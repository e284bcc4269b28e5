//! Cox proportional hazards: Breslow-tie partial likelihood maximised by
//! Newton–Raphson with step-halving, Breslow baseline cumulative hazard, and
//! restricted-mean / median prediction.
//!
//! Covariates are centred at their sample means before fitting. The stored
//! baseline is the cumulative hazard at the centre, so predictions use
//! `(x - center)'β`. This changes nothing mathematically but keeps `exp(η)`
//! in range for covariates with large offsets.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{HorizonPolicy, PredictionKind, PredictionTarget};
use crate::error::{Error, Result};
use crate::sample::{CensoredSample, Covariates, PredictionVector};

/// Right-continuous step cumulative hazard.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CumulativeHazard {
    times: Vec<f64>,
    increments: Vec<f64>,
    cumhaz: Vec<f64>,
}

impl CumulativeHazard {
    fn from_increments(times: Vec<f64>, increments: Vec<f64>) -> Self {
        let mut acc = 0.0;
        let cumhaz = increments
            .iter()
            .map(|d| {
                acc += d;
                acc
            })
            .collect();
        Self {
            times,
            increments,
            cumhaz,
        }
    }

    /// Distinct event times, increasing.
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    /// Cumulative hazard after each jump.
    pub fn values(&self) -> &[f64] {
        &self.cumhaz
    }

    /// `H(t)`: value at the largest jump time `<= t`.
    pub fn value_at(&self, t: f64) -> f64 {
        let k = self.times.partition_point(|&s| s <= t);
        if k == 0 {
            0.0
        } else {
            self.cumhaz[k - 1]
        }
    }

    /// `H(t-)`: value at the largest jump time `< t`.
    pub fn left_limit(&self, t: f64) -> f64 {
        let k = self.times.partition_point(|&s| s < t);
        if k == 0 {
            0.0
        } else {
            self.cumhaz[k - 1]
        }
    }

    pub fn last_time(&self) -> Option<f64> {
        self.times.last().copied()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CoxOptions {
    pub max_iter: usize,
    pub tolerance: f64,
    pub divergence_bound: f64,
}

impl Default for CoxOptions {
    fn default() -> Self {
        Self {
            max_iter: 50,
            tolerance: 1e-8,
            divergence_bound: 50.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoxFit {
    pub beta: Vec<f64>,
    /// Covariate means the baseline refers to.
    pub center: Vec<f64>,
    pub baseline: CumulativeHazard,
    pub loglik: f64,
    pub converged: bool,
    pub iterations: usize,
    pub score_norm: f64,
}

/// Rows sorted by time, grouped into blocks of tied times.
struct RiskOrder {
    order: Vec<usize>,
    /// `(start, end)` ranges into `order`, increasing in time.
    blocks: Vec<(usize, usize)>,
}

impl RiskOrder {
    fn new(t: &[f64]) -> Self {
        let mut order: Vec<usize> = (0..t.len()).collect();
        order.sort_by(|&a, &b| t[a].total_cmp(&t[b]));
        let mut blocks = Vec::new();
        let mut start = 0;
        for k in 1..=order.len() {
            if k == order.len() || t[order[k]] != t[order[start]] {
                blocks.push((start, k));
                start = k;
            }
        }
        Self { order, blocks }
    }
}

struct Derivs {
    loglik: f64,
    score: DVector<f64>,
    /// Negative Hessian (observed information).
    information: DMatrix<f64>,
}

fn linear_predictors(x: &Covariates, center: &[f64], beta: &[f64]) -> Vec<f64> {
    x.rows()
        .map(|row| row.iter().zip(center).zip(beta).map(|((v, c), b)| (v - c) * b).sum())
        .collect()
}

fn derivs(sample: &CensoredSample, ord: &RiskOrder, center: &[f64], beta: &[f64], second: bool) -> Derivs {
    let p = beta.len();
    let x = sample.x();
    let event = sample.event();
    let eta = linear_predictors(x, center, beta);
    let shift = eta.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let mut s0 = 0.0;
    let mut s1 = vec![0.0; p];
    let mut s2 = vec![0.0; if second { p * p } else { 0 }];
    let mut loglik = 0.0;
    let mut score = DVector::zeros(p);
    let mut info = DMatrix::zeros(p, p);
    let mut xc = vec![0.0; p];

    for &(start, end) in ord.blocks.iter().rev() {
        let mut d = 0usize;
        let mut xsum = vec![0.0; p];
        let mut eta_sum = 0.0;
        for &i in &ord.order[start..end] {
            let r = (eta[i] - shift).exp();
            for ((c, v), m) in xc.iter_mut().zip(x.row(i)).zip(center) {
                *c = v - m;
            }
            s0 += r;
            for j in 0..p {
                s1[j] += r * xc[j];
                if second {
                    for k in 0..p {
                        s2[j * p + k] += r * xc[j] * xc[k];
                    }
                }
            }
            if event[i] {
                d += 1;
                eta_sum += eta[i];
                for j in 0..p {
                    xsum[j] += xc[j];
                }
            }
        }
        if d == 0 {
            continue;
        }
        let df = d as f64;
        loglik += eta_sum - df * (s0.ln() + shift);
        for j in 0..p {
            let mj = s1[j] / s0;
            score[j] += xsum[j] - df * mj;
            if second {
                for k in 0..p {
                    let mk = s1[k] / s0;
                    info[(j, k)] += df * (s2[j * p + k] / s0 - mj * mk);
                }
            }
        }
    }
    Derivs {
        loglik,
        score,
        information: info,
    }
}

/// Log partial likelihood (Breslow ties) at `beta`, uncentred covariates.
pub fn log_partial_likelihood(sample: &CensoredSample, beta: &[f64]) -> f64 {
    let ord = RiskOrder::new(sample.time());
    let zero = vec![0.0; beta.len()];
    derivs(sample, &ord, &zero, beta, false).loglik
}

/// Gradient of [`log_partial_likelihood`].
pub fn partial_likelihood_score(sample: &CensoredSample, beta: &[f64]) -> Vec<f64> {
    let ord = RiskOrder::new(sample.time());
    let zero = vec![0.0; beta.len()];
    derivs(sample, &ord, &zero, beta, false).score.iter().copied().collect()
}

/// Breslow cumulative baseline hazard at `beta` (uncentred covariates).
pub fn breslow_baseline(sample: &CensoredSample, beta: &[f64]) -> CumulativeHazard {
    let zero = vec![0.0; beta.len()];
    breslow_centered(sample, &RiskOrder::new(sample.time()), &zero, beta)
}

fn breslow_centered(sample: &CensoredSample, ord: &RiskOrder, center: &[f64], beta: &[f64]) -> CumulativeHazard {
    let eta = linear_predictors(sample.x(), center, beta);
    let t = sample.time();
    let event = sample.event();
    let mut s0 = 0.0;
    let mut times = Vec::new();
    let mut incs = Vec::new();
    for &(start, end) in ord.blocks.iter().rev() {
        let mut d = 0usize;
        for &i in &ord.order[start..end] {
            s0 += eta[i].exp();
            d += usize::from(event[i]);
        }
        if d > 0 {
            times.push(t[ord.order[start]]);
            incs.push(d as f64 / s0);
        }
    }
    times.reverse();
    incs.reverse();
    CumulativeHazard::from_increments(times, incs)
}

/// Solve `a x = b` for symmetric positive definite `a`, ridging if needed.
pub(crate) fn solve_spd(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    if let Some(ch) = a.clone().cholesky() {
        return Some(ch.solve(b));
    }
    let scale = a.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-12);
    let mut ridge = 1e-10 * scale;
    for _ in 0..30 {
        let mut r = a.clone();
        for i in 0..r.nrows() {
            r[(i, i)] += ridge;
        }
        if let Some(ch) = r.cholesky() {
            return Some(ch.solve(b));
        }
        ridge *= 10.0;
    }
    None
}

pub fn fit_cox(sample: &CensoredSample) -> Result<CoxFit> {
    fit_cox_with(sample, &CoxOptions::default())
}

pub fn fit_cox_with(sample: &CensoredSample, opts: &CoxOptions) -> Result<CoxFit> {
    if sample.n_events() == 0 {
        return Err(Error::AllCensored);
    }
    let p = sample.ncovariates();
    let center = sample.x().column_means();
    let ord = RiskOrder::new(sample.time());
    let mut beta = vec![0.0; p];
    let mut cur = derivs(sample, &ord, &center, &beta, true);
    let mut iterations = 0;
    let mut converged = cur.score.norm() <= opts.tolerance;

    while !converged && iterations < opts.max_iter {
        iterations += 1;
        let step = solve_spd(&cur.information, &cur.score).ok_or(Error::NonConvergence {
            model: "cox",
            iterations,
            gradient_norm: cur.score.norm(),
        })?;
        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let cand: Vec<f64> = beta.iter().zip(step.iter()).map(|(b, s)| b + scale * s).collect();
            if cand.iter().any(|b| b.abs() > opts.divergence_bound) {
                return Err(Error::MonotoneLikelihood {
                    bound: opts.divergence_bound,
                });
            }
            let next = derivs(sample, &ord, &center, &cand, true);
            if next.loglik.is_finite() && next.loglik >= cur.loglik - 1e-12 * cur.loglik.abs() {
                accepted = Some((cand, next));
                break;
            }
            scale *= 0.5;
        }
        let Some((cand, next)) = accepted else {
            break;
        };
        let step_norm = scale * step.norm();
        let beta_norm = beta.iter().map(|b| b * b).sum::<f64>().sqrt();
        beta = cand;
        cur = next;
        // Below the rounding floor of the score, a full Newton step that no
        // longer moves beta is as converged as this problem gets.
        converged = cur.score.norm() <= opts.tolerance || (scale == 1.0 && step_norm <= 1e-12 * (1.0 + beta_norm));
    }

    if !converged {
        return Err(Error::NonConvergence {
            model: "cox",
            iterations,
            gradient_norm: cur.score.norm(),
        });
    }
    let baseline = breslow_centered(sample, &ord, &center, &beta);
    Ok(CoxFit {
        beta,
        center,
        baseline,
        loglik: cur.loglik,
        converged,
        iterations,
        score_norm: cur.score.norm(),
    })
}

impl CoxFit {
    /// `(x - center)'β`.
    pub fn linear_predictor(&self, row: &[f64]) -> f64 {
        row.iter()
            .zip(&self.center)
            .zip(&self.beta)
            .map(|((v, c), b)| (v - c) * b)
            .sum()
    }

    /// `S(t | x) = exp(-H0(t) exp(η))`.
    pub fn survival(&self, t: f64, row: &[f64]) -> f64 {
        (-self.baseline.value_at(t) * self.linear_predictor(row).exp()).exp()
    }

    /// `S(t- | x)`.
    pub fn survival_left(&self, t: f64, row: &[f64]) -> f64 {
        (-self.baseline.left_limit(t) * self.linear_predictor(row).exp()).exp()
    }

    fn restricted_mean(&self, risk: f64, tau: f64) -> f64 {
        let times = self.baseline.times();
        let cum = self.baseline.values();
        let mut total = 0.0;
        let mut prev = 0.0f64;
        let mut surv = 1.0;
        for (k, &tk) in times.iter().enumerate() {
            let hi = tk.min(tau);
            if hi > prev {
                total += surv * (hi - prev);
                prev = hi;
            }
            if tk >= tau {
                return total;
            }
            surv = (-cum[k] * risk).exp();
            if surv == 0.0 {
                return total;
            }
        }
        if tau > prev {
            total += surv * (tau - prev);
        }
        total
    }

    fn median(&self, risk: f64) -> (f64, bool) {
        let times = self.baseline.times();
        for (k, &h) in self.baseline.values().iter().enumerate() {
            if (-h * risk).exp() <= 0.5 {
                return (times[k], true);
            }
        }
        (self.baseline.last_time().unwrap_or(0.0), false)
    }
}

/// Predictions `m(x)` from a converged Cox fit.
///
/// The conditional mean is the restricted mean `∫_0^τ S(t|x) dt`; the median
/// is the first jump time where `S(t|x) <= 0.5`, or the last event time when
/// the curve never gets there (counted and logged).
pub fn cox_predict(fit: &CoxFit, x: &Covariates, kind: PredictionKind) -> Result<PredictionVector> {
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
    let tau = match kind.horizon {
        HorizonPolicy::LargestEventTime => fit.baseline.last_time().unwrap_or(0.0),
        HorizonPolicy::Fixed(t) => t,
    };
    let mut cache: HashMap<u64, f64> = HashMap::new();
    let mut unreached = 0usize;
    let mut out = Vec::with_capacity(x.nrows());
    for row in x.rows() {
        let eta = fit.linear_predictor(row);
        let v = match cache.get(&eta.to_bits()) {
            Some(&v) => v,
            None => {
                let risk = eta.exp();
                let v = match kind.target {
                    PredictionTarget::ConditionalMean => fit.restricted_mean(risk, tau),
                    PredictionTarget::ConditionalMedian => {
                        let (m, reached) = fit.median(risk);
                        if !reached {
                            unreached += 1;
                        }
                        m
                    }
                };
                cache.insert(eta.to_bits(), v);
                v
            }
        };
        out.push(v);
    }
    if unreached > 0 {
        log::warn!("{unreached} distinct covariate patterns never reach S(t|x) <= 0.5; median set to last event time");
    }
    PredictionVector::new(out)
}
