//! Censoring-rate calibration for the Weibull AFT designs.
//!
//! The free parameter (`scale` for independent censoring, `gamma_c` for
//! dependent censoring) is found by bisection on the Monte Carlo censoring
//! rate over a fixed set of calibration draws. The rate is averaged in its
//! conditional form `P(C < Y | Y, x)`, which is smooth and strictly monotone
//! in the parameter, so bisection converges to the draw-set root exactly.

use rand::Rng;

use super::design::{AftWeibullDesign, CensoringDesign};
use crate::error::{Error, Result};

pub const CALIBRATION_DRAWS: usize = 20_000;
const MAX_BRACKET_STEPS: usize = 60;
const MAX_BISECTION_STEPS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub design: AftWeibullDesign,
    /// Censoring rate of the calibrated design on the calibration draws.
    pub achieved_rate: f64,
}

/// Which parameter the bisection moves; only the variant matters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CensoringFamily {
    Independent { shape: f64 },
    Dependent { theta_c: f64 },
}

impl CensoringFamily {
    fn with_parameter(self, v: f64) -> CensoringDesign {
        match self {
            CensoringFamily::Independent { shape } => CensoringDesign::Independent { shape, scale: v.exp() },
            CensoringFamily::Dependent { theta_c } => CensoringDesign::Dependent { gamma_c: v, theta_c },
        }
    }

    pub fn of(c: CensoringDesign) -> Option<Self> {
        match c {
            CensoringDesign::None => None,
            CensoringDesign::Independent { shape, .. } => Some(CensoringFamily::Independent { shape }),
            CensoringDesign::Dependent { theta_c, .. } => Some(CensoringFamily::Dependent { theta_c }),
        }
    }
}

/// Expected censoring probability averaged over `(x, log Y)` draws.
fn conditional_rate(draws: &[(f64, f64)], censoring: CensoringDesign) -> f64 {
    let total: f64 = match censoring {
        CensoringDesign::None => 0.0,
        CensoringDesign::Independent { shape, scale } => draws
            .iter()
            .map(|&(_, ly)| -(-((ly - scale.ln()) * shape).exp()).exp_m1())
            .sum(),
        CensoringDesign::Dependent { gamma_c, theta_c } => draws
            .iter()
            .map(|&(x, ly)| -(-((ly - gamma_c * x) / theta_c).exp()).exp_m1())
            .sum(),
    };
    total / draws.len() as f64
}

/// Monte Carlo censoring rate of `design` using `draws` fresh samples.
pub fn expected_censoring_rate<R: Rng + ?Sized>(design: &AftWeibullDesign, draws: usize, rng: &mut R) -> f64 {
    let sample: Vec<(f64, f64)> = (0..draws).map(|_| design.draw_event(rng)).collect();
    conditional_rate(&sample, design.censoring)
}

/// Tune the censoring parameter of `design` so the censoring rate hits
/// `target`. `family` picks the censoring mechanism; a zero target turns
/// censoring off.
pub fn calibrate_censoring<R: Rng + ?Sized>(
    design: &AftWeibullDesign,
    family: CensoringFamily,
    target: f64,
    rng: &mut R,
) -> Result<Calibration> {
    if !(0.0..1.0).contains(&target) {
        return Err(Error::InvalidArgument(format!(
            "target censoring rate {target} not in [0, 1)"
        )));
    }
    if target == 0.0 {
        return Ok(Calibration {
            design: AftWeibullDesign {
                censoring: CensoringDesign::None,
                ..*design
            },
            achieved_rate: 0.0,
        });
    }
    let draws: Vec<(f64, f64)> = (0..CALIBRATION_DRAWS).map(|_| design.draw_event(rng)).collect();
    // rate is decreasing in the parameter for both families
    let rate = |v: f64| conditional_rate(&draws, family.with_parameter(v));

    let mut lo = -1.0;
    let mut hi = 1.0;
    let mut steps = 0;
    while rate(lo) < target {
        lo = 2.0 * lo - 1.0;
        steps += 1;
        if steps > MAX_BRACKET_STEPS {
            return Err(Error::CalibrationFailure(format!(
                "rate {target} unreachable from above"
            )));
        }
    }
    steps = 0;
    while rate(hi) > target {
        hi = 2.0 * hi + 1.0;
        steps += 1;
        if steps > MAX_BRACKET_STEPS {
            return Err(Error::CalibrationFailure(format!(
                "rate {target} unreachable from below"
            )));
        }
    }
    for _ in 0..MAX_BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if rate(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let v = 0.5 * (lo + hi);
    let achieved_rate = rate(v);
    if (achieved_rate - target).abs() > 0.005 {
        return Err(Error::CalibrationFailure(format!(
            "achieved rate {achieved_rate} too far from {target}"
        )));
    }
    Ok(Calibration {
        design: AftWeibullDesign {
            censoring: family.with_parameter(v),
            ..*design
        },
        achieved_rate,
    })
}
