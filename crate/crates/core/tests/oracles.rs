//! Independent re-derivations of fitted values and weights.

use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use predacc::models::aft::{fit_aft, AftDistribution};
use predacc::pipeline::{censoring_weights, WeightScheme};
use predacc::weights::CoxCensoringModel;
use predacc::*;

/// Maximise a unimodal function on `[lo, hi]`.
fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    while hi - lo > 1e-12 {
        let a = hi - r * (hi - lo);
        let b = lo + r * (hi - lo);
        if f(a) < f(b) {
            lo = a;
        } else {
            hi = b;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn cox_censoring_weights_match_hand_breslow() {
    let t = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
    let delta = [1.0, 0.0, 1.0, 0.0, 1.0, 1.0];
    let x = [0.5, 1.0, 0.2, 0.0, 0.8, 0.3];
    let rows: Vec<Vec<f64>> = x.iter().map(|v| vec![*v]).collect();
    let s = validate_censored(&t, &delta, &rows).unwrap();

    // Censoring "events" at t = 2 (risk set rows 1..6) and t = 4 (rows 3..6).
    let risk = |beta: f64, from: usize| x[from..].iter().map(|v| (beta * v).exp()).sum::<f64>();
    let loglik = |beta: f64| beta * x[1] - risk(beta, 1).ln() + beta * x[3] - risk(beta, 3).ln();
    let beta = golden_max(loglik, -20.0, 20.0);

    let model = CoxCensoringModel::fit(&s).unwrap();
    assert!(
        (model.fit.beta[0] - beta).abs() < 1e-7,
        "{} vs {beta}",
        model.fit.beta[0]
    );

    let jump2 = |xi: f64| (beta * xi).exp() / risk(beta, 1);
    let jump4 = |xi: f64| (beta * xi).exp() / risk(beta, 3);
    let g = [
        1.0,
        0.0,
        (-jump2(x[2])).exp(),
        0.0,
        (-(jump2(x[4]) + jump4(x[4]))).exp(),
        (-(jump2(x[5]) + jump4(x[5]))).exp(),
    ];
    let raw: Vec<f64> = (0..6).map(|i| if delta[i] == 1.0 { 1.0 / g[i] } else { 0.0 }).collect();
    let total: f64 = raw.iter().sum();

    let direct = ipcw_weights_covariate(&s, &model).unwrap();
    let piped = censoring_weights(&s, WeightScheme::CoxCensoring).unwrap();
    for i in 0..6 {
        let want = raw[i] / total;
        assert!((direct[i] - want).abs() < 1e-7, "row {i}: {} vs {want}", direct[i]);
        assert_eq!(direct[i], piped[i]);
    }
}

#[test]
fn lognormal_aft_matches_grid_search() {
    let t = [1.2, 3.4, 0.8, 2.0, 2.9];
    let delta = [1.0, 1.0, 0.0, 1.0, 1.0];
    let x = [0.1, 0.6, 0.3, 0.9, 0.5];
    let rows: Vec<Vec<f64>> = x.iter().map(|v| vec![*v]).collect();
    let s = validate_censored(&t, &delta, &rows).unwrap();

    let std = Normal::new(0.0, 1.0).unwrap();
    let loglik = |p: [f64; 3]| -> f64 {
        let sigma = p[2].exp();
        (0..5)
            .map(|i| {
                let z = (t[i].ln() - p[0] - p[1] * x[i]) / sigma;
                if delta[i] == 1.0 {
                    std.ln_pdf(z) - sigma.ln()
                } else {
                    std.sf(z).ln()
                }
            })
            .sum()
    };

    let mut centre = [0.0, 0.0, -0.5];
    let mut half = [3.0, 5.0, 4.0];
    let steps = 10;
    while half.iter().any(|h| *h > 1e-8) {
        let mut best = (f64::NEG_INFINITY, centre);
        for i in 0..=steps {
            for j in 0..=steps {
                for k in 0..=steps {
                    let p = [
                        centre[0] - half[0] + 2.0 * half[0] * i as f64 / steps as f64,
                        centre[1] - half[1] + 2.0 * half[1] * j as f64 / steps as f64,
                        centre[2] - half[2] + 2.0 * half[2] * k as f64 / steps as f64,
                    ];
                    let v = loglik(p);
                    if v > best.0 {
                        best = (v, p);
                    }
                }
            }
        }
        centre = best.1;
        for h in &mut half {
            *h *= 0.4;
        }
    }

    let fit = fit_aft(&s, AftDistribution::Lognormal).unwrap();
    assert!(
        (fit.intercept - centre[0]).abs() < 1e-4,
        "{} vs {}",
        fit.intercept,
        centre[0]
    );
    assert!(
        (fit.beta[0] - centre[1]).abs() < 1e-4,
        "{} vs {}",
        fit.beta[0],
        centre[1]
    );
    assert!(
        (fit.scale - centre[2].exp()).abs() < 1e-4,
        "{} vs {}",
        fit.scale,
        centre[2].exp()
    );
}
