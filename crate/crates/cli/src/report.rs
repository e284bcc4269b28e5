//! JSON report documents and CSV tables.

use serde::{Deserialize, Serialize};

use predacc::bootstrap::BootstrapResult;
use predacc::models::{FittedModel, PredictionTarget};
use predacc::pipeline::WeightScheme;
use predacc::simulation::{PopulationEstimate, ScenarioConfig, ScenarioResult};
use predacc::AccuracyReport;

pub const TOOL: &str = "predacc";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub model: String,
    pub intercept: Option<f64>,
    pub coefficients: Vec<f64>,
    /// AFT scale σ.
    pub scale: Option<f64>,
    pub loglik: Option<f64>,
    pub iterations: Option<usize>,
    pub converged: bool,
}

impl ModelSummary {
    pub fn from_fit(name: &str, fit: &FittedModel) -> Self {
        match fit {
            FittedModel::Ols(f) => Self {
                model: name.into(),
                intercept: Some(f.intercept),
                coefficients: f.coefficients.clone(),
                scale: None,
                loglik: None,
                iterations: None,
                converged: true,
            },
            FittedModel::Cox(f) => Self {
                model: name.into(),
                intercept: None,
                coefficients: f.beta.clone(),
                scale: None,
                loglik: Some(f.loglik),
                iterations: Some(f.iterations),
                converged: f.converged,
            },
            FittedModel::Aft(f) => Self {
                model: name.into(),
                intercept: Some(f.intercept),
                coefficients: f.beta.clone(),
                scale: Some(f.scale),
                loglik: Some(f.loglik),
                iterations: Some(f.iterations),
                converged: f.converged,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSummary {
    pub replicates: usize,
    pub level: f64,
    pub failures: usize,
    pub ci_r2: (f64, f64),
    pub ci_l2: (f64, f64),
    pub sd_r2: f64,
    pub sd_l2: f64,
}

impl From<&BootstrapResult> for BootstrapSummary {
    fn from(b: &BootstrapResult) -> Self {
        Self {
            replicates: b.replicates.len() + b.failures,
            level: b.level,
            failures: b.failures,
            ci_r2: b.ci_r2,
            ci_l2: b.ci_l2,
            sd_r2: b.sd_r2(),
            sd_l2: b.sd_l2(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub n: usize,
    pub censoring_rate: f64,
    pub clamped_weights: usize,
    pub converged: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub input: String,
    pub data: String,
    pub model: String,
    pub predict: PredictionTarget,
    pub weights: WeightScheme,
    pub covariates: Vec<String>,
    pub report: AccuracyReport,
    pub fit: Option<ModelSummary>,
    pub bootstrap: Option<BootstrapSummary>,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationDocument {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub config: ScenarioConfig,
    pub result: ScenarioResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationDocument {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub design: predacc::simulation::Design,
    pub model: String,
    pub predict: PredictionTarget,
    pub estimate: PopulationEstimate,
}

pub fn to_json<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("report documents are always serializable");
    s.push('\n');
    s
}

/// `v` to four significant digits.
pub fn sig4(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let rounded: f64 = format!("{v:.3e}").parse().unwrap_or(v);
    let exp = rounded.abs().log10().floor() as i32;
    let decimals = (3 - exp).max(0) as usize;
    format!("{rounded:.decimals$}")
}

pub const TABLE_HEADER: &str = "design,censoring_rate,n,model,measure,mean,sd,replications,failures";

fn quote(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// One row per cell and measure.
pub fn scenario_table(result: &ScenarioResult) -> String {
    let mut out = String::from(TABLE_HEADER);
    out.push('\n');
    for cell in &result.cells {
        for &m in &result.measures {
            let s = cell.measure(m);
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                quote(&cell.design),
                sig4(cell.censoring_rate),
                cell.n,
                quote(&cell.model),
                m.name(),
                sig4(s.mean),
                sig4(s.sd),
                cell.replications,
                cell.failures
            ));
        }
    }
    out
}
