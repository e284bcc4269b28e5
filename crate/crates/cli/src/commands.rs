use std::path::Path;

use predacc::bootstrap::{bootstrap_accuracy, BootstrapConfig};
use predacc::exec::Execution;
use predacc::models::{ModelSpec, PredictionKind, PredictionTarget};
use predacc::pipeline::{self, Dataset, Predictor, WeightScheme};
use predacc::rng::stream;
use predacc::simulation::{
    approx_population, calibrate_censoring, run_scenario, AftWeibullDesign, CensoringDesign, CensoringFamily,
    CoxWeibullDesign, Design, PopulationConfig, ScenarioConfig,
};

use crate::error::{CliError, CliResult};
use crate::io::{emit, load, load_predictions, write_censored, write_complete};
use crate::report::{
    scenario_table, to_json, BootstrapSummary, Diagnostics, ModelSummary, PopulationDocument, ReportDocument,
    SimulationDocument, TOOL, VERSION,
};
use crate::{
    CensoringArg, DesignArg, EvaluateArgs, GenerateArgs, ModelArg, PopulationArgs, PredictArg, SimulateArgs, WeightsArg,
};

fn kind_of(p: PredictArg) -> PredictionKind {
    match p {
        PredictArg::Mean => PredictionKind::mean(),
        PredictArg::Median => PredictionKind::median(),
    }
}

fn spec_of(m: ModelArg) -> Option<ModelSpec> {
    match m {
        ModelArg::Ols => Some(ModelSpec::Ols),
        ModelArg::Cox => Some(ModelSpec::Cox),
        ModelArg::AftLognormal => Some(ModelSpec::AftLognormal),
        ModelArg::AftWeibull => Some(ModelSpec::AftWeibull),
        ModelArg::External => None,
    }
}

fn seed_or_random(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let s = rand::random();
        log::warn!("no seed given, using {s}");
        s
    })
}

pub fn evaluate(args: &EvaluateArgs, execution: Execution) -> CliResult<()> {
    let seed = seed_or_random(args.seed);
    let loaded = load(&args.input, args.data)?;
    let input = args.input.display().to_string();

    let model = args
        .model
        .unwrap_or(if args.predictions.is_some() || loaded.predictions.is_some() {
            ModelArg::External
        } else {
            match args.data {
                crate::io::DataKind::Censored => ModelArg::Cox,
                crate::io::DataKind::Complete => ModelArg::Ols,
            }
        });
    let predictor = match spec_of(model) {
        Some(spec) => Predictor::Model(spec),
        None => {
            let m = match &args.predictions {
                Some(p) => load_predictions(p)?,
                None => loaded.predictions.clone().ok_or_else(|| {
                    CliError::Input(format!(
                        "{input}: external predictions need a `prediction` column or --predictions"
                    ))
                })?,
            };
            if m.len() != loaded.data.len() {
                return Err(CliError::Input(format!(
                    "{} predictions for {} rows",
                    m.len(),
                    loaded.data.len()
                )));
            }
            Predictor::External(m)
        }
    };
    let model_name = match &predictor {
        Predictor::Model(s) => s.name(),
        Predictor::External(_) => "external",
    };
    let kind = kind_of(args.predict);
    let scheme = match args.weights {
        WeightsArg::Km => WeightScheme::KaplanMeier,
        WeightsArg::Cox => WeightScheme::CoxCensoring,
    };

    let eval = pipeline::evaluate(&loaded.data, &predictor, kind, scheme)
        .map_err(CliError::model(format!("{input}: evaluate")))?;
    let bootstrap = if args.bootstrap > 0 {
        let cfg = BootstrapConfig {
            replicates: args.bootstrap,
            level: args.level,
            seed,
            execution,
        };
        let b = bootstrap_accuracy(&loaded.data, &predictor, kind, scheme, &cfg)
            .map_err(CliError::model(format!("{input}: bootstrap")))?;
        Some(BootstrapSummary::from(&b))
    } else {
        None
    };
    let censoring_rate = match &loaded.data {
        Dataset::Censored(s) => predacc::censoring_rate(s),
        Dataset::Complete(_) => 0.0,
    };
    let doc = ReportDocument {
        tool: TOOL.into(),
        version: VERSION.into(),
        seed,
        input,
        data: args.data.name().into(),
        model: model_name.into(),
        predict: kind.target,
        weights: scheme,
        covariates: loaded.covariate_names,
        diagnostics: Diagnostics {
            n: loaded.data.len(),
            censoring_rate,
            clamped_weights: eval.clamped_weights,
            converged: eval.model.as_ref().map(|m| m.converged()),
        },
        fit: eval.model.as_ref().map(|m| ModelSummary::from_fit(model_name, m)),
        report: eval.report,
        bootstrap,
    };
    emit(args.out.as_deref(), &to_json(&doc))
}

pub fn read_config(path: &Path) -> CliResult<ScenarioConfig> {
    let shown = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(CliError::io(&shown))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    let config: ScenarioConfig = serde_path_to_error::deserialize(de).map_err(|e| CliError::Config {
        path: shown.clone(),
        message: format!("at `{}`: {}", e.path(), e.inner()),
    })?;
    config.validate().map_err(|e| CliError::Config {
        path: shown,
        message: match e {
            predacc::Error::InvalidArgument(m) => m,
            other => other.to_string(),
        },
    })?;
    Ok(config)
}

pub fn simulate(args: &SimulateArgs, execution: Execution) -> CliResult<()> {
    let mut config = read_config(&args.config)?;
    if let Some(r) = args.replications {
        if r == 0 {
            return Err(CliError::Input("--replications must be at least 1".into()));
        }
        config.replications = r;
    }
    let seed = seed_or_random(args.seed.or(config.seed));
    config.seed = Some(seed);
    let result = run_scenario(&config, seed, execution).map_err(CliError::model("simulate"))?;
    let table = scenario_table(&result);
    emit(args.out.as_deref(), &table)?;
    if let Some(out) = &args.out {
        let doc = SimulationDocument {
            tool: TOOL.into(),
            version: VERSION.into(),
            seed,
            config,
            result,
        };
        emit(Some(&out.with_extension("json")), &to_json(&doc))?;
    }
    Ok(())
}

pub fn population(args: &PopulationArgs, execution: Execution) -> CliResult<()> {
    let seed = seed_or_random(args.seed);
    let design = match args.design {
        DesignArg::CoxWeibull => Design::CoxWeibull(CoxWeibullDesign {
            beta: args.beta,
            nu: args.nu,
            n: args.mc_n,
        }),
        DesignArg::AftWeibull => Design::AftWeibull(AftWeibullDesign {
            beta: args.beta,
            sigma: args.sigma,
            n: args.mc_n,
            censoring: CensoringDesign::None,
        }),
    };
    let spec = spec_of(args.model)
        .ok_or_else(|| CliError::Input("population needs a fitted model, not external predictions".into()))?;
    let kind = kind_of(args.predict);
    let cfg = PopulationConfig {
        mc_reps: args.reps,
        mc_n: args.mc_n,
        seed,
        execution,
    };
    let estimate = approx_population(&design, spec, kind, &cfg).map_err(CliError::model("population"))?;
    let median = if kind.target == PredictionTarget::ConditionalMedian {
        " (median)"
    } else {
        ""
    };
    println!("design  {}", design.label());
    println!("model   {}{median}", spec.name());
    println!("rho2    {:.4} (se {:.4})", estimate.rho2, estimate.standard_error);
    println!(
        "lambda2 {:.4} (se {:.4})",
        estimate.lambda2, estimate.lambda2_standard_error
    );
    println!(
        "reps    {} x n={} ({} failed), seed {seed}",
        estimate.mc_reps, estimate.mc_n, estimate.failures
    );
    if let Some(out) = &args.out {
        let doc = PopulationDocument {
            tool: TOOL.into(),
            version: VERSION.into(),
            seed,
            design,
            model: spec.name().into(),
            predict: kind.target,
            estimate,
        };
        emit(Some(out), &to_json(&doc))?;
    }
    Ok(())
}

pub fn generate(args: &GenerateArgs) -> CliResult<()> {
    let seed = seed_or_random(args.seed);
    let family = match args.censoring {
        CensoringArg::None => None,
        CensoringArg::Independent => Some(CensoringFamily::Independent { shape: 1.0 }),
        CensoringArg::Dependent => Some(CensoringFamily::Dependent { theta_c: 4.0 }),
    };
    let design = match (args.design, family) {
        (DesignArg::CoxWeibull, None) => Design::CoxWeibull(CoxWeibullDesign {
            beta: args.beta,
            nu: args.nu,
            n: args.n,
        }),
        (DesignArg::CoxWeibull, Some(_)) => {
            return Err(CliError::Input("the cox-weibull design has no censoring".into()));
        }
        (DesignArg::AftWeibull, family) => {
            let d = AftWeibullDesign {
                beta: args.beta,
                sigma: args.sigma,
                n: args.n,
                censoring: CensoringDesign::None,
            };
            match family {
                Some(f) => {
                    let mut rng = stream(seed, &[u64::MAX]);
                    let c = calibrate_censoring(&d, f, args.rate, &mut rng).map_err(CliError::model("generate"))?;
                    Design::AftWeibull(c.design)
                }
                None => Design::AftWeibull(d),
            }
        }
    };
    let sample = design
        .generate(&mut stream(seed, &[0]))
        .map_err(CliError::model("generate"))?;
    let names = vec!["x".to_string()];
    let mut buf = Vec::new();
    if args.complete {
        if !sample.is_uncensored() {
            return Err(CliError::Input("--complete needs an uncensored design".into()));
        }
        let complete = predacc::CompleteSample::new(sample.time().to_vec(), sample.x().clone())
            .map_err(CliError::model("generate"))?;
        write_complete(&mut buf, &complete, &names)?;
    } else {
        write_censored(&mut buf, &sample, &names)?;
    }
    emit(
        args.out.as_deref(),
        &String::from_utf8(buf).expect("csv output is utf-8"),
    )
}
