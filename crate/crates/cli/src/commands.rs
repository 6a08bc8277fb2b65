use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind as ClapKind;
use clap::CommandFactory;
use serde::Serialize;
use serde_json::Value;

use tailcone::evaluation::{
    detection_counts, feasibility_check, hellinger, roc_curve, stability, RocCurve, Violation,
};
use tailcone::experiment::{raw_distribution, run_experiment, ExperimentSpec, Metric, ModelChoice};
use tailcone::io::{load_sample, sample_to_csv, write_atomic};
use tailcone::simulators::{sample_max_mixture, true_mass, MaxMixtureSpec};
use tailcone::theory::trivariate_table;
use tailcone::{fit, Error, FitConfig, FitResult, MassDistribution, Method, SampleMatrix};

use crate::labels::to_letters;
use crate::{
    Cli, Command, EvalArgs, ExperimentArgs, FitArgs, InputArgs, SimulateArgs, StabilityArgs,
    TheoryTableArgs, TuningArgs,
};

pub enum Failure {
    Usage(clap::Error),
    Library(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Library(e)
    }
}

type Outcome = std::result::Result<(), Failure>;

fn usage(kind: ClapKind, msg: impl std::fmt::Display) -> Failure {
    Failure::Usage(Cli::command().error(kind, msg))
}

pub fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Fit(a) => fit_cmd(a, cli.letters),
        Command::Eval(a) => eval(a, cli.letters),
        Command::Stability(a) => stability_cmd(a),
        Command::TheoryTable(a) => theory_table(a),
        Command::Experiment(a) => experiment(a, cli.letters),
    }
}

/// Writes to `path` atomically, or to stdout when no path is given.
fn emit(path: Option<&Path>, bytes: &[u8]) -> Outcome {
    match path {
        Some(p) => write_atomic(p, bytes)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes).map_err(Error::from)?;
            out.flush().map_err(Error::from)?;
        }
    }
    Ok(())
}

fn json_bytes<T: Serialize>(
    value: &T,
    letters: Option<usize>,
) -> std::result::Result<Vec<u8>, Failure> {
    let mut v = serde_json::to_value(value).map_err(Error::from)?;
    if let Some(d) = letters {
        to_letters(&mut v, d);
    }
    let mut text = serde_json::to_string_pretty(&v).map_err(Error::from)?;
    text.push('\n');
    Ok(text.into_bytes())
}

fn read_json(path: &Path) -> std::result::Result<Value, Failure> {
    let text = std::fs::read_to_string(path).map_err(Error::from)?;
    Ok(serde_json::from_str(&text).map_err(Error::from)?)
}

fn parse_model(text: &str) -> std::result::Result<ModelChoice, Failure> {
    text.parse::<ModelChoice>().map_err(|e| {
        usage(
            ClapKind::InvalidValue,
            format!("invalid value for '--model': {e}"),
        )
    })
}

/// Fit configuration from the tuning flags; `sweep` marks commands that vary
/// the tuning value themselves.
fn build_config(t: &TuningArgs, sweep: bool) -> std::result::Result<FitConfig, Failure> {
    let method = if t.method == 1 {
        Method::One
    } else {
        Method::Two
    };
    if sweep {
        for (flag, given) in [("--p", t.p.is_some()), ("--delta", t.delta.is_some())] {
            if given {
                return Err(usage(
                    ClapKind::ArgumentConflict,
                    format!("the argument '{flag}' cannot be used with 'stability' (the grid sets the tuning value)"),
                ));
            }
        }
    }
    match (method, t.p, t.delta) {
        (Method::Two, Some(_), _) => return Err(usage(
            ClapKind::ArgumentConflict,
            "the argument '--p' cannot be used with '--method 2' (method 2 is tuned by '--delta')",
        )),
        (Method::One, _, Some(_)) => return Err(usage(
            ClapKind::ArgumentConflict,
            "the argument '--delta' cannot be used with '--method 1' (method 1 is tuned by '--p')",
        )),
        _ => {}
    }
    let mut cfg = FitConfig::for_method(method);
    if let Some(v) = t.p {
        cfg.p = v;
    }
    if let Some(v) = t.delta {
        cfg.delta = v;
    }
    if let Some(v) = t.u_quantile {
        cfg.u_quantile = v;
    }
    if let Some(v) = t.q_quantile {
        cfg.q_quantile = v;
    }
    if let Some(v) = t.pi {
        cfg.pi = v;
    }
    if let Some(v) = t.m {
        cfg.m = v;
    }
    if let Some(v) = t.seed {
        cfg.seed = v;
    }
    cfg.validate()
        .map_err(|e| usage(ClapKind::InvalidValue, e))?;
    Ok(cfg)
}

fn load(input: &InputArgs) -> std::result::Result<SampleMatrix, Failure> {
    let path = input.data.as_deref().ok_or_else(|| {
        usage(
            ClapKind::MissingRequiredArgument,
            "the following required arguments were not provided:\n  <DATA>",
        )
    })?;
    Ok(load_sample(path, input.header, input.margins.into())?)
}

#[derive(Serialize)]
struct Sidecar<'a> {
    model: &'a MaxMixtureSpec,
    truth: &'a MassDistribution,
    n: usize,
    seed: u64,
}

fn simulate(a: &SimulateArgs) -> Outcome {
    let spec = match (&a.model, &a.spec) {
        (Some(m), _) => parse_model(m)?.resolve(a.seed)?,
        (None, Some(path)) => serde_json::from_value(read_json(path)?).map_err(Error::from)?,
        (None, None) => unreachable!("clap requires --model or --spec"),
    };
    let truth = true_mass(&spec)?;
    let x = sample_max_mixture(a.n, &spec, a.seed)?;
    let sidecar_path: PathBuf = a
        .sidecar
        .clone()
        .unwrap_or_else(|| a.out.with_extension("json"));
    let sidecar = Sidecar {
        model: &spec,
        truth: &truth,
        n: a.n,
        seed: a.seed,
    };
    write_atomic(&a.out, &sample_to_csv(&x)?)?;
    write_atomic(&sidecar_path, &json_bytes(&sidecar, None)?)?;
    Ok(())
}

fn fit_cmd(a: &FitArgs, letters: bool) -> Outcome {
    let cfg = build_config(&a.tuning, false)?;
    let x = load(&a.input)?;
    let result = fit(&x, &cfg)?;
    emit(
        a.out.as_deref(),
        &json_bytes(&result, letters.then_some(result.d))?,
    )
}

#[derive(Serialize)]
struct FitScore {
    source: String,
    method: Method,
    hellinger: f64,
    roc: RocCurve,
    violations: Vec<Violation>,
}

#[derive(Serialize)]
struct EvalReport {
    truth: MassDistribution,
    count_pi: f64,
    fits: Vec<FitScore>,
    detection_counts: BTreeMap<String, usize>,
}

/// Known masses from either a mass JSON file or a simulation sidecar.
fn read_truth(path: &Path) -> std::result::Result<MassDistribution, Failure> {
    let mut v = read_json(path)?;
    if let Some(t) = v.get_mut("truth") {
        v = t.take();
    }
    Ok(serde_json::from_value(v).map_err(Error::from)?)
}

fn eval(a: &EvalArgs, letters: bool) -> Outcome {
    let truth = read_truth(&a.truth)?;
    let charged = truth.charged().collect();
    let mut results = Vec::with_capacity(a.fits.len());
    let mut fits = Vec::with_capacity(a.fits.len());
    for path in &a.fits {
        let text = std::fs::read_to_string(path).map_err(Error::from)?;
        let r = FitResult::from_json(&text)?;
        if r.d != truth.dim() {
            return Err(Error::DimensionMismatch {
                expected: truth.dim(),
                found: r.d,
            }
            .into());
        }
        fits.push(FitScore {
            source: path.display().to_string(),
            method: r.config.method,
            hellinger: hellinger(&r.masses, &truth)?,
            roc: roc_curve(&raw_distribution(&r)?, &charged)?,
            violations: feasibility_check(&r.masses),
        });
        results.push(r);
    }
    let counts = detection_counts(&results, a.count_pi)?
        .into_iter()
        .map(|(c, k)| (c.to_string(), k))
        .collect();
    let report = EvalReport {
        truth: truth.clone(),
        count_pi: a.count_pi,
        fits,
        detection_counts: counts,
    };
    emit(
        a.out.as_deref(),
        &json_bytes(&report, letters.then_some(truth.dim()))?,
    )
}

fn grid_values(a: &StabilityArgs) -> std::result::Result<Vec<f64>, Failure> {
    if let Some(g) = &a.grid {
        return Ok(g.clone());
    }
    if a.grid_step.is_nan() || a.grid_step <= 0.0 || a.grid_to < a.grid_from {
        return Err(usage(
            ClapKind::InvalidValue,
            "'--grid-step' must be positive and '--grid-to' at least '--grid-from'",
        ));
    }
    let steps = ((a.grid_to - a.grid_from) / a.grid_step + 1e-9).floor() as usize;
    Ok((0..=steps)
        .map(|k| a.grid_from + k as f64 * a.grid_step)
        .collect())
}

fn stability_cmd(a: &StabilityArgs) -> Outcome {
    let cfg = build_config(&a.tuning, true)?;
    let grid = grid_values(a)?;
    for &g in &grid {
        cfg.with_tuning(g)
            .validate()
            .map_err(|e| usage(ClapKind::InvalidValue, format!("grid value {g}: {e}")))?;
    }
    let x = load(&a.input)?;
    let table = stability(&x, &cfg, &grid, a.replicates, cfg.pi)?;
    let mut bytes = Vec::new();
    table.write_csv(&mut bytes)?;
    emit(a.out.as_deref(), &bytes)
}

fn theory_table(a: &TheoryTableArgs) -> Outcome {
    let rows = trivariate_table(a.alpha, a.delta).map_err(|e| usage(ClapKind::InvalidValue, e))?;
    let mut text = String::from("case,tau_1,tau_2,tau_3,tau_12,tau_13,tau_23,tau_123\n");
    for r in rows {
        text.push_str(r.case);
        for t in r.taus {
            text.push_str(&format!(",{t}"));
        }
        text.push('\n');
    }
    emit(a.out.as_deref(), text.as_bytes())
}

fn parse_metric(name: &str) -> std::result::Result<Metric, Failure> {
    match name.trim() {
        "hellinger" => Ok(Metric::Hellinger),
        "auc" => Ok(Metric::Auc),
        "counts" => Ok(Metric::Counts),
        other => Err(usage(
            ClapKind::InvalidValue,
            format!(
                "invalid value '{other}' for '--metrics' [possible values: hellinger, auc, counts]"
            ),
        )),
    }
}

fn experiment(a: &ExperimentArgs, letters: bool) -> Outcome {
    let spec = match (&a.model, &a.spec) {
        (_, Some(path)) => serde_json::from_value(read_json(path)?).map_err(Error::from)?,
        (Some(m), None) => {
            let replicates = if a.full { 100 } else { a.replicates };
            let mut spec = ExperimentSpec::new(parse_model(m)?, a.n, replicates, a.seed);
            let mut methods = a.methods.clone();
            methods.dedup();
            spec.methods = methods
                .iter()
                .map(|&m| FitConfig::for_method(if m == 1 { Method::One } else { Method::Two }))
                .collect();
            if let Some(names) = &a.metrics {
                spec.metrics = names
                    .iter()
                    .map(|n| parse_metric(n))
                    .collect::<std::result::Result<_, _>>()?;
            }
            spec.count_pi = a.count_pi;
            spec
        }
        (None, None) => unreachable!("clap requires --model or --spec"),
    };
    let report = run_experiment(&spec)?;
    std::fs::create_dir_all(&a.out_dir).map_err(Error::from)?;
    report.write_to(&a.out_dir)?;
    emit(
        None,
        &json_bytes(&report.summaries, letters.then_some(report.truth.dim()))?,
    )
}
