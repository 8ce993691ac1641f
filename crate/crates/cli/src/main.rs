//! Command-line front end for the fair sequential-selection toolkit.
//!
//! Exit codes: 0 success, 1 input error, 2 infeasible / no fair policy.
//! Reports are JSON on stdout (or `--output`); wall-clock timing goes to
//! stderr so identical invocations produce bit-identical reports.

mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use fairsel::distributions::{BinaryJointPmf, CounterfactualModel, ScoreModel};
use fairsel::dp::{
    eo_constraint_residual, es_constraint_residual, feasibility_bound, solve_dp_policy, DpConfig,
    DpFairness, DpPolicy, DpPolicyJson,
};
use fairsel::ingest::{load, DataFormat, DatasetManifest, LoadedModel};
use fairsel::outcome::SelectionOutcome;
use fairsel::postprocess::{
    check_eo_base_rate, check_es_condition, check_near_optimality, evaluate_policy,
    solve_es_policy, FairnessTarget, PostProcessPolicy, PostProcessPolicyJson,
};
use fairsel::simulate::{simulate, Pipeline, SimConfig};
use fairsel::threshold::{
    search_dp_thresholds, search_thresholds, Fairness, SearchConfig, Threshold, ThresholdPair,
    TimeConstraint,
};

use report::{render_table, stamp_input, RunReport};

#[derive(Parser)]
#[command(
    name = "fairsel",
    version,
    about = "Fair sequential selection: equal-selection post-processing, private attributes, and score thresholds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Input dataset path.
    #[arg(long, global = true)]
    input: Option<PathBuf>,

    /// Dataset schema.
    #[arg(long, global = true, value_enum)]
    data_format: Option<FormatArg>,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Seed for simulation commands.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Report rendering.
    #[arg(long, global = true, value_enum, default_value_t = Render::Json)]
    render: Render,

    /// Declared score support, comma-separated (score formats only;
    /// inferred from the data when omitted).
    #[arg(long, global = true)]
    support: Option<String>,

    /// Group prior Pr{A=0}; required by the fico_cdf format.
    #[arg(long, global = true)]
    group_prior: Option<f64>,

    /// Additive pseudo-count for the frequency estimators (default 0).
    #[arg(long, global = true)]
    smoothing: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Render {
    Json,
    Table,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    BinarySamples,
    DpSamples,
    ScoreSamples,
    FicoCdf,
}

impl FormatArg {
    fn to_format(self) -> DataFormat {
        match self {
            FormatArg::BinarySamples => DataFormat::BinarySamples,
            FormatArg::DpSamples => DataFormat::DpSamples,
            FormatArg::ScoreSamples => DataFormat::ScoreSamples,
            FormatArg::FicoCdf => DataFormat::FicoCdf,
        }
    }

    fn name(self) -> &'static str {
        match self {
            FormatArg::BinarySamples => "binary_samples",
            FormatArg::DpSamples => "dp_samples",
            FormatArg::ScoreSamples => "score_samples",
            FormatArg::FicoCdf => "fico_cdf",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum BinaryTarget {
    Es,
    EsDemographic,
}

#[derive(Clone, Copy, ValueEnum)]
enum DpTarget {
    Es,
    Eo,
    None,
}

#[derive(Clone, Copy, ValueEnum)]
enum FairnessArg {
    Es,
    EsDemographic,
    Eo,
    Sp,
    None,
}

impl FairnessArg {
    fn to_fairness(self) -> Fairness {
        match self {
            FairnessArg::Es => Fairness::Es,
            FairnessArg::EsDemographic => Fairness::EsDemographic,
            FairnessArg::Eo => Fairness::Eo,
            FairnessArg::Sp => Fairness::Sp,
            FairnessArg::None => Fairness::None,
        }
    }

    fn name(self) -> &'static str {
        match self {
            FairnessArg::Es => "es",
            FairnessArg::EsDemographic => "es-demographic",
            FairnessArg::Eo => "eo",
            FairnessArg::Sp => "sp",
            FairnessArg::None => "none",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepVariable {
    Epsilon,
    Psi,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate a population model from the dataset and emit it.
    Estimate,
    /// Derive the accuracy-maximizing fair predictor from a binary
    /// classifier dataset.
    SolveBinary {
        #[arg(long, value_enum, default_value_t = BinaryTarget::Es)]
        fairness_target: BinaryTarget,
    },
    /// Derive the fair predictor when only randomized-response attributes
    /// are available at decision time.
    SolveDp {
        /// Privacy-loss parameter ε ≥ 0 (values above 700 behave exactly
        /// like the noiseless limit and are clamped).
        #[arg(long)]
        epsilon: f64,
        #[arg(long, value_enum, default_value_t = DpTarget::Es)]
        fairness_target: DpTarget,
    },
    /// Privacy level above which a non-trivial fair private policy is
    /// guaranteed to exist.
    Feasibility,
    /// Exhaustive group-threshold search on a score dataset.
    Thresholds {
        #[arg(long, value_enum, default_value_t = FairnessArg::Es)]
        fairness: FairnessArg,
        /// Fairness relaxation γ.
        #[arg(long, default_value_t = 0.01)]
        gamma: f64,
        /// Stopping-time horizon H (with --psi caps Pr{no selection in H steps}).
        #[arg(long)]
        horizon: Option<u32>,
        /// Stopping-time cap ψ.
        #[arg(long)]
        psi: Option<f64>,
        /// Emit a one-row CSV (for assembling result tables) instead of the
        /// JSON report.
        #[arg(long)]
        csv_row: bool,
    },
    /// Threshold search when decisions see randomized-response attributes.
    ThresholdsDp {
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.01)]
        gamma: f64,
    },
    /// Monte Carlo simulation of the sequential selection process.
    Simulate {
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        positions: u32,
        #[arg(long, default_value_t = 1_000_000)]
        max_steps: u64,
        /// Policy JSON file (binary or DP pipelines).
        #[arg(long)]
        policy_json: Option<PathBuf>,
        /// Group-0 threshold (score pipelines); a number or "above_max".
        #[arg(long)]
        tau0: Option<String>,
        /// Group-1 threshold (score pipelines).
        #[arg(long)]
        tau1: Option<String>,
        #[arg(long)]
        epsilon: Option<f64>,
        /// Write the stopping-time histogram CSV here.
        #[arg(long)]
        histogram_out: Option<PathBuf>,
    },
    /// Fairness diagnostics for a binary classifier dataset.
    Diagnose {
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Accuracy/selection sweep over ε (DP datasets) or ψ (score datasets),
    /// one CSV row per grid point for the es/eo/none targets.
    Sweep {
        #[arg(long, value_enum)]
        variable: SweepVariable,
        /// Comma-separated grid values.
        #[arg(long)]
        grid: String,
        /// γ for the ψ-sweep threshold searches.
        #[arg(long, default_value_t = 0.01)]
        gamma: f64,
        /// Horizon for the ψ-sweep time constraint.
        #[arg(long, default_value_t = 100)]
        horizon: u32,
    },
}

enum AppError {
    Lib(fairsel::Error),
    Usage(String),
    Io(String),
}

impl From<fairsel::Error> for AppError {
    fn from(e: fairsel::Error) -> Self {
        AppError::Lib(e)
    }
}

impl AppError {
    fn exit_code(&self) -> u8 {
        match self {
            AppError::Usage(_) | AppError::Io(_) => 1,
            AppError::Lib(e) => match e {
                fairsel::Error::EmptySamples
                | fairsel::Error::InvalidDistribution(_)
                | fairsel::Error::InputRow { .. }
                | fairsel::Error::InputFormat(_) => 1,
                fairsel::Error::Precondition(_)
                | fairsel::Error::NoFairPolicy(_)
                | fairsel::Error::NoSelection
                | fairsel::Error::InfeasibleSearch(_)
                | fairsel::Error::ContinuousReduction(_) => 2,
            },
        }
    }

    fn message(&self) -> String {
        match self {
            AppError::Lib(e) => e.to_string(),
            AppError::Usage(m) | AppError::Io(m) => m.clone(),
        }
    }
}

fn main() -> ExitCode {
    let started = Instant::now();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => {
            eprintln!("wall_clock_ms={}", started.elapsed().as_millis());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

fn command_echo() -> String {
    std::env::args().skip(1).collect::<Vec<_>>().join(" ")
}

fn parse_support(cli: &Cli) -> Result<Option<Vec<f64>>, AppError> {
    match &cli.support {
        None => Ok(None),
        Some(text) => {
            let mut values = Vec::new();
            for part in text.split(',') {
                let v: f64 = part.trim().parse().map_err(|_| {
                    AppError::Usage(format!("--support value {part:?} is not a number"))
                })?;
                values.push(v);
            }
            Ok(Some(values))
        }
    }
}

struct LoadedInput {
    model: LoadedModel<f64>,
    stamp: report::InputStamp,
}

fn load_input(cli: &Cli) -> Result<LoadedInput, AppError> {
    let path = cli
        .input
        .as_ref()
        .ok_or_else(|| AppError::Usage("--input is required for this command".into()))?;
    let format = cli
        .data_format
        .ok_or_else(|| AppError::Usage("--data-format is required for this command".into()))?;
    let manifest = DatasetManifest {
        path: path.clone(),
        format: format.to_format(),
        support: parse_support(cli)?,
        group_prior: cli.group_prior,
        smoothing: cli.smoothing,
    };
    let model = load(&manifest)?;
    let stamp = stamp_input(path, format.name())
        .map_err(|e| AppError::Io(format!("cannot stamp {}: {e}", path.display())))?;
    Ok(LoadedInput { model, stamp })
}

fn want_binary(model: LoadedModel<f64>) -> Result<BinaryJointPmf<f64>, AppError> {
    match model {
        LoadedModel::Binary(pmf) => Ok(pmf),
        LoadedModel::Counterfactual(m) => Ok(m.induced_binary_pmf()?),
        LoadedModel::Score(_) => Err(AppError::Usage(
            "this command needs a binary-classifier dataset".into(),
        )),
    }
}

fn want_score(model: LoadedModel<f64>) -> Result<ScoreModel<f64>, AppError> {
    match model {
        LoadedModel::Score(m) => Ok(m),
        _ => Err(AppError::Usage("this command needs a score dataset".into())),
    }
}

fn want_counterfactual(model: LoadedModel<f64>) -> Result<CounterfactualModel<f64>, AppError> {
    match model {
        LoadedModel::Counterfactual(m) => Ok(m),
        _ => Err(AppError::Usage(
            "this command needs a dp_samples dataset (a,y,r0,r1)".into(),
        )),
    }
}

fn outcome_json(outcome: &SelectionOutcome<f64>) -> Value {
    serde_json::to_value(outcome).expect("outcome serializes")
}

fn emit(cli: &Cli, text: &str) -> Result<(), AppError> {
    let canonical = if text.ends_with('\n') {
        text.to_string()
    } else {
        format!("{text}\n")
    };
    match &cli.output {
        Some(path) => std::fs::write(path, &canonical)
            .map_err(|e| AppError::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{canonical}");
            Ok(())
        }
    }
}

fn emit_report(cli: &Cli, report: &RunReport) -> Result<(), AppError> {
    let value = serde_json::to_value(report).expect("report serializes");
    let text = match cli.render {
        Render::Json => serde_json::to_string_pretty(&value).expect("report prints"),
        Render::Table => render_table(&value),
    };
    emit(cli, &text)
}

fn model_json(model: &LoadedModel<f64>) -> Value {
    match model {
        LoadedModel::Binary(pmf) => serde_json::to_value(pmf.to_json()).unwrap(),
        LoadedModel::Score(m) => {
            let mut cond = serde_json::Map::new();
            let mut prior = serde_json::Map::new();
            for a in 0..2 {
                for y in 0..2 {
                    prior.insert(format!("a{a}_y{y}"), json!(m.p_ay(a, y)));
                    cond.insert(format!("a{a}_y{y}"), json!(m.cond(a, y)));
                }
            }
            json!({
                "support": m.support(),
                "group_prior_a0": m.p_a(0),
                "prior": prior,
                "cond": cond,
            })
        }
        LoadedModel::Counterfactual(m) => {
            let mut tables = serde_json::Map::new();
            for a_tilde in 0..2 {
                let mut table = serde_json::Map::new();
                for a in 0..2 {
                    for y in 0..2 {
                        let row: Vec<f64> = (0..m.output_len())
                            .map(|j| m.joint(a_tilde, a, y, j))
                            .collect();
                        table.insert(format!("a{a}_y{y}"), json!(row));
                    }
                }
                tables.insert(format!("r{a_tilde}"), Value::Object(table));
            }
            json!({ "support": m.support(), "tables": tables })
        }
    }
}

fn parse_threshold(text: &str) -> Result<Threshold<f64>, AppError> {
    if text == "above_max" || text == "above-max" {
        return Ok(Threshold::AboveMax);
    }
    let v: f64 = text
        .parse()
        .map_err(|_| AppError::Usage(format!("threshold {text:?} is not a number or above_max")))?;
    Ok(Threshold::At(v))
}

fn run(cli: &Cli) -> Result<(), AppError> {
    match &cli.command {
        Command::Estimate => {
            let input = load_input(cli)?;
            let mut report = RunReport::new(command_echo());
            report.model = model_json(&input.model);
            report.input = Some(input.stamp);
            emit_report(cli, &report)
        }
        Command::SolveBinary { fairness_target } => {
            let input = load_input(cli)?;
            let pmf = want_binary(input.model)?;
            let target = match fairness_target {
                BinaryTarget::Es => FairnessTarget::Es,
                BinaryTarget::EsDemographic => FairnessTarget::EsDemographic,
            };
            let (policy, outcome) = solve_es_policy(&pmf, target)?;
            let mut report = RunReport::new(command_echo());
            report.input = Some(input.stamp);
            report.policy = serde_json::to_value(policy.to_json()).unwrap();
            report.outcome = outcome_json(&outcome);
            emit_report(cli, &report)
        }
        Command::SolveDp {
            epsilon,
            fairness_target,
        } => {
            let input = load_input(cli)?;
            let model = want_counterfactual(input.model)?;
            let config = DpConfig::new(*epsilon)?;
            let target = match fairness_target {
                DpTarget::Es => DpFairness::Es,
                DpTarget::Eo => DpFairness::Eo,
                DpTarget::None => DpFairness::Unconstrained,
            };
            let result = solve_dp_policy(&model, &config, target)?;
            let mut report = RunReport::new(command_echo());
            report.input = Some(input.stamp);
            report.policy = serde_json::to_value(result.policy.to_json()).unwrap();
            report.outcome = outcome_json(&result.outcome);
            report.diagnostics = json!({
                "epsilon": epsilon,
                "zero_policy": result.zero_policy,
                "es_residual": es_constraint_residual(&model, &result.policy, &config)?,
            });
            if result.zero_policy {
                let warning = "only the all-reject policy satisfies the fairness \
                               constraint at this privacy level; no applicant is ever accepted";
                report.warnings.push(warning.to_string());
                eprintln!("warning: {warning}");
            }
            emit_report(cli, &report)
        }
        Command::Feasibility => {
            let input = load_input(cli)?;
            let pmf = want_binary(input.model)?;
            let bound = feasibility_bound(&pmf);
            let mut report = RunReport::new(command_echo());
            report.input = Some(input.stamp);
            report.diagnostics = json!({
                "epsilon_threshold": bound,
                "sufficient_only": true,
            });
            if bound.is_none() {
                report.warnings.push(
                    "a qualified-and-accepted mass is zero for some group; the bound is infinite"
                        .into(),
                );
            }
            emit_report(cli, &report)
        }
        Command::Thresholds {
            fairness,
            gamma,
            horizon,
            psi,
            csv_row,
        } => {
            let input = load_input(cli)?;
            let model = want_score(input.model)?;
            let time_constraint = match (horizon, psi) {
                (Some(h), Some(p)) => Some(TimeConstraint {
                    horizon: *h,
                    psi: *p,
                }),
                (None, None) => None,
                _ => {
                    return Err(AppError::Usage(
                        "--horizon and --psi must be given together".into(),
                    ))
                }
            };
            let config = SearchConfig::new(fairness.to_fairness(), *gamma, time_constraint)?;
            let (pair, outcome) = search_thresholds(&model, &config)?;
            if *csv_row {
                let tau = |t: &Threshold<f64>| match t {
                    Threshold::At(v) => v.to_string(),
                    Threshold::AboveMax => "above_max".to_string(),
                };
                let mut csv =
                    String::from("fairness,gamma,horizon,psi,tau0,tau1,p_e0,p_e1,accuracy\n");
                csv.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{}\n",
                    fairness.name(),
                    gamma,
                    horizon.map(|h| h.to_string()).unwrap_or_default(),
                    psi.map(|p| p.to_string()).unwrap_or_default(),
                    tau(&pair.tau0),
                    tau(&pair.tau1),
                    outcome.p_e0,
                    outcome.p_e1,
                    outcome.accuracy,
                ));
                return emit(cli, &csv);
            }
            let mut report = RunReport::new(command_echo());
            report.input = Some(input.stamp);
            report.policy = serde_json::to_value(pair).unwrap();
            report.outcome = outcome_json(&outcome);
            report.diagnostics = json!({
                "gamma": gamma,
                "horizon": horizon,
                "psi": psi,
            });
            emit_report(cli, &report)
        }
        Command::ThresholdsDp { epsilon, gamma } => {
            let input = load_input(cli)?;
            let model = want_counterfactual(input.model)?;
            let config = DpConfig::new(*epsilon)?;
            let (pair, outcome) = search_dp_thresholds(&model, &config, *gamma)?;
            let mut report = RunReport::new(command_echo());
            report.input = Some(input.stamp);
            report.policy = serde_json::to_value(pair).unwrap();
            report.outcome = outcome_json(&outcome);
            report.diagnostics = json!({ "epsilon": epsilon, "gamma": gamma });
            emit_report(cli, &report)
        }
        Command::Simulate {
            trials,
            positions,
            max_steps,
            policy_json,
            tau0,
            tau1,
            epsilon,
            histogram_out,
        } => {
            let input = load_input(cli)?;
            let sim_config = SimConfig::new(*trials, cli.seed, *positions, *max_steps)?;
            let pair = match (tau0, tau1) {
                (Some(t0), Some(t1)) => Some(ThresholdPair {
                    tau0: parse_threshold(t0)?,
                    tau1: parse_threshold(t1)?,
                }),
                (None, None) => None,
                _ => {
                    return Err(AppError::Usage(
                        "--tau0 and --tau1 must be given together".into(),
                    ))
                }
            };
            let result = match (&input.model, pair, policy_json) {
                (LoadedModel::Binary(pmf), None, Some(path)) => {
                    let text = std::fs::read_to_string(path)
                        .map_err(|e| AppError::Io(format!("cannot read policy: {e}")))?;
                    let parsed: PostProcessPolicyJson<f64> = serde_json::from_str(&text)
                        .map_err(|e| AppError::Usage(format!("bad policy JSON: {e}")))?;
                    let policy = PostProcessPolicy::from_json(&parsed)?;
                    simulate(
                        &Pipeline::Binary {
                            pmf,
                            policy: &policy,
                        },
                        &sim_config,
                    )?
                }
                (LoadedModel::Counterfactual(model), None, Some(path)) => {
                    let eps = epsilon.ok_or_else(|| {
                        AppError::Usage("--epsilon is required for the DP pipeline".into())
                    })?;
                    let text = std::fs::read_to_string(path)
                        .map_err(|e| AppError::Io(format!("cannot read policy: {e}")))?;
                    let parsed: DpPolicyJson<f64> = serde_json::from_str(&text)
                        .map_err(|e| AppError::Usage(format!("bad policy JSON: {e}")))?;
                    let policy = DpPolicy::from_json(&parsed)?;
                    let config = DpConfig::new(eps)?;
                    simulate(
                        &Pipeline::Dp {
                            model,
                            policy: &policy,
                            config,
                        },
                        &sim_config,
                    )?
                }
                (LoadedModel::Score(model), Some(pair), None) => {
                    simulate(&Pipeline::Threshold { model, pair }, &sim_config)?
                }
                (LoadedModel::Counterfactual(model), Some(pair), None) => {
                    let eps = epsilon.ok_or_else(|| {
                        AppError::Usage("--epsilon is required for the DP pipeline".into())
                    })?;
                    let config = DpConfig::new(eps)?;
                    simulate(
                        &Pipeline::DpThreshold {
                            model,
                            pair,
                            config,
                        },
                        &sim_config,
                    )?
                }
                _ => {
                    return Err(AppError::Usage(
                        "pass --policy-json for classifier pipelines or --tau0/--tau1 \
                         for score pipelines"
                            .into(),
                    ))
                }
            };
            if let Some(path) = histogram_out {
                let mut csv = String::from("steps,count\n");
                for (steps, count) in &result.steps_histogram {
                    csv.push_str(&format!("{steps},{count}\n"));
                }
                std::fs::write(path, csv)
                    .map_err(|e| AppError::Io(format!("cannot write histogram: {e}")))?;
            }
            let mut report = RunReport::new(command_echo());
            report.input = Some(input.stamp);
            report.outcome = json!({
                "aggregate": result.aggregate,
                "per_position": result.per_position,
                "truncated_trials": result.truncated_trials,
                "analytically_no_selection": result.analytically_no_selection,
            });
            if result.analytically_no_selection {
                let warning = "the policy accepts nobody; simulation skipped";
                report.warnings.push(warning.into());
                eprintln!("warning: {warning}");
            }
            emit_report(cli, &report)
        }
        Command::Diagnose { tol } => {
            let input = load_input(cli)?;
            let pmf = want_binary(input.model)?;
            let es = check_es_condition(&pmf, *tol);
            let eo = check_eo_base_rate(&pmf, *tol);
            let near = check_near_optimality(&pmf, *tol);
            let bound = feasibility_bound(&pmf);
            let passthrough = evaluate_policy(&pmf, &PostProcessPolicy::passthrough()).ok();
            let mut report = RunReport::new(command_echo());
            report.input = Some(input.stamp);
            report.diagnostics = json!({
                "es_condition": es,
                "eo_base_rate": eo,
                "near_optimality": near,
                "privacy_feasibility_bound": bound,
                "passthrough_outcome": passthrough,
            });
            emit_report(cli, &report)
        }
        Command::Sweep {
            variable,
            grid,
            gamma,
            horizon,
        } => {
            let input = load_input(cli)?;
            let mut values = Vec::new();
            for part in grid.split(',') {
                let v: f64 = part.trim().parse().map_err(|_| {
                    AppError::Usage(format!("--grid value {part:?} is not a number"))
                })?;
                values.push(v);
            }
            let csv = match variable {
                SweepVariable::Epsilon => {
                    let model = want_counterfactual(input.model)?;
                    sweep_epsilon(&model, &values)?
                }
                SweepVariable::Psi => {
                    let model = want_score(input.model)?;
                    sweep_psi(&model, &values, *gamma, *horizon)?
                }
            };
            emit(cli, &csv)
        }
    }
}

fn sweep_header(variable: &str) -> String {
    let mut header = String::from(variable);
    for target in ["es", "eo", "none"] {
        for col in ["accuracy", "p_e0", "p_e1", "disparity"] {
            header.push_str(&format!(",{target}_{col}"));
        }
    }
    header
}

fn push_outcome(row: &mut String, outcome: Option<&SelectionOutcome<f64>>) {
    match outcome {
        Some(o) => row.push_str(&format!(
            ",{},{},{},{}",
            o.accuracy, o.p_e0, o.p_e1, o.disparity
        )),
        None => row.push_str(",,,,"),
    }
}

fn sweep_epsilon(model: &CounterfactualModel<f64>, grid: &[f64]) -> Result<String, AppError> {
    let mut out = sweep_header("epsilon");
    out.push('\n');
    for &eps in grid {
        let config = DpConfig::new(eps)?;
        let mut row = format!("{eps}");
        for target in [DpFairness::Es, DpFairness::Eo, DpFairness::Unconstrained] {
            let result = solve_dp_policy(model, &config, target)?;
            // Surface the residual of the active constraint as the
            // disparity column for the EO target.
            let mut outcome = result.outcome;
            if target == DpFairness::Eo && !result.zero_policy {
                outcome.disparity = eo_constraint_residual(model, &result.policy, &config)?;
            }
            push_outcome(&mut row, Some(&outcome));
        }
        out.push_str(&row);
        out.push('\n');
    }
    Ok(out)
}

fn sweep_psi(
    model: &ScoreModel<f64>,
    grid: &[f64],
    gamma: f64,
    horizon: u32,
) -> Result<String, AppError> {
    let mut out = sweep_header("psi");
    out.push('\n');
    for &psi in grid {
        let mut row = format!("{psi}");
        for fairness in [Fairness::Es, Fairness::Eo, Fairness::None] {
            let config = SearchConfig::new(fairness, gamma, Some(TimeConstraint { horizon, psi }))?;
            match search_thresholds(model, &config) {
                Ok((_, outcome)) => push_outcome(&mut row, Some(&outcome)),
                Err(fairsel::Error::InfeasibleSearch(_)) => push_outcome(&mut row, None),
                Err(e) => return Err(e.into()),
            }
        }
        out.push_str(&row);
        out.push('\n');
    }
    Ok(out)
}
