//! Command-line harness for training and benchmarking linear classifiers
//! under the PRBEP and ROCArea risks.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on runtime failures.

mod files;
mod run;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use smoothrank::smoothing::regularized_objective;
use smoothrank::solvers::SolverConfig;
use smoothrank::{exact_risk, parse_svmlight, Dataset, Loss};

use run::{describe_termination, test_metric, train_once, SolverKind, TrainSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum LossArg {
    Prbep,
    Rocarea,
}

impl From<LossArg> for Loss {
    fn from(v: LossArg) -> Self {
        match v {
            LossArg::Prbep => Loss::Prbep,
            LossArg::Rocarea => Loss::RocArea,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "smoothrank",
    about = "Train linear classifiers by directly optimizing PRBEP or ROCArea",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one configuration and write a trace and a model file.
    Train(TrainArgs),
    /// Run several solver configurations and summarize their traces.
    Compare(CompareArgs),
    /// Evaluate a saved model on a test set.
    Eval(EvalArgs),
}

#[derive(Args)]
struct CommonTrainArgs {
    /// Performance measure to optimize.
    #[arg(long, value_enum)]
    loss: LossArg,
    /// Training set in svmlight format.
    #[arg(long)]
    train: PathBuf,
    /// Optional test set; adds the test_metric trace column.
    #[arg(long)]
    test: Option<PathBuf>,
    /// Regularization weight.
    #[arg(long)]
    lambda: f64,
    /// Target accuracy; also sets the smoothing scale mu_hat = epsilon/D
    /// and the bundle gap.
    #[arg(long, default_value_t = 1e-3)]
    epsilon: f64,
    #[arg(long = "max-iter", default_value_t = 1000)]
    max_iter: usize,
    /// Gradient/plateau tolerance for the smoothed solvers.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// History length of the quasi-Newton recursion.
    #[arg(long = "lbfgs-buffer", default_value_t = 6)]
    lbfgs_buffer: usize,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    common: CommonTrainArgs,
    /// Minimization algorithm.
    #[arg(long, value_enum)]
    solver: SolverKind,
    /// Multiplier on mu_hat (smoothed solvers only).
    #[arg(long = "mu-mult")]
    mu_mult: Option<f64>,
    /// Trace CSV output path.
    #[arg(long, default_value = "trace.csv")]
    trace: PathBuf,
    /// Model output path.
    #[arg(long, default_value = "model.txt")]
    model: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    common: CommonTrainArgs,
    /// Comma-separated solvers to run.
    #[arg(long, default_value = "lbfgs,bundle")]
    solvers: String,
    /// Comma-separated mu multipliers for the smoothed solvers.
    #[arg(long = "mu-mults", default_value = "1,100,1000")]
    mu_mults: String,
    /// Directory for per-configuration traces and the summary CSV.
    #[arg(long = "out-dir", default_value = "compare-out")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long, value_enum)]
    loss: LossArg,
    /// Model file produced by `train`.
    #[arg(long)]
    model: PathBuf,
    /// Test set in svmlight format.
    #[arg(long)]
    test: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            // Help and version requests are not usage errors.
            return if err.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Train(args) => cmd_train(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Eval(args) => cmd_eval(args),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            if err.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

fn load_dataset(path: &Path) -> Result<Dataset> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_svmlight(&text).with_context(|| format!("parsing {}", path.display()))
}

fn solver_config(common: &CommonTrainArgs) -> SolverConfig {
    SolverConfig {
        max_iters: common.max_iter,
        tol: common.tol,
        lambda: common.lambda,
        lbfgs_buffer: common.lbfgs_buffer,
        epsilon: common.epsilon,
    }
}

fn cmd_train(args: TrainArgs) -> Result<ExitCode> {
    let train = load_dataset(&args.common.train)?;
    let test = args.common.test.as_deref().map(load_dataset).transpose()?;
    if args.solver == SolverKind::Bundle && args.mu_mult.is_some() {
        eprintln!("warning: the bundle solver minimizes the exact risk; --mu-mult is ignored");
    }
    let spec = TrainSpec {
        loss: args.common.loss.into(),
        solver: args.solver,
        train: &train,
        test: test.as_ref(),
        lambda: args.common.lambda,
        epsilon: args.common.epsilon,
        mu_multiplier: args.mu_mult.unwrap_or(1.0),
        cfg: solver_config(&args.common),
    };
    let outcome = train_once(&spec)?;
    files::write_trace(&args.trace, &outcome.result.trace)?;
    files::write_model(&args.model, &outcome.result.w)?;
    let last = outcome.result.trace.last().expect("trace has at least the initial point");
    if let Some(p) = &outcome.params {
        println!("mu={} (D={}, mu_mult={})", p.mu, p.prox_diameter, p.mu_multiplier);
    }
    print!(
        "final_primal_J={} iterations={} termination={}",
        last.primal_j,
        last.iter,
        describe_termination(outcome.result.termination)
    );
    match last.test_metric {
        Some(m) => println!(" test_metric={m}"),
        None => println!(),
    }
    Ok(ExitCode::SUCCESS)
}

struct CompareRow {
    config: String,
    cpu_to_target: Option<f64>,
    final_primal_j: f64,
    final_metric: Option<f64>,
}

fn cmd_compare(args: CompareArgs) -> Result<ExitCode> {
    let solvers = parse_solver_list(&args.solvers)?;
    let mu_mults = parse_mult_list(&args.mu_mults)?;
    let train = load_dataset(&args.common.train)?;
    let test = args.common.test.as_deref().map(load_dataset).transpose()?;
    fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("creating {}", args.out_dir.display()))?;

    let mut runs = Vec::new();
    for &solver in &solvers {
        let mults: &[f64] = if solver.is_smoothed() { &mu_mults } else { &[1.0] };
        for &mult in mults {
            let config = if solver.is_smoothed() {
                format!("{}_mu{}", solver.name(), mult)
            } else {
                solver.name().to_string()
            };
            let spec = TrainSpec {
                loss: args.common.loss.into(),
                solver,
                train: &train,
                test: test.as_ref(),
                lambda: args.common.lambda,
                epsilon: args.common.epsilon,
                mu_multiplier: mult,
                cfg: solver_config(&args.common),
            };
            let outcome =
                train_once(&spec).with_context(|| format!("configuration {config}"))?;
            let trace_path = args.out_dir.join(format!("trace_{config}.csv"));
            files::write_trace(&trace_path, &outcome.result.trace)?;
            runs.push((config, outcome.result.trace));
        }
    }

    // Best exact objective anyone reached defines the shared target.
    let j_star = runs
        .iter()
        .flat_map(|(_, trace)| trace.iter().map(|p| p.primal_j))
        .fold(f64::INFINITY, f64::min);
    let target = j_star + args.common.epsilon;
    let rows: Vec<CompareRow> = runs
        .iter()
        .map(|(config, trace)| {
            let cpu_to_target =
                trace.iter().find(|p| p.primal_j <= target).map(|p| p.cpu_ms);
            let last = trace.last().expect("nonempty trace");
            CompareRow {
                config: config.clone(),
                cpu_to_target,
                final_primal_j: last.primal_j,
                final_metric: last.test_metric,
            }
        })
        .collect();

    let mut summary = String::from("config,cpu_ms_to_target,final_primal_J,final_test_metric\n");
    println!("config cpu_ms_to_target final_primal_J final_test_metric");
    for row in &rows {
        let cpu = row.cpu_to_target.map(|v| v.to_string()).unwrap_or_default();
        let metric = row.final_metric.map(|v| v.to_string()).unwrap_or_default();
        summary.push_str(&format!(
            "{},{},{},{}\n",
            row.config, cpu, row.final_primal_j, metric
        ));
        println!(
            "{} {} {} {}",
            row.config,
            if cpu.is_empty() { "-" } else { &cpu },
            row.final_primal_j,
            if metric.is_empty() { "-" } else { &metric }
        );
    }
    let summary_path = args.out_dir.join("summary.csv");
    fs::write(&summary_path, summary)
        .with_context(|| format!("writing {}", summary_path.display()))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_eval(args: EvalArgs) -> Result<ExitCode> {
    let loss: Loss = args.loss.into();
    let mut w = files::read_model(&args.model)?;
    let test = load_dataset(&args.test)?;
    let metric = test_metric(loss, &w, &test)?;
    // Features beyond the model's range contribute zero; padding the
    // weights makes the strict risk evaluators applicable.
    if w.len() < test.num_features() {
        w.resize(test.num_features(), 0.0);
    }
    let risk = exact_risk(loss, &w, &test);
    let (j, _) = regularized_objective(0.0, &w, &risk);
    println!("metric {metric}");
    println!("exact_risk {j}");
    Ok(ExitCode::SUCCESS)
}

/// Usage-level validation of the comma lists; failures exit with code 1.
fn usage_bail(msg: String) -> anyhow::Error {
    UsageError(msg).into()
}

#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for UsageError {}

fn parse_solver_list(text: &str) -> Result<Vec<SolverKind>> {
    let mut out = Vec::new();
    for token in text.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let solver = match token {
            "lbfgs" => SolverKind::Lbfgs,
            "agm" => SolverKind::Agm,
            "bundle" => SolverKind::Bundle,
            other => return Err(usage_bail(format!("unknown solver `{other}`"))),
        };
        if !out.contains(&solver) {
            out.push(solver);
        }
    }
    if out.is_empty() {
        return Err(usage_bail("--solvers list is empty".to_string()));
    }
    Ok(out)
}

fn parse_mult_list(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for token in text.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let mult: f64 = token
            .parse()
            .map_err(|_| usage_bail(format!("bad mu multiplier `{token}`")))?;
        if !mult.is_finite() || mult < 1.0 {
            return Err(usage_bail(format!("mu multiplier must be >= 1, got {mult}")));
        }
        out.push(mult);
    }
    if out.is_empty() {
        return Err(usage_bail("--mu-mults list is empty".to_string()));
    }
    Ok(out)
}
