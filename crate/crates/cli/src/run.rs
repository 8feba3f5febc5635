//! Shared training runner used by the `train` and `compare` subcommands.

use anyhow::{Context, Result};
use smoothrank::data::scores_zero_extended;
use smoothrank::metrics::{prbep_metric, rocarea_metric};
use smoothrank::smoothing::regularized_objective;
use smoothrank::solvers::{
    agm_minimize, bundle_minimize, lbfgs_minimize, SolverConfig, TraceColumns, Termination,
};
use smoothrank::{exact_risk, smoothed_risk, Dataset, Loss, SmoothingParams, SolverResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SolverKind {
    Lbfgs,
    Agm,
    Bundle,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Lbfgs => "lbfgs",
            SolverKind::Agm => "agm",
            SolverKind::Bundle => "bundle",
        }
    }

    pub fn is_smoothed(self) -> bool {
        !matches!(self, SolverKind::Bundle)
    }
}

pub struct TrainSpec<'a> {
    pub loss: Loss,
    pub solver: SolverKind,
    pub train: &'a Dataset,
    pub test: Option<&'a Dataset>,
    pub lambda: f64,
    pub epsilon: f64,
    pub mu_multiplier: f64,
    pub cfg: SolverConfig,
}

pub struct TrainOutcome {
    pub result: SolverResult,
    /// Smoothing setup, absent for the cutting-plane solver.
    pub params: Option<SmoothingParams>,
}

pub fn test_metric(loss: Loss, w: &[f64], test: &Dataset) -> Result<f64> {
    let s = scores_zero_extended(w, test);
    let metric = match loss {
        Loss::Prbep => prbep_metric(&s, test.labels()),
        Loss::RocArea => rocarea_metric(&s, test.labels()),
    };
    metric.with_context(|| format!("computing the {} metric on the test set", loss.name()))
}

/// Runs one (loss, solver, mu) configuration. Every trace row carries the
/// exact regularized objective, so traces from different solvers are
/// directly comparable; smoothed solvers additionally record their own
/// objective, and the test metric is filled when a test set is given.
pub fn train_once(spec: &TrainSpec) -> Result<TrainOutcome> {
    let d = spec.train;
    d.require_both_classes().context("training data")?;
    if let Some(test) = spec.test {
        // Surface metric preconditions before spending solver time.
        test_metric(spec.loss, &vec![0.0; d.num_features()], test).context("test data")?;
    }
    let loss = spec.loss;
    let lambda = spec.lambda;

    let exact_j = move |w: &[f64], d: &Dataset| -> f64 {
        regularized_objective(lambda, w, &exact_risk(loss, w, d)).0
    };

    let w0 = vec![0.0; d.num_features()];
    match spec.solver {
        SolverKind::Bundle => {
            // The bundle already minimizes the exact objective; reuse its
            // value instead of re-evaluating the risk.
            let columns = |w: &[f64], value: f64| TraceColumns {
                primal_j: value,
                smooth_j: None,
                test_metric: spec.test.map(|t| test_metric(loss, w, t).unwrap_or(f64::NAN)),
            };
            let result =
                bundle_minimize(|w: &[f64]| exact_risk(loss, w, d), &spec.cfg, &w0, columns)
                    .context("bundle solver")?;
            Ok(TrainOutcome { result, params: None })
        }
        SolverKind::Lbfgs => {
            let params = SmoothingParams::new(loss, d, spec.epsilon, spec.mu_multiplier)?;
            let mu = params.mu;
            let columns = |w: &[f64], value: f64| TraceColumns {
                primal_j: exact_j(w, d),
                smooth_j: Some(value),
                test_metric: spec.test.map(|t| test_metric(loss, w, t).unwrap_or(f64::NAN)),
            };
            let objective = |w: &[f64]| {
                let risk = smoothed_risk(loss, w, d, mu);
                regularized_objective(lambda, w, &risk)
            };
            let result =
                lbfgs_minimize(objective, &w0, &spec.cfg, columns).context("lbfgs solver")?;
            Ok(TrainOutcome { result, params: Some(params) })
        }
        SolverKind::Agm => {
            let params = SmoothingParams::new(loss, d, spec.epsilon, spec.mu_multiplier)?;
            let mu = params.mu;
            let columns = |w: &[f64], value: f64| TraceColumns {
                primal_j: exact_j(w, d),
                smooth_j: Some(value),
                test_metric: spec.test.map(|t| test_metric(loss, w, t).unwrap_or(f64::NAN)),
            };
            let risk_part = |w: &[f64]| {
                let risk = smoothed_risk(loss, w, d, mu);
                (risk.value, risk.gradient)
            };
            let result = agm_minimize(
                risk_part,
                params.lipschitz(),
                lambda,
                &w0,
                &spec.cfg,
                columns,
            )
            .context("accelerated gradient solver")?;
            Ok(TrainOutcome { result, params: Some(params) })
        }
    }
}

pub fn describe_termination(t: Termination) -> &'static str {
    match t {
        Termination::GradientTol => "gradient-tolerance",
        Termination::ObjectivePlateau => "objective-plateau",
        Termination::GapReached => "gap-reached",
        Termination::MaxIters => "max-iterations",
        Termination::LineSearchStalled => "line-search-stalled",
    }
}
