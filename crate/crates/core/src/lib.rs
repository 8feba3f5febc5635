//! Training linear classifiers by directly optimizing the multivariate
//! performance measures PRBEP (precision/recall break-even point) and
//! ROCArea.
//!
//! Both empirical risks are non-smooth maximizations over candidate
//! labelings. This crate evaluates them two ways:
//!
//! - **Smoothed**: a quadratic prox term added in the dual makes the risk
//!   differentiable with a controlled, uniform deviation of at most
//!   `mu * D` from the exact value. Values and gradients cost
//!   O(n log n + nnz) via clipped dual solutions — a coupled scalar-
//!   multiplier search for PRBEP ([`prbep::solve_coupled_clip`]) and a
//!   sorted merge over pair potentials for ROCArea
//!   ([`rocarea::gamma_sums`]).
//! - **Exact**: separation searches over the maximizing labeling, also
//!   O(n log n), returning subgradients for cutting-plane methods.
//!
//! Three solvers minimize the regularized objective: L-BFGS and an
//! accelerated gradient method on the smoothed objective, and a
//! cutting-plane bundle method on the exact one. Slow brute-force
//! reference implementations live in [`oracle`] and anchor the test
//! suite.

pub mod data;
pub mod metrics;
pub mod oracle;
pub mod prbep;
pub mod rocarea;
pub mod smoothing;
pub mod solvers;

pub use data::{parse_svmlight, to_svmlight, Dataset, SparseVector};
pub use smoothing::{Loss, RiskEval, SmoothingParams};
pub use solvers::{SolverConfig, SolverResult, TracePoint};

/// Smoothed risk evaluation dispatched on the loss.
pub fn smoothed_risk(loss: Loss, w: &[f64], d: &Dataset, mu: f64) -> RiskEval {
    match loss {
        Loss::Prbep => prbep::smoothed_prbep_eval(w, d, mu),
        Loss::RocArea => rocarea::smoothed_rocarea_eval(w, d, mu),
    }
}

/// Exact risk evaluation dispatched on the loss.
pub fn exact_risk(loss: Loss, w: &[f64], d: &Dataset) -> RiskEval {
    match loss {
        Loss::Prbep => prbep::exact_prbep_risk(w, d),
        Loss::RocArea => rocarea::exact_rocarea_risk(w, d),
    }
}
