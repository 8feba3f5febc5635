//! Accelerated gradient descent for strongly convex composites.

use super::{norm, SolverConfig, SolverError, SolverResult, TraceColumns, Termination, Tracer};

/// Minimizes `(lambda/2)|w|^2 + risk(w)` by accelerated gradient descent
/// with the constant-momentum scheme for strongly convex objectives.
///
/// `risk` evaluates the smooth part and its gradient; `l_risk` is a
/// Lipschitz constant for that gradient. Gradient steps use length
/// `1/(lambda + l_risk)` and momentum `(1 - sqrt(q)) / (1 + sqrt(q))` with
/// `q = lambda / (lambda + l_risk)`. Stops when the full gradient norm at
/// the iterate falls below `cfg.tol`, or at `cfg.max_iters`.
pub fn agm_minimize<F, C>(
    mut risk: F,
    l_risk: f64,
    lambda: f64,
    w0: &[f64],
    cfg: &SolverConfig,
    columns: C,
) -> Result<SolverResult, SolverError>
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
    C: FnMut(&[f64], f64) -> TraceColumns,
{
    cfg.validate()?;
    if !l_risk.is_finite() || l_risk <= 0.0 {
        return Err(SolverError::Config("Lipschitz constant must be positive"));
    }
    if !lambda.is_finite() || lambda <= 0.0 {
        return Err(SolverError::Config("lambda must be positive"));
    }
    let l_total = lambda + l_risk;
    let q = lambda / l_total;
    let momentum = (1.0 - q.sqrt()) / (1.0 + q.sqrt());
    let step = 1.0 / l_total;

    let mut tracer = Tracer::new(columns);
    let full = |w: &[f64], risk: &mut F| -> (f64, Vec<f64>) {
        let (v, mut g) = risk(w);
        let mut reg = 0.0;
        for (gi, wi) in g.iter_mut().zip(w) {
            reg += wi * wi;
            *gi += lambda * wi;
        }
        (v + 0.5 * lambda * reg, g)
    };

    let mut w = w0.to_vec();
    let (f0, g0) = full(&w, &mut risk);
    if !f0.is_finite() || g0.iter().any(|g| !g.is_finite()) {
        return Err(SolverError::NonFinite { iter: 0 });
    }
    tracer.record(0, &w, f0);
    if norm(&g0) <= cfg.tol {
        return Ok(SolverResult { w, trace: tracer.points, termination: Termination::GradientTol });
    }

    let mut lookahead = w.clone();
    let mut termination = Termination::MaxIters;
    for iter in 1..=cfg.max_iters {
        let (_, grad_y) = full(&lookahead, &mut risk);
        if grad_y.iter().any(|g| !g.is_finite()) {
            return Err(SolverError::NonFinite { iter });
        }
        let mut w_next = lookahead.clone();
        for (wn, gy) in w_next.iter_mut().zip(&grad_y) {
            *wn -= step * gy;
        }
        for ((la, wn), wp) in lookahead.iter_mut().zip(&w_next).zip(&w) {
            *la = wn + momentum * (wn - wp);
        }
        w = w_next;

        let (f_w, grad_w) = full(&w, &mut risk);
        if !f_w.is_finite() || grad_w.iter().any(|g| !g.is_finite()) {
            return Err(SolverError::NonFinite { iter });
        }
        tracer.record(iter, &w, f_w);
        if norm(&grad_w) <= cfg.tol {
            termination = Termination::GradientTol;
            break;
        }
    }
    Ok(SolverResult { w, trace: tracer.points, termination })
}
