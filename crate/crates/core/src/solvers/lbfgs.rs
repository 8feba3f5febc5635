//! Limited-memory BFGS with a strong Wolfe line search.

use std::collections::VecDeque;

use super::{dot, norm, SolverConfig, SolverError, SolverResult, TraceColumns, Termination, Tracer};

const WOLFE_C1: f64 = 1e-4;
const WOLFE_C2: f64 = 0.9;
const MAX_BRACKET: usize = 20;
const MAX_ZOOM: usize = 30;

struct LinePoint {
    alpha: f64,
    phi: f64,
    dphi: f64,
    grad: Vec<f64>,
}

/// Cubic minimizer of the interpolant through two (alpha, phi, dphi)
/// samples, safeguarded into the bounding interval. Falls back to
/// bisection when the cubic has no interior minimizer or inputs are
/// non-finite.
fn cubic_interpolate(a1: f64, f1: f64, g1: f64, a2: f64, f2: f64, g2: f64) -> f64 {
    let (lo, hi) = if a1 < a2 { (a1, a2) } else { (a2, a1) };
    if ![f1, g1, f2, g2].iter().all(|v| v.is_finite()) {
        return 0.5 * (lo + hi);
    }
    let d1 = g1 + g2 - 3.0 * (f1 - f2) / (a1 - a2);
    let d2_sq = d1 * d1 - g1 * g2;
    if d2_sq >= 0.0 {
        let d2 = d2_sq.sqrt();
        let min_pos = if a1 <= a2 {
            a2 - (a2 - a1) * ((g2 + d2 - d1) / (g2 - g1 + 2.0 * d2))
        } else {
            a1 - (a1 - a2) * ((g1 + d2 - d1) / (g1 - g2 + 2.0 * d2))
        };
        if min_pos.is_finite() {
            return min_pos.clamp(lo, hi);
        }
    }
    0.5 * (lo + hi)
}

/// Strong Wolfe search along `dir` from `w`. Returns `None` when no
/// acceptable step exists within the evaluation budget.
fn strong_wolfe<F>(
    objective: &mut F,
    w: &[f64],
    dir: &[f64],
    phi0: f64,
    dphi0: f64,
) -> Option<LinePoint>
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    debug_assert!(dphi0 < 0.0, "search direction must be descending");
    let mut probe = vec![0.0; w.len()];
    let mut eval = |alpha: f64, probe: &mut Vec<f64>| -> LinePoint {
        for (p, (wi, di)) in probe.iter_mut().zip(w.iter().zip(dir)) {
            *p = wi + alpha * di;
        }
        let (phi, grad) = objective(probe);
        let dphi = dot(&grad, dir);
        LinePoint { alpha, phi, dphi, grad }
    };

    let armijo = |p: &LinePoint| p.phi <= phi0 + WOLFE_C1 * p.alpha * dphi0;
    let curvature = |p: &LinePoint| p.dphi.abs() <= -WOLFE_C2 * dphi0;

    // Bracketing phase: expand until the minimum is trapped.
    let mut prev = LinePoint { alpha: 0.0, phi: phi0, dphi: dphi0, grad: Vec::new() };
    let mut alpha = 1.0;
    let mut bracket = None;
    for it in 0..MAX_BRACKET {
        let cand = eval(alpha, &mut probe);
        if !cand.phi.is_finite() {
            // Overshot into non-finite territory; retreat toward the last
            // good point.
            alpha = 0.5 * (prev.alpha + alpha);
            if alpha <= prev.alpha {
                return None;
            }
            continue;
        }
        if !armijo(&cand) || (it > 0 && cand.phi >= prev.phi) {
            bracket = Some((prev, cand));
            break;
        }
        if curvature(&cand) {
            return Some(cand);
        }
        if cand.dphi >= 0.0 {
            bracket = Some((cand, prev));
            break;
        }
        alpha = cand.alpha * 2.0;
        prev = cand;
    }
    let (mut lo, mut hi) = bracket?;

    // Zoom phase: shrink the bracket around an acceptable point.
    for _ in 0..MAX_ZOOM {
        let width = (hi.alpha - lo.alpha).abs();
        if width * dir.iter().fold(0.0_f64, |m, d| m.max(d.abs())) < 1e-16 {
            break;
        }
        let mut trial_alpha =
            cubic_interpolate(lo.alpha, lo.phi, lo.dphi, hi.alpha, hi.phi, hi.dphi);
        // Keep the trial safely interior.
        let (a_min, a_max) = if lo.alpha < hi.alpha {
            (lo.alpha, hi.alpha)
        } else {
            (hi.alpha, lo.alpha)
        };
        let margin = 0.1 * width;
        trial_alpha = trial_alpha.clamp(a_min + margin, a_max - margin);
        let cand = eval(trial_alpha, &mut probe);
        if !cand.phi.is_finite() || !armijo(&cand) || cand.phi >= lo.phi {
            hi = cand;
        } else {
            if curvature(&cand) {
                return Some(cand);
            }
            if cand.dphi * (hi.alpha - lo.alpha) >= 0.0 {
                hi = std::mem::replace(&mut lo, cand);
            } else {
                lo = cand;
            }
        }
    }
    // Bracket collapsed without meeting the curvature condition; a
    // sufficient-decrease point is still a usable step.
    if lo.alpha > 0.0 && lo.phi < phi0 && lo.phi.is_finite() {
        return Some(lo);
    }
    None
}

/// Minimizes a differentiable objective by L-BFGS.
///
/// The two-loop recursion uses a history of `cfg.lbfgs_buffer` pairs; the
/// line search enforces the strong Wolfe conditions (c1 = 1e-4, c2 = 0.9)
/// with cubic interpolation, starting each search at step 1. Stops when
/// the gradient norm falls below `tol * max(1, |w|)`, when the relative
/// objective decrease over five iterations falls below `tol`, or at
/// `max_iters`. The hook `columns` is invoked once per outer iteration.
pub fn lbfgs_minimize<F, C>(
    mut objective: F,
    w0: &[f64],
    cfg: &SolverConfig,
    columns: C,
) -> Result<SolverResult, SolverError>
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
    C: FnMut(&[f64], f64) -> TraceColumns,
{
    cfg.validate()?;
    let mut tracer = Tracer::new(columns);
    let mut w = w0.to_vec();
    let (mut f, mut grad) = objective(&w);
    if !f.is_finite() || grad.iter().any(|g| !g.is_finite()) {
        return Err(SolverError::NonFinite { iter: 0 });
    }
    tracer.record(0, &w, f);

    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut recent: Vec<f64> = vec![f];
    let mut termination = Termination::MaxIters;

    let grad_converged = |g: &[f64], w: &[f64], tol: f64| norm(g) <= tol * norm(w).max(1.0);

    if grad_converged(&grad, &w, cfg.tol) {
        return Ok(SolverResult { w, trace: tracer.points, termination: Termination::GradientTol });
    }

    for iter in 1..=cfg.max_iters {
        // Two-loop recursion for the quasi-Newton direction.
        let mut q = grad.clone();
        let mut alphas = Vec::with_capacity(history.len());
        for (s, y, rho) in history.iter().rev() {
            let a = rho * dot(s, &q);
            for (qi, yi) in q.iter_mut().zip(y) {
                *qi -= a * yi;
            }
            alphas.push(a);
        }
        if let Some((s, y, _)) = history.back() {
            let gamma = dot(s, y) / dot(y, y);
            for qi in q.iter_mut() {
                *qi *= gamma;
            }
        }
        for ((s, y, rho), a) in history.iter().zip(alphas.into_iter().rev()) {
            let b = rho * dot(y, &q);
            for (qi, si) in q.iter_mut().zip(s) {
                *qi += (a - b) * si;
            }
        }
        let mut dir: Vec<f64> = q.iter().map(|v| -v).collect();
        let mut dphi0 = dot(&grad, &dir);
        if dphi0 >= 0.0 {
            // Degenerate curvature; restart from steepest descent.
            history.clear();
            dir = grad.iter().map(|g| -g).collect();
            dphi0 = -dot(&grad, &grad);
            if dphi0 >= 0.0 {
                termination = Termination::GradientTol;
                break;
            }
        }

        let Some(step) = strong_wolfe(&mut objective, &w, &dir, f, dphi0) else {
            termination = Termination::LineSearchStalled;
            break;
        };
        if !step.phi.is_finite() || step.grad.iter().any(|g| !g.is_finite()) {
            return Err(SolverError::NonFinite { iter });
        }

        let mut s = vec![0.0; w.len()];
        for (si, di) in s.iter_mut().zip(&dir) {
            *si = step.alpha * di;
        }
        let y: Vec<f64> = step.grad.iter().zip(&grad).map(|(gn, go)| gn - go).collect();
        let sy = dot(&s, &y);
        // Guard the curvature pair; skip the update when it carries no
        // positive-definiteness information.
        if sy > 1e-10 * norm(&s) * norm(&y) {
            history.push_back((s.clone(), y, 1.0 / sy));
            if history.len() > cfg.lbfgs_buffer {
                history.pop_front();
            }
        }

        for (wi, si) in w.iter_mut().zip(&s) {
            *wi += si;
        }
        f = step.phi;
        grad = step.grad;
        tracer.record(iter, &w, f);
        recent.push(f);

        if grad_converged(&grad, &w, cfg.tol) {
            termination = Termination::GradientTol;
            break;
        }
        let k = recent.len() - 1;
        if k >= 5 {
            let decrease = recent[k - 5] - recent[k];
            if decrease < cfg.tol * f.abs().max(1.0) {
                termination = Termination::ObjectivePlateau;
                break;
            }
        }
    }

    Ok(SolverResult { w, trace: tracer.points, termination })
}
