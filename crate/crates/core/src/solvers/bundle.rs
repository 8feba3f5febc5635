//! Cutting-plane (bundle) minimization of the exact regularized risk.
//!
//! The solver collects linearizations of the non-smooth risk and repeatedly
//! minimizes `(lambda/2)|w|^2 + max_t(<a_t, w> + b_t)`. That inner problem
//! is solved in its dual: maximize `-(1/2 lambda)|sum_t alpha_t a_t|^2 +
//! sum_t alpha_t b_t` over the probability simplex, which recovers
//! `w = -(1/lambda) sum_t alpha_t a_t`. The dual value at any feasible
//! `alpha` lower-bounds the true optimum, so the duality gap
//! `min_s J(w_s) - dual` is a sound stopping certificate even when the
//! inner solve is approximate.

use super::{dot, SolverConfig, SolverError, SolverResult, TraceColumns, Termination, Tracer};
use crate::smoothing::RiskEval;

/// One linearization of the exact risk: `R(w) >= <slope, w> + offset`.
#[derive(Debug, Clone)]
pub struct BundleCut {
    pub slope: Vec<f64>,
    pub offset: f64,
}

impl BundleCut {
    /// Supporting plane of the risk at `w`.
    pub fn at(w: &[f64], risk: &RiskEval) -> Self {
        Self { slope: risk.gradient.clone(), offset: risk.value - dot(&risk.gradient, w) }
    }
}

/// Euclidean projection onto the probability simplex.
fn project_simplex(v: &mut [f64]) {
    let mut sorted = v.to_vec();
    sorted.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut acc = 0.0;
    let mut tau = 0.0;
    for (k, &u) in sorted.iter().enumerate() {
        acc += u;
        let candidate = (acc - 1.0) / (k + 1) as f64;
        if u - candidate > 0.0 {
            tau = candidate;
        }
    }
    for x in v.iter_mut() {
        *x = (*x - tau).max(0.0);
    }
}

/// Simplex-constrained QP state: minimize
/// `f(alpha) = (1/2) alpha' Q alpha - b' alpha` with `Q = gram / lambda`.
struct SimplexQp<'a> {
    gram: &'a [Vec<f64>],
    offsets: &'a [f64],
    inv_lambda: f64,
}

impl SimplexQp<'_> {
    fn gradient(&self, alpha: &[f64]) -> Vec<f64> {
        let t = alpha.len();
        (0..t)
            .map(|i| {
                let mut qi = 0.0;
                for (j, &aj) in alpha.iter().enumerate() {
                    if aj != 0.0 {
                        qi += self.gram_at(i, j) * aj;
                    }
                }
                qi * self.inv_lambda - self.offsets[i]
            })
            .collect()
    }

    // Lower-triangular storage: row t holds inner products with cuts 0..=t.
    fn gram_at(&self, i: usize, j: usize) -> f64 {
        if i >= j {
            self.gram[i][j]
        } else {
            self.gram[j][i]
        }
    }
}

/// Dense row-major copy of a (sub-)problem: minimize
/// `(1/2) x' Q x - b' x` over the simplex.
struct DenseQp {
    q: Vec<f64>,
    b: Vec<f64>,
    n: usize,
}

impl DenseQp {
    fn gradient(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for i in 0..self.n {
            let row = &self.q[i * self.n..(i + 1) * self.n];
            let mut acc = 0.0;
            for (qij, xj) in row.iter().zip(x) {
                acc += qij * xj;
            }
            out.push(acc - self.b[i]);
        }
    }

    fn value(&self, x: &[f64], grad: &[f64]) -> f64 {
        // f = (1/2) x'(Q x) - b'x = (1/2) x'(g + b) - b'x.
        let mut acc = 0.0;
        for ((&xi, &gi), &bi) in x.iter().zip(grad).zip(&self.b) {
            acc += 0.5 * xi * (gi + bi) - xi * bi;
        }
        acc
    }
}

/// Projected spectral-gradient descent on a dense simplex QP. `x` is the
/// warm start and holds the solution on return. A KKT residual of `r`
/// bounds the dual suboptimality by `r` itself, so callers pick `kkt_tol`
/// (relative to the gradient magnitude) from the accuracy they need.
fn spg_simplex(qp: &DenseQp, x: &mut Vec<f64>, kkt_tol: f64) {
    project_simplex(x);
    let mut grad = Vec::with_capacity(qp.n);
    qp.gradient(x, &mut grad);
    let mut f = qp.value(x, &grad);
    // Conservative fallback step from a row-sum bound on |Q|.
    let l_bound = (0..qp.n)
        .map(|i| qp.q[i * qp.n..(i + 1) * qp.n].iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0_f64, f64::max);
    let base_step = if l_bound > 0.0 { 1.0 / l_bound } else { 1.0 };

    let mut step = base_step;
    let mut f_window = vec![f; 1];
    let mut prev_x = x.clone();
    let mut prev_grad = grad.clone();
    let mut trial_grad = Vec::with_capacity(qp.n);
    let mut stall = 0usize;
    for it in 0..10_000 {
        // KKT: on the support the gradient must be flat at its minimum.
        let scale = grad.iter().fold(1.0_f64, |m, g| m.max(g.abs()));
        let v = grad.iter().copied().fold(f64::INFINITY, f64::min);
        let residual = x
            .iter()
            .zip(&grad)
            .filter(|(&a, _)| a > 1e-15)
            .map(|(_, &g)| g - v)
            .fold(0.0_f64, f64::max);
        if residual <= kkt_tol * scale {
            break;
        }

        let mut trial: Vec<f64> = x.iter().zip(&grad).map(|(a, g)| a - step * g).collect();
        project_simplex(&mut trial);
        qp.gradient(&trial, &mut trial_grad);
        let mut trial_f = qp.value(&trial, &trial_grad);
        // Nonmonotone safeguard: compare against the recent maximum and
        // backtrack on failure.
        let f_ref = f_window.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut backtracks = 0;
        while trial_f > f_ref && backtracks < 40 {
            step *= 0.5;
            trial = x.iter().zip(&grad).map(|(a, g)| a - step * g).collect();
            project_simplex(&mut trial);
            qp.gradient(&trial, &mut trial_grad);
            trial_f = qp.value(&trial, &trial_grad);
            backtracks += 1;
        }

        // Once progress sits at the rounding floor the residual will not
        // improve either; any feasible point is still a valid model lower
        // bound, so stop refining.
        if f - trial_f <= 1e-14 * (1.0 + f.abs()) {
            stall += 1;
            if stall >= 50 {
                if trial_f < f {
                    *x = trial;
                }
                break;
            }
        } else {
            stall = 0;
        }

        prev_x.copy_from_slice(x);
        prev_grad.copy_from_slice(&grad);
        *x = trial;
        std::mem::swap(&mut grad, &mut trial_grad);
        f = trial_f;
        f_window.push(f);
        if f_window.len() > 10 {
            f_window.remove(0);
        }

        // Barzilai-Borwein spectral step for the next iteration.
        let mut sy = 0.0;
        let mut ss = 0.0;
        let mut yy = 0.0;
        for ((a, pa), (g, pg)) in x.iter().zip(&prev_x).zip(grad.iter().zip(&prev_grad)) {
            let s = a - pa;
            let y = g - pg;
            sy += s * y;
            ss += s * s;
            yy += y * y;
        }
        step = if sy > 0.0 && sy.is_finite() {
            let bb = if it % 2 == 0 { ss / sy } else { sy / yy };
            if bb.is_finite() && bb > 0.0 {
                bb
            } else {
                base_step
            }
        } else {
            base_step
        };
    }
}

/// Solves the simplex QP with a working-set strategy. The optimum is
/// supported on few cuts, so the dense subproblem stays small: solve on
/// the current support, check the full KKT conditions, and pull in the
/// most violating coordinate until none remains. `alpha` is the warm
/// start and holds the solution on return; coordinates outside the final
/// working set are exactly zero, so the result is always feasible.
fn solve_simplex_qp(
    gram: &[Vec<f64>],
    offsets: &[f64],
    lambda: f64,
    alpha: &mut Vec<f64>,
    kkt_tol: f64,
) {
    let t = offsets.len();
    alpha.resize(t, 0.0);
    if t == 1 {
        alpha[0] = 1.0;
        return;
    }
    let qp = SimplexQp { gram, offsets, inv_lambda: 1.0 / lambda };
    if t == 2 {
        // One free variable: alpha = (x, 1 - x) with a scalar quadratic.
        let q00 = qp.gram_at(0, 0) * qp.inv_lambda;
        let q01 = qp.gram_at(0, 1) * qp.inv_lambda;
        let q11 = qp.gram_at(1, 1) * qp.inv_lambda;
        let curve = q00 - 2.0 * q01 + q11;
        let x = if curve > 0.0 {
            ((q11 - q01 + offsets[0] - offsets[1]) / curve).clamp(0.0, 1.0)
        } else {
            // Degenerate curvature: compare endpoints.
            let f0 = 0.5 * q11 - offsets[1];
            let f1 = 0.5 * q00 - offsets[0];
            if f1 <= f0 {
                1.0
            } else {
                0.0
            }
        };
        alpha[0] = x;
        alpha[1] = 1.0 - x;
        return;
    }

    let mut in_set = vec![false; t];
    let mut set: Vec<usize> = Vec::new();
    for (i, &a) in alpha.iter().enumerate() {
        if a > 0.0 {
            in_set[i] = true;
            set.push(i);
        }
    }
    // The newest cut is the usual entering coordinate.
    if !in_set[t - 1] {
        in_set[t - 1] = true;
        set.push(t - 1);
    }

    for _ in 0..t {
        // Dense subproblem over the working set.
        let k = set.len();
        let mut sub = DenseQp { q: vec![0.0; k * k], b: Vec::with_capacity(k), n: k };
        for (r, &i) in set.iter().enumerate() {
            for (c, &j) in set.iter().enumerate() {
                sub.q[r * k + c] = qp.gram_at(i, j) * qp.inv_lambda;
            }
            sub.b.push(offsets[i]);
        }
        let mut sub_alpha: Vec<f64> = set.iter().map(|&i| alpha[i]).collect();
        spg_simplex(&sub, &mut sub_alpha, kkt_tol);
        for a in alpha.iter_mut() {
            *a = 0.0;
        }
        for (&i, &a) in set.iter().zip(&sub_alpha) {
            alpha[i] = a;
        }

        // Full KKT check; the work is O(t * |support|).
        let grad = qp.gradient(alpha);
        let scale = grad.iter().fold(1.0_f64, |m, g| m.max(g.abs()));
        let v = grad.iter().copied().fold(f64::INFINITY, f64::min);
        let residual = alpha
            .iter()
            .zip(&grad)
            .filter(|(&a, _)| a > 1e-15)
            .map(|(_, &g)| g - v)
            .fold(0.0_f64, f64::max);
        if residual <= kkt_tol * scale {
            break;
        }
        // The violation certificate is the coordinate holding the global
        // minimum gradient; if it is already in the working set, the
        // subproblem solver has hit its floor and further rounds cannot
        // help.
        let jmin = grad
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(j, _)| j)
            .expect("nonempty gradient");
        if in_set[jmin] {
            break;
        }
        in_set[jmin] = true;
        set.push(jmin);
    }
}

/// Solves the bundle inner problem for an explicit cut list: maximizes
/// `-(1/2 lambda)|sum alpha_t a_t|^2 + sum alpha_t b_t` over the simplex.
/// Returns the simplex weights, the minimizer `w = -(1/lambda) sum alpha_t
/// a_t` of the cut model, and the dual objective value at the returned
/// weights (a lower bound on the true minimum of the modeled objective).
pub fn dual_qp_simplex(cuts: &[BundleCut], lambda: f64) -> (Vec<f64>, Vec<f64>, f64) {
    assert!(!cuts.is_empty(), "at least one cut is required");
    assert!(lambda > 0.0, "lambda must be positive");
    let t = cuts.len();
    let mut gram: Vec<Vec<f64>> = Vec::with_capacity(t);
    for (i, cut) in cuts.iter().enumerate() {
        gram.push((0..=i).map(|j| dot(&cut.slope, &cuts[j].slope)).collect());
    }
    let offsets: Vec<f64> = cuts.iter().map(|c| c.offset).collect();
    let mut alpha = vec![1.0 / t as f64; t];
    solve_simplex_qp(&gram, &offsets, lambda, &mut alpha, 1e-10);
    let (w, model) = recover_primal(cuts, &offsets, lambda, &alpha);
    (alpha, w, model)
}

fn recover_primal(
    cuts: &[BundleCut],
    offsets: &[f64],
    lambda: f64,
    alpha: &[f64],
) -> (Vec<f64>, f64) {
    let p = cuts[0].slope.len();
    let mut w = vec![0.0; p];
    for (cut, &a) in cuts.iter().zip(alpha) {
        if a != 0.0 {
            for (wi, si) in w.iter_mut().zip(&cut.slope) {
                *wi -= a / lambda * si;
            }
        }
    }
    let reg: f64 = w.iter().map(|x| x * x).sum();
    let model = -0.5 * lambda * reg + dot(alpha, offsets);
    (w, model)
}

/// Cutting-plane minimization of `(lambda/2)|w|^2 + R(w)` for a non-smooth
/// risk `R` queried through value/subgradient evaluations.
///
/// All cuts are retained. Terminates when the duality gap
/// `min_s J(w_s) - model` drops to `cfg.epsilon`, or at `cfg.max_iters`;
/// returns the best observed iterate. When the best iterate is not the
/// last one visited, a closing trace row is appended for it so the final
/// row always describes the returned weights.
pub fn bundle_minimize<F, C>(
    mut exact_risk: F,
    cfg: &SolverConfig,
    w0: &[f64],
    columns: C,
) -> Result<SolverResult, SolverError>
where
    F: FnMut(&[f64]) -> RiskEval,
    C: FnMut(&[f64], f64) -> TraceColumns,
{
    cfg.validate()?;
    let mut tracer = Tracer::new(columns);
    let mut w = w0.to_vec();
    let mut cuts: Vec<BundleCut> = Vec::new();
    let mut gram: Vec<Vec<f64>> = Vec::new();
    let mut offsets: Vec<f64> = Vec::new();
    let mut alpha: Vec<f64> = Vec::new();

    let mut best_j = f64::INFINITY;
    let mut best_w = w.clone();
    let mut best_recorded_last = true;
    let mut termination = Termination::MaxIters;

    for iter in 0..cfg.max_iters {
        let risk = exact_risk(&w);
        if !risk.value.is_finite() || risk.gradient.iter().any(|g| !g.is_finite()) {
            return Err(SolverError::NonFinite { iter });
        }
        let reg: f64 = w.iter().map(|x| x * x).sum();
        let j = 0.5 * cfg.lambda * reg + risk.value;
        tracer.record(iter, &w, j);
        if j < best_j {
            best_j = j;
            best_w.copy_from_slice(&w);
            best_recorded_last = true;
        } else {
            best_recorded_last = false;
        }

        let cut = BundleCut::at(&w, &risk);
        gram.push((0..cuts.len()).map(|s| dot(&cut.slope, &cuts[s].slope)).collect());
        let last = gram.len() - 1;
        let self_ip = dot(&cut.slope, &cut.slope);
        gram[last].push(self_ip);
        offsets.push(cut.offset);
        cuts.push(cut);
        alpha.push(if cuts.len() == 1 { 1.0 } else { 0.0 });

        // The gap test only needs the model accurate to a fraction of
        // epsilon, and a KKT residual of r keeps the dual value within r
        // of the inner optimum; chasing the standalone solver's 1e-10
        // here would burn most of the runtime on rounding noise.
        let kkt_tol = (1e-4 * cfg.epsilon).max(1e-10);
        solve_simplex_qp(&gram, &offsets, cfg.lambda, &mut alpha, kkt_tol);
        let (w_next, model) = recover_primal(&cuts, &offsets, cfg.lambda, &alpha);
        let gap = best_j - model;
        if gap <= cfg.epsilon {
            termination = Termination::GapReached;
            break;
        }
        w = w_next;
    }

    if !best_recorded_last {
        let next_iter = tracer.points.last().map_or(0, |p| p.iter + 1);
        tracer.record(next_iter, &best_w, best_j);
    }
    Ok(SolverResult { w: best_w, trace: tracer.points, termination })
}
