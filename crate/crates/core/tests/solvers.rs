//! Cross-solver agreement on small training problems.

mod common;

use common::*;
use smoothrank::data::parse_svmlight;
use smoothrank::smoothing::{iteration_estimate, regularized_objective, Loss, SmoothingParams};
use smoothrank::solvers::{
    agm_minimize, bundle_minimize, dual_qp_simplex, lbfgs_minimize, BundleCut, SolverConfig,
    TraceColumns, Termination,
};
use smoothrank::{exact_risk, smoothed_risk, Dataset};

fn two_point() -> Dataset {
    parse_svmlight("+1 1:1\n-1 1:-1").unwrap()
}

/// Grid plus golden-section refinement of a 1-D function on [-5, 5].
fn golden_min(f: impl Fn(f64) -> f64) -> (f64, f64) {
    let mut best_x = -5.0;
    let mut best_f = f(best_x);
    for k in 0..=1000 {
        let x = -5.0 + k as f64 * 0.01;
        let v = f(x);
        if v < best_f {
            best_f = v;
            best_x = x;
        }
    }
    let (mut lo, mut hi) = (best_x - 0.01, best_x + 0.01);
    let phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let a = hi - phi * (hi - lo);
        let b = lo + phi * (hi - lo);
        if f(a) < f(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

fn smoothed_objective<'a>(
    loss: Loss,
    d: &'a Dataset,
    lambda: f64,
    mu: f64,
) -> impl FnMut(&[f64]) -> (f64, Vec<f64>) + 'a {
    move |w: &[f64]| {
        let risk = smoothed_risk(loss, w, d, mu);
        regularized_objective(lambda, w, &risk)
    }
}

#[test]
fn lbfgs_matches_golden_section_on_two_point_instance() {
    let d = two_point();
    let (lambda, mu) = (1.0, 1.0);
    let cfg = SolverConfig { lambda, tol: 1e-9, ..SolverConfig::default() };
    let res = lbfgs_minimize(smoothed_objective(Loss::Prbep, &d, lambda, mu), &[0.0], &cfg, |_, v| {
        TraceColumns::objective_only(v)
    })
    .unwrap();
    let (x_star, f_star) = golden_min(|x| {
        let risk = smoothed_risk(Loss::Prbep, &[x], &d, mu);
        regularized_objective(lambda, &[x], &risk).0
    });
    assert!((res.w[0] - x_star).abs() <= 1e-4, "lbfgs {} vs oracle {}", res.w[0], x_star);
    let f_res = res.trace.last().unwrap().primal_j;
    assert!((f_res - f_star).abs() <= 1e-4);
}

#[test]
fn agm_agrees_with_lbfgs_on_two_point_instance() {
    let d = two_point();
    let (lambda, mu) = (1.0, 1.0);
    let params = SmoothingParams { epsilon: 1e-3, mu_multiplier: 1.0, mu, prox_diameter: 1.0, a_norm_bound: 2.0_f64.sqrt() };
    let cfg = SolverConfig { lambda, tol: 1e-9, max_iters: 5000, ..SolverConfig::default() };
    let lb = lbfgs_minimize(smoothed_objective(Loss::Prbep, &d, lambda, mu), &[0.0], &cfg, |_, v| {
        TraceColumns::objective_only(v)
    })
    .unwrap();
    let ag = agm_minimize(
        |w: &[f64]| {
            let r = smoothed_risk(Loss::Prbep, w, &d, mu);
            (r.value, r.gradient)
        },
        params.lipschitz(),
        lambda,
        &[0.0],
        &SolverConfig { tol: 1e-7, ..cfg },
        |_, v| TraceColumns::objective_only(v),
    )
    .unwrap();
    assert!((lb.w[0] - ag.w[0]).abs() <= 1e-4, "lbfgs {} vs agm {}", lb.w[0], ag.w[0]);
}

#[test]
fn agm_iteration_count_stays_within_planning_estimate() {
    let d = two_point();
    let (lambda, mu) = (1.0, 1.0);
    let lipschitz = 2.0; // bound^2 / mu = 2 for this instance
    let epsilon = 1e-3;
    let cfg = SolverConfig { lambda, tol: 1e-3, max_iters: 5000, ..SolverConfig::default() };
    let res = agm_minimize(
        |w: &[f64]| {
            let r = smoothed_risk(Loss::Prbep, w, &d, mu);
            (r.value, r.gradient)
        },
        lipschitz,
        lambda,
        &[0.0],
        &cfg,
        |_, v| TraceColumns::objective_only(v),
    )
    .unwrap();
    // Locate the optimum to set delta0 = |w*|^2 / 2.
    let (x_star, _) = golden_min(|x| {
        let risk = smoothed_risk(Loss::Prbep, &[x], &d, mu);
        regularized_objective(lambda, &[x], &risk).0
    });
    let delta0 = 0.5 * x_star * x_star;
    let estimate = iteration_estimate(lipschitz, lambda, delta0, epsilon);
    let iters = (res.trace.len() - 1) as f64;
    assert!(
        iters <= 10.0 * estimate.max(1.0),
        "agm took {iters} iterations, estimate {estimate}"
    );
}

#[test]
fn bundle_reaches_gap_and_agrees_with_smoothed_optimum() {
    let d = two_point();
    let lambda = 1.0;
    let epsilon = 1e-3;
    let cfg = SolverConfig { lambda, epsilon, max_iters: 200, ..SolverConfig::default() };
    let bundle = bundle_minimize(
        |w: &[f64]| exact_risk(Loss::Prbep, w, &d),
        &cfg,
        &[0.0],
        |_, v| TraceColumns::objective_only(v),
    )
    .unwrap();
    assert_eq!(bundle.termination, Termination::GapReached);

    // Smoothed optimum at mu = epsilon / D with D = n/2 = 1.
    let mu = epsilon;
    let lcfg = SolverConfig { lambda, tol: 1e-9, ..SolverConfig::default() };
    let lb = lbfgs_minimize(smoothed_objective(Loss::Prbep, &d, lambda, mu), &[0.0], &lcfg, |_, v| {
        TraceColumns::objective_only(v)
    })
    .unwrap();
    let j_exact = |w: &[f64]| regularized_objective(lambda, w, &exact_risk(Loss::Prbep, w, &d)).0;
    assert!(
        (j_exact(&bundle.w) - j_exact(&lb.w)).abs() <= 2e-3,
        "bundle {} vs smoothed {}",
        j_exact(&bundle.w),
        j_exact(&lb.w)
    );
}

#[test]
fn cut_model_lower_bounds_are_nondecreasing() {
    // Rebuild the bundle sequence by hand and watch the dual model value.
    let d = two_point();
    let lambda = 0.7;
    let mut w = vec![0.0];
    let mut cuts: Vec<BundleCut> = Vec::new();
    let mut prev_model = f64::NEG_INFINITY;
    for _ in 0..12 {
        let risk = exact_risk(Loss::Prbep, &w, &d);
        cuts.push(BundleCut::at(&w, &risk));
        let (_, w_next, model) = dual_qp_simplex(&cuts, lambda);
        assert!(model >= prev_model - 1e-10, "model dropped: {prev_model} -> {model}");
        prev_model = model;
        w = w_next;
    }
}

#[test]
fn cut_model_supports_the_risk_everywhere() {
    let mut rng = rng(31);
    let d = random_dataset(&mut rng, 16, 4);
    let p = d.num_features().max(1);
    for loss in [Loss::Prbep, Loss::RocArea] {
        let mut cuts = Vec::new();
        for _ in 0..6 {
            let w = random_weights(&mut rng, p, 2.0);
            cuts.push(BundleCut::at(&w, &exact_risk(loss, &w, &d)));
        }
        for _ in 0..20 {
            let probe = random_weights(&mut rng, p, 3.0);
            let risk_at = exact_risk(loss, &probe, &d).value;
            for cut in &cuts {
                let plane: f64 =
                    cut.offset + cut.slope.iter().zip(&probe).map(|(a, b)| a * b).sum::<f64>();
                assert!(plane <= risk_at + 1e-9, "{}: cut above risk", loss.name());
            }
        }
    }
}

#[test]
fn three_solvers_agree_on_small_instances() {
    let mut rng = rng(32);
    let epsilon = 1e-3;
    for (trial, loss) in [Loss::Prbep, Loss::RocArea].into_iter().enumerate() {
        let d = random_dataset(&mut rng, 18 + trial, 4);
        let p = d.num_features().max(1);
        let lambda = 0.5;
        let params = SmoothingParams::new(loss, &d, epsilon, 1.0).unwrap();
        let j_exact =
            |w: &[f64]| regularized_objective(lambda, w, &exact_risk(loss, w, &d)).0;

        let lcfg = SolverConfig { lambda, tol: 1e-8, max_iters: 3000, ..SolverConfig::default() };
        let lb = lbfgs_minimize(
            smoothed_objective(loss, &d, lambda, params.mu),
            &vec![0.0; p],
            &lcfg,
            |_, v| TraceColumns::objective_only(v),
        )
        .unwrap();
        let ag = agm_minimize(
            |w: &[f64]| {
                let r = smoothed_risk(loss, w, &d, params.mu);
                (r.value, r.gradient)
            },
            params.lipschitz(),
            lambda,
            &vec![0.0; p],
            &SolverConfig { tol: 1e-5, max_iters: 60_000, ..lcfg },
            |_, v| TraceColumns::objective_only(v),
        )
        .unwrap();
        let bu = bundle_minimize(
            |w: &[f64]| exact_risk(loss, w, &d),
            &SolverConfig { lambda, epsilon, max_iters: 500, ..SolverConfig::default() },
            &vec![0.0; p],
            |_, v| TraceColumns::objective_only(v),
        )
        .unwrap();

        let (jl, ja, jb) = (j_exact(&lb.w), j_exact(&ag.w), j_exact(&bu.w));
        let spread = jl.max(ja).max(jb) - jl.min(ja).min(jb);
        assert!(
            spread <= 2.0 * epsilon,
            "{}: solver spread {spread} (lbfgs {jl}, agm {ja}, bundle {jb})",
            loss.name()
        );
    }
}

#[test]
fn solver_traces_are_deterministic() {
    let d = two_point();
    let cfg = SolverConfig { lambda: 1.0, tol: 1e-9, ..SolverConfig::default() };
    let run = || {
        lbfgs_minimize(smoothed_objective(Loss::Prbep, &d, 1.0, 0.2), &[0.0], &cfg, |_, v| {
            TraceColumns::objective_only(v)
        })
        .unwrap()
    };
    let a = run();
    let b = run();
    assert_eq!(a.w, b.w);
    assert_eq!(a.trace.len(), b.trace.len());
    for (x, y) in a.trace.iter().zip(&b.trace) {
        assert_eq!(x.iter, y.iter);
        assert_eq!(x.primal_j.to_bits(), y.primal_j.to_bits());
    }
}
