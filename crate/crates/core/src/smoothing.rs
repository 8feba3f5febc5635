//! Smoothing constants and the regularized objective.
//!
//! The non-smooth empirical risks in this crate are smoothed by adding a
//! quadratic prox term `(mu/2)|beta|^2` to the dual of the risk. Two
//! constants govern the approximation: the prox diameter `D` (the maximum
//! of the prox term over the dual domain, so the smoothed risk deviates
//! from the exact one by at most `mu * D`) and an upper bound on the
//! operator norm of the linear map `A` coupling weights to the dual (the
//! smoothed gradient is Lipschitz with constant at most `|A|^2 / mu`).

use crate::data::{radius, DataError, Dataset};

/// Which multivariate performance measure a risk targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Loss {
    Prbep,
    RocArea,
}

impl Loss {
    pub fn name(self) -> &'static str {
        match self {
            Loss::Prbep => "prbep",
            Loss::RocArea => "rocarea",
        }
    }
}

/// A risk value together with its (sub)gradient in weight space.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskEval {
    pub value: f64,
    pub gradient: Vec<f64>,
}

/// Derived smoothing configuration for one (loss, dataset) pair.
#[derive(Debug, Clone, Copy)]
pub struct SmoothingParams {
    /// Target accuracy for the overall minimization.
    pub epsilon: f64,
    /// Multiplier on the prescribed `mu_hat = epsilon / D`.
    pub mu_multiplier: f64,
    /// The smoothing parameter actually used.
    pub mu: f64,
    /// Maximum of the quadratic prox term over the dual domain.
    pub prox_diameter: f64,
    /// Upper bound on the operator norm of the dual coupling map.
    pub a_norm_bound: f64,
}

impl SmoothingParams {
    /// Computes constants for `loss` on `d` and sets
    /// `mu = mu_multiplier * epsilon / D`.
    pub fn new(
        loss: Loss,
        d: &Dataset,
        epsilon: f64,
        mu_multiplier: f64,
    ) -> Result<Self, DataError> {
        assert!(epsilon > 0.0, "epsilon must be positive");
        assert!(mu_multiplier >= 1.0, "mu multiplier must be >= 1");
        let (prox_diameter, a_norm_bound) = smoothing_constants(loss, d)?;
        let mu = mu_multiplier * mu_hat(epsilon, prox_diameter);
        Ok(Self { epsilon, mu_multiplier, mu, prox_diameter, a_norm_bound })
    }

    /// Lipschitz bound for the gradient of the smoothed risk at this `mu`.
    pub fn lipschitz(&self) -> f64 {
        lipschitz_bound(self.a_norm_bound, self.mu)
    }
}

/// Prox diameter `D` and operator-norm bound for the given loss.
///
/// PRBEP uses the coupling map with columns `(-2/n) y_i x_i` over the dual
/// box `[0,1]^n`, giving `D = n/2` and the Frobenius-derived bound
/// `2R/sqrt(n)`. ROCArea uses the pair map with columns `(x_i - x_j)/m`
/// over `[-1,1]^m`, giving `D = m/2` and `2R/sqrt(m)`. Both satisfy
/// `sqrt(D) * bound <= sqrt(2) * R`.
pub fn smoothing_constants(loss: Loss, d: &Dataset) -> Result<(f64, f64), DataError> {
    d.require_both_classes()?;
    let r = radius(d);
    match loss {
        Loss::Prbep => {
            let n = d.len() as f64;
            Ok((n / 2.0, 2.0 * r / n.sqrt()))
        }
        Loss::RocArea => {
            let m = d.num_pairs() as f64;
            Ok((m / 2.0, 2.0 * r / m.sqrt()))
        }
    }
}

/// The prescribed smoothing parameter `epsilon / D`.
pub fn mu_hat(epsilon: f64, prox_diameter: f64) -> f64 {
    assert!(epsilon > 0.0, "epsilon must be positive");
    assert!(prox_diameter > 0.0, "prox diameter must be positive");
    epsilon / prox_diameter
}

/// Upper bound `|A|^2 / mu` on the Lipschitz constant of the smoothed
/// risk's gradient.
pub fn lipschitz_bound(a_norm_bound: f64, mu: f64) -> f64 {
    assert!(mu > 0.0, "mu must be positive");
    a_norm_bound * a_norm_bound / mu
}

/// Value and gradient of `(lambda/2)|w|^2 + risk`.
pub fn regularized_objective(lambda: f64, w: &[f64], risk: &RiskEval) -> (f64, Vec<f64>) {
    assert!(lambda >= 0.0, "lambda must be nonnegative");
    assert_eq!(w.len(), risk.gradient.len(), "weight/gradient dimension mismatch");
    let sq_norm: f64 = w.iter().map(|v| v * v).sum();
    let value = 0.5 * lambda * sq_norm + risk.value;
    let grad = w.iter().zip(&risk.gradient).map(|(wi, gi)| lambda * wi + gi).collect();
    (value, grad)
}

/// Planning estimate for the number of accelerated-gradient steps needed
/// to reach accuracy `epsilon` on an `l_mu`-smooth, `lambda`-strongly
/// convex objective started a squared distance `2*delta0` from the optimum:
///
/// `min{ sqrt(4 L delta0 / eps), ln(L delta0 / eps) / -ln(1 - sqrt(lambda/L)) }`
///
/// Branches are clamped at zero (the estimate can be vacuous when the
/// start is already within accuracy). When `lambda >= l_mu` only the first
/// branch applies. Reporting only; never used as a stopping rule.
pub fn iteration_estimate(l_mu: f64, lambda: f64, delta0: f64, epsilon: f64) -> f64 {
    assert!(l_mu > 0.0 && lambda > 0.0 && delta0 > 0.0 && epsilon > 0.0);
    let sublinear = (4.0 * l_mu * delta0 / epsilon).sqrt().max(0.0);
    if lambda >= l_mu {
        return sublinear;
    }
    let denom = -(1.0 - (lambda / l_mu).sqrt()).ln();
    let linear = ((l_mu * delta0 / epsilon).ln() / denom).max(0.0);
    sublinear.min(linear)
}
