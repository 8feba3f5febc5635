//! PRBEP empirical risk: smoothed and exact evaluations.
//!
//! The smoothed risk maximizes `sum_i c_i beta_i - (mu/2)|beta|^2` over the
//! coupled box `{beta in [0,1]^n : sum_P beta = sum_N beta}`, where the
//! linear coefficients are `c_i = -(2/n) y_i <w, x_i> + [i in P]/n_+`. The
//! maximizer has the clipped form `beta_i = median(0, (c_i - s_i nu)/mu, 1)`
//! for a scalar multiplier `nu` (`s_i = +1` on positives, `-1` on
//! negatives), which [`solve_coupled_clip`] finds exactly in O(n log n) by
//! scanning the breakpoints of the piecewise-linear coupling residual.
//!
//! The exact risk maximizes, over labelings that flip equally many
//! positives and negatives, the count-based discrepancy plus the linear
//! score term; sorting reduces that search to a prefix-sum sweep.

use crate::data::{scores, Dataset};
use crate::smoothing::RiskEval;

/// False-negative / false-positive counts of a candidate labeling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContingencyCounts {
    /// Positives labeled -1.
    pub b: usize,
    /// Negatives labeled +1.
    pub c: usize,
}

/// Optimal dual point of the smoothed PRBEP risk.
#[derive(Debug, Clone)]
pub struct PrbepDual {
    /// Box variables, one per example, each in [0,1].
    pub beta: Vec<f64>,
    /// Scalar multiplier of the coupling constraint.
    pub nu: f64,
    /// The linear coefficients the dual was solved against.
    pub coeffs: Vec<f64>,
}

impl PrbepDual {
    /// Objective value `c . beta - (mu/2)|beta|^2` at this dual point.
    pub fn objective(&self, mu: f64) -> f64 {
        let linear: f64 = self.coeffs.iter().zip(&self.beta).map(|(c, b)| c * b).sum();
        let sq: f64 = self.beta.iter().map(|b| b * b).sum();
        linear - 0.5 * mu * sq
    }
}

/// Linear dual coefficients `c_i = -(2/n) y_i <w, x_i> + [i in P]/n_+`,
/// in dataset order.
pub fn prbep_linear_coeffs(w: &[f64], d: &Dataset) -> Vec<f64> {
    assert!(d.n_pos() >= 1, "PRBEP needs at least one positive example");
    let n = d.len() as f64;
    let inv_pos = 1.0 / d.n_pos() as f64;
    let s = scores(w, d);
    (0..d.len())
        .map(|i| {
            let y = f64::from(d.label(i));
            let base = -2.0 / n * y * s[i];
            if d.label(i) > 0 {
                base + inv_pos
            } else {
                base
            }
        })
        .collect()
}

fn clip01(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

fn beta_at(coeffs: &[f64], labels: &[i8], mu: f64, nu: f64) -> Vec<f64> {
    coeffs
        .iter()
        .zip(labels)
        .map(|(&c, &y)| {
            let s = f64::from(y);
            clip01((c - s * nu) / mu)
        })
        .collect()
}

/// Coupling residual `sum_P beta(nu) - sum_N beta(nu)` and the number of
/// coordinates strictly inside the clip interval.
fn residual_and_interior(coeffs: &[f64], labels: &[i8], mu: f64, nu: f64) -> (f64, usize) {
    let mut h = 0.0;
    let mut interior = 0;
    for (&c, &y) in coeffs.iter().zip(labels) {
        let s = f64::from(y);
        let raw = (c - s * nu) / mu;
        if raw > 0.0 && raw < 1.0 {
            interior += 1;
        }
        h += s * clip01(raw);
    }
    (h, interior)
}

/// Maximizes `c . beta - (mu/2)|beta|^2` over the coupled box
/// `{beta in [0,1]^n : sum_P beta = sum_N beta}`.
///
/// The coupling residual `h(nu)` is continuous, piecewise linear and
/// nonincreasing in the multiplier, with `h(-inf) = n_+ >= 0 >= -n_- =
/// h(+inf)`, so a root always exists. The scan sorts the 2n clip
/// breakpoints, walks segments accumulating the linear description of `h`,
/// solves the crossing segment exactly, and applies one exact refinement
/// step to cancel accumulated floating-point drift. O(n log n) total.
///
/// `labels` supplies the partition: +1 marks positives, -1 negatives.
pub fn solve_coupled_clip(coeffs: &[f64], labels: &[i8], mu: f64) -> PrbepDual {
    assert!(mu > 0.0, "mu must be positive");
    assert_eq!(coeffs.len(), labels.len());
    let n_pos = labels.iter().filter(|&&y| y > 0).count();
    let n_neg = labels.len() - n_pos;
    assert!(n_pos >= 1 && n_neg >= 1, "both classes must be present");

    // Events change h's piecewise-linear description: (nu, d_const,
    // d_slope_count, d_offset). On a segment,
    //   h(nu) = const_sum + offset - slope_count * nu / mu.
    // A positive coordinate is 1 below c_i - mu, linear (c_i - nu)/mu on
    // [c_i - mu, c_i], then 0. A negative contributes -clip((c_j + nu)/mu):
    // 0 below -c_j, linear -(c_j + nu)/mu on [-c_j, -c_j + mu], then -1.
    let mut events: Vec<(f64, f64, i64, f64)> = Vec::with_capacity(2 * coeffs.len());
    for (&c, &y) in coeffs.iter().zip(labels) {
        if y > 0 {
            events.push((c - mu, -1.0, 1, c / mu));
            events.push((c, 0.0, -1, -c / mu));
        } else {
            events.push((-c, 0.0, 1, -c / mu));
            events.push((-c + mu, -1.0, -1, c / mu));
        }
    }
    events.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));

    let mut const_sum = n_pos as f64;
    let mut slope_count: i64 = 0;
    let mut offset = 0.0;
    let mut nu = events.last().expect("at least two events").0;
    let mut found = false;
    for &(ev_nu, d_const, d_cnt, d_off) in &events {
        // h is continuous, so evaluating at the event point with the
        // incoming segment's description is valid.
        let h_here = const_sum + offset - slope_count as f64 * ev_nu / mu;
        if h_here <= 0.0 {
            // The root lies in the segment ending here. slope_count > 0 is
            // guaranteed: a flat segment keeps h at its (positive) value.
            nu = if slope_count > 0 {
                (const_sum + offset) * mu / slope_count as f64
            } else {
                ev_nu
            };
            found = true;
            break;
        }
        const_sum += d_const;
        slope_count += d_cnt;
        offset += d_off;
    }
    if !found {
        // Mathematically unreachable (h ends at -n_-); keep the last
        // breakpoint as a safe fallback.
        nu = events.last().expect("nonempty").0;
    }

    // One Newton step against the exactly recomputed residual removes the
    // drift the event accumulators pick up on large instances.
    let (h_exact, interior) = residual_and_interior(coeffs, labels, mu, nu);
    if h_exact != 0.0 && interior > 0 {
        nu += h_exact * mu / interior as f64;
    }

    let beta = beta_at(coeffs, labels, mu, nu);
    PrbepDual { beta, nu, coeffs: coeffs.to_vec() }
}

/// Smoothed PRBEP risk and its gradient at `w`.
///
/// Value is the coupled-box maximum of `c . beta - (mu/2)|beta|^2`;
/// gradient is `sum_i (-2/n) y_i beta_i x_i`. O(n log n + nnz).
pub fn smoothed_prbep_eval(w: &[f64], d: &Dataset, mu: f64) -> RiskEval {
    d.require_both_classes().expect("PRBEP needs both classes");
    let coeffs = prbep_linear_coeffs(w, d);
    let dual = solve_coupled_clip(&coeffs, d.labels(), mu);
    let value = dual.objective(mu);
    let n = d.len() as f64;
    let mut gradient = vec![0.0; w.len()];
    for i in 0..d.len() {
        let factor = -2.0 / n * f64::from(d.label(i)) * dual.beta[i];
        if factor != 0.0 {
            for (idx, val) in d.example(i).iter() {
                gradient[idx] += factor * val;
            }
        }
    }
    RiskEval { value, gradient }
}

/// Exact PRBEP risk and a subgradient at `w`.
///
/// Sorts positive scores ascending and negative scores descending; the
/// best labeling flipping k of each is found by a prefix-sum sweep over
/// k = 0..min(n_+, n_-). Ties prefer the smallest k. The subgradient is
/// `(1/n) sum_i x_i (z*_i - y_i)` for the maximizing labeling.
pub fn exact_prbep_risk(w: &[f64], d: &Dataset) -> RiskEval {
    d.require_both_classes().expect("PRBEP needs both classes");
    let s = scores(w, d);
    let n = d.len() as f64;

    // (score, example index); index tie-break keeps the flip set deterministic.
    let mut pos: Vec<(f64, usize)> = d.pos_indices().iter().map(|&i| (s[i], i)).collect();
    let mut neg: Vec<(f64, usize)> = d.neg_indices().iter().map(|&j| (s[j], j)).collect();
    pos.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    neg.sort_unstable_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));

    let k_max = pos.len().min(neg.len());
    let inv_pos = 1.0 / pos.len() as f64;
    let mut best_k = 0usize;
    let mut best = 0.0_f64;
    let mut prefix = 0.0_f64;
    for k in 1..=k_max {
        prefix += neg[k - 1].0 - pos[k - 1].0;
        let obj = k as f64 * inv_pos + 2.0 / n * prefix;
        if obj > best {
            best = obj;
            best_k = k;
        }
    }

    let mut gradient = vec![0.0; w.len()];
    for &(_, i) in &pos[..best_k] {
        for (idx, val) in d.example(i).iter() {
            gradient[idx] += -2.0 / n * val;
        }
    }
    for &(_, j) in &neg[..best_k] {
        for (idx, val) in d.example(j).iter() {
            gradient[idx] += 2.0 / n * val;
        }
    }
    RiskEval { value: best, gradient }
}
