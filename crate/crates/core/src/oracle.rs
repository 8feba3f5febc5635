//! Brute-force reference implementations used to verify the production
//! risk evaluators and dual solvers. These ship with the crate because the
//! acceptance suite depends on them, but they are deliberately slow and
//! size-limited: correctness anchors, not tools.

use crate::data::{scores, Dataset};

/// Exact PRBEP risk by full enumeration of the 2^n labelings with equal
/// false-positive and false-negative counts. Panics for n > 16.
pub fn enumerate_prbep_risk(w: &[f64], d: &Dataset) -> f64 {
    let n = d.len();
    assert!(n <= 16, "enumeration limited to n <= 16");
    d.require_both_classes().expect("PRBEP needs both classes");
    let s = scores(w, d);
    let n_pos = d.n_pos() as f64;
    let nf = n as f64;

    let mut best = f64::NEG_INFINITY;
    for mask in 0u32..(1 << n) {
        // Bit set means z_i = +1.
        let mut b = 0usize;
        let mut c = 0usize;
        let mut linear = 0.0;
        for (i, &si) in s.iter().enumerate() {
            let z: f64 = if mask & (1 << i) != 0 { 1.0 } else { -1.0 };
            let y = f64::from(d.label(i));
            if d.label(i) > 0 && z < 0.0 {
                b += 1;
            }
            if d.label(i) < 0 && z > 0.0 {
                c += 1;
            }
            linear += si * (z - y);
        }
        if b != c {
            continue;
        }
        let obj = b as f64 / n_pos + linear / nf;
        if obj > best {
            best = obj;
        }
    }
    best
}

/// Exact ROCArea risk by per-pair maximization. Panics beyond 10^4 pairs.
pub fn enumerate_rocarea_risk(w: &[f64], d: &Dataset) -> f64 {
    assert!(d.num_pairs() <= 10_000, "enumeration limited to 10^4 pairs");
    d.require_both_classes().expect("ROCArea needs both classes");
    let s = scores(w, d);
    let mut acc = 0.0;
    for &i in d.pos_indices() {
        for &j in d.neg_indices() {
            let diff = s[i] - s[j];
            // z = +1 contributes diff, z = -1 contributes 1 - diff.
            acc += diff.max(1.0 - diff);
        }
    }
    acc / d.num_pairs() as f64
}

/// Reference maximizer of `c . beta - (mu/2)|beta|^2` over the coupled box,
/// independent of the breakpoint solver.
///
/// The maximizer is the Euclidean projection of `c/mu` onto
/// `box [0,1]^n intersect {sum_P beta = sum_N beta}`, found here by
/// projected-gradient steps whose projections run Dykstra's alternating
/// scheme between the box and the coupling hyperplane. Iterates until the
/// objective changes by less than 1e-12. Intended for n <= 50.
pub fn reference_smoothed_prbep(coeffs: &[f64], labels: &[i8], mu: f64) -> (Vec<f64>, f64) {
    assert!(mu > 0.0);
    assert_eq!(coeffs.len(), labels.len());
    assert!(coeffs.len() <= 50, "reference solver limited to n <= 50");
    let n = coeffs.len();
    let signs: Vec<f64> = labels.iter().map(|&y| f64::from(y)).collect();
    let objective = |beta: &[f64]| -> f64 {
        let lin: f64 = coeffs.iter().zip(beta).map(|(c, b)| c * b).sum();
        let sq: f64 = beta.iter().map(|b| b * b).sum();
        lin - 0.5 * mu * sq
    };

    let dykstra = |target: &[f64]| -> Vec<f64> {
        let mut x = target.to_vec();
        let mut p_box = vec![0.0; n];
        let mut p_plane = vec![0.0; n];
        for _ in 0..100_000 {
            let mut max_move = 0.0_f64;
            // Box projection with correction memory.
            for i in 0..n {
                let y = x[i] + p_box[i];
                let proj = y.clamp(0.0, 1.0);
                p_box[i] = y - proj;
                max_move = max_move.max((proj - x[i]).abs());
                x[i] = proj;
            }
            // Hyperplane {signs . beta = 0} projection with correction memory.
            let mut dot = 0.0;
            for i in 0..n {
                dot += signs[i] * (x[i] + p_plane[i]);
            }
            let shift = dot / n as f64;
            for i in 0..n {
                let y = x[i] + p_plane[i];
                let proj = y - shift * signs[i];
                p_plane[i] = y - proj;
                max_move = max_move.max((proj - x[i]).abs());
                x[i] = proj;
            }
            if max_move < 1e-14 {
                break;
            }
        }
        x
    };

    let mut beta = vec![0.0; n];
    let mut value = objective(&beta);
    for _ in 0..10_000 {
        // Ascent step 1/mu followed by projection onto the feasible set.
        let target: Vec<f64> = beta
            .iter()
            .zip(coeffs)
            .map(|(&b, &c)| b + (c - mu * b) / mu)
            .collect();
        beta = dykstra(&target);
        let next = objective(&beta);
        if (next - value).abs() < 1e-12 {
            value = next;
            break;
        }
        value = next;
    }
    (beta, value)
}

/// Central-difference gradient with per-coordinate step
/// `h_i = 1e-6 * (1 + |w_i|)`.
pub fn finite_diff_gradient<F>(mut f: F, w: &[f64]) -> Vec<f64>
where
    F: FnMut(&[f64]) -> f64,
{
    let mut grad = vec![0.0; w.len()];
    let mut probe = w.to_vec();
    for i in 0..w.len() {
        let h = 1e-6 * (1.0 + w[i].abs());
        probe[i] = w[i] + h;
        let up = f(&probe);
        probe[i] = w[i] - h;
        let down = f(&probe);
        probe[i] = w[i];
        assert!(up.is_finite() && down.is_finite(), "non-finite evaluation in finite differences");
        grad[i] = (up - down) / (2.0 * h);
    }
    grad
}
