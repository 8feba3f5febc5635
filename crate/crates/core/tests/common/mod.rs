//! Shared generators and estimators for the integration and acceptance
//! tests.

#![allow(dead_code)]

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use smoothrank::data::{Dataset, SparseVector};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Nonzero uniform value in [-2, 2].
fn nonzero_value(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let v: f64 = rng.random_range(-2.0..2.0);
        if v.abs() > 1e-3 {
            return v;
        }
    }
}

/// Random sparse dataset with both classes guaranteed.
pub fn random_dataset(rng: &mut ChaCha8Rng, n: usize, p: usize) -> Dataset {
    assert!(n >= 2);
    let mut examples = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let nnz = rng.random_range(0..=p.min(6));
        let mut idx: Vec<usize> = (0..p).collect();
        // Partial shuffle to pick nnz distinct indices.
        for k in 0..nnz {
            let j = rng.random_range(k..p);
            idx.swap(k, j);
        }
        let mut entries: Vec<(usize, f64)> =
            idx[..nnz].iter().map(|&k| (k, nonzero_value(rng))).collect();
        entries.sort_unstable_by_key(|&(k, _)| k);
        examples.push(SparseVector::new(entries).unwrap());
        let label = match i {
            0 => 1,
            1 => -1,
            _ => {
                if rng.random_bool(0.5) {
                    1
                } else {
                    -1
                }
            }
        };
        labels.push(label);
    }
    Dataset::new(examples, labels).unwrap()
}

/// Uniform random point in the ball of the given radius.
pub fn random_weights(rng: &mut ChaCha8Rng, p: usize, radius: f64) -> Vec<f64> {
    loop {
        let w: Vec<f64> = (0..p).map(|_| rng.random_range(-1.0..1.0)).collect();
        let norm_sq: f64 = w.iter().map(|v| v * v).sum();
        if norm_sq <= 1.0 {
            return w.iter().map(|v| v * radius).collect();
        }
    }
}

/// Two overlapping classes with label noise: a desk-scale stand-in for the
/// public benchmark datasets. Deterministic for a fixed seed.
pub fn synthetic_classification(
    seed: u64,
    n: usize,
    p: usize,
    nnz: usize,
    flip_prob: f64,
) -> Dataset {
    let mut rng = rng(seed);
    let center: Vec<f64> = (0..p)
        .map(|k| if k < p / 2 { 1.0 } else { -0.5 })
        .collect();
    let mut examples = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let true_label: f64 = if rng.random_bool(0.3) { 1.0 } else { -1.0 };
        let mut idx: Vec<usize> = (0..p).collect();
        for k in 0..nnz {
            let j = rng.random_range(k..p);
            idx.swap(k, j);
        }
        let mut entries: Vec<(usize, f64)> = idx[..nnz]
            .iter()
            .map(|&k| {
                let noise: f64 = rng.random_range(-1.5..1.5);
                let mut v = true_label * center[k] + noise;
                if v == 0.0 {
                    v = 0.1;
                }
                (k, v)
            })
            .collect();
        entries.sort_unstable_by_key(|&(k, _)| k);
        let observed = if rng.random_bool(flip_prob) { -true_label } else { true_label };
        // Guarantee both classes regardless of the draws.
        let label = match i {
            0 => 1,
            1 => -1,
            _ => observed as i8,
        };
        examples.push(SparseVector::new(entries).unwrap());
        labels.push(label);
    }
    Dataset::new(examples, labels).unwrap()
}

/// Power-iteration estimate of the operator norm of the PRBEP coupling
/// map, whose i-th column is `(-2/n) y_i x_i`.
pub fn prbep_operator_norm_estimate(d: &Dataset, iters: usize) -> f64 {
    let n = d.len();
    let p = d.num_features();
    if p == 0 {
        return 0.0;
    }
    let scale = -2.0 / n as f64;
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut sigma = 0.0;
    for _ in 0..iters {
        let mut u = vec![0.0; p];
        for (i, &vi) in v.iter().enumerate() {
            let f = scale * f64::from(d.label(i)) * vi;
            for (idx, val) in d.example(i).iter() {
                u[idx] += f * val;
            }
        }
        for (i, vi) in v.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (idx, val) in d.example(i).iter() {
                acc += u[idx] * val;
            }
            *vi = scale * f64::from(d.label(i)) * acc;
        }
        let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        sigma = norm.sqrt();
        for vi in v.iter_mut() {
            *vi /= norm;
        }
    }
    sigma
}

pub fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn l2_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}
