#![allow(dead_code)]

use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use wave_rvfl::data::Dataset;

/// Two unit-variance Gaussian classes in `m` dimensions with means at
/// `+-3` on the first axis. Points are redrawn until they sit at least 0.5
/// on their own side of `x0 = 0`, so the classes are linearly separable.
pub fn two_gaussians(n: usize, m: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = Array2::zeros((n, m));
    let mut y = Array1::zeros(n);
    for i in 0..n {
        let label = if i % 2 == 0 { 1.0 } else { -1.0 };
        loop {
            let x0 = 3.0 * label + rng.sample::<f64, _>(StandardNormal);
            if x0 * label >= 0.5 {
                x[[i, 0]] = x0;
                break;
            }
        }
        for j in 1..m {
            x[[i, j]] = rng.sample::<f64, _>(StandardNormal);
        }
        y[i] = label;
    }
    Dataset::new("two-gaussians", x, y).unwrap()
}

/// Held-out split: a seeded shuffle, with every `k`-th shuffled sample in test.
pub fn holdout(d: &Dataset, k: usize, seed: u64) -> (Dataset, Dataset) {
    let mut idx: Vec<usize> = (0..d.n_samples()).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ 0x5eed));
    let (test, train): (Vec<(usize, usize)>, Vec<(usize, usize)>) =
        idx.into_iter().enumerate().partition(|(pos, _)| pos % k == 0);
    let strip = |v: Vec<(usize, usize)>| v.into_iter().map(|(_, i)| i).collect::<Vec<_>>();
    (d.subset(&strip(train)), d.subset(&strip(test)))
}

pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let scale = a.iter().chain(b).map(|v| v.abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

/// Objective written in the reduced `(C / 2 eta) * sum(1 - 1/(1 + ...))` form,
/// evaluated directly without the log-domain rewrite.
pub fn reference_objective(beta: &[f64], z: &Array2<f64>, y: &[f64], c: f64, eta: f64, gamma: f64) -> f64 {
    let reg: f64 = 0.5 * beta.iter().map(|b| b * b).sum::<f64>();
    let mut sum = 0.0;
    for (i, yi) in y.iter().enumerate() {
        let xi: f64 = z.row(i).iter().zip(beta).map(|(a, b)| a * b).sum::<f64>() - yi;
        sum += 1.0 - 1.0 / (1.0 + eta * xi * xi * (gamma * xi).exp());
    }
    reg + c / (2.0 * eta) * sum
}

/// Five-point central difference.
pub fn fd_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|k| {
            let at = |d: f64| {
                let mut p = x.to_vec();
                p[k] += d;
                f(&p)
            };
            (-at(2.0 * h) + 8.0 * at(h) - 8.0 * at(-h) + at(-2.0 * h)) / (12.0 * h)
        })
        .collect()
}
