//! Adam moment estimates with bias correction, and uniform mini-batch sampling.

use ndarray::{Array1, ArrayView1, Zip};
use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    /// First-moment estimate.
    pub g: Array1<f64>,
    /// Second-moment estimate.
    pub u: Array1<f64>,
    /// Number of steps taken so far.
    pub t: u64,
    pub alpha: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub epsilon: f64,
}

impl AdamState {
    pub fn new(
        dim: usize,
        g0: f64,
        u0: f64,
        alpha: f64,
        lambda1: f64,
        lambda2: f64,
        epsilon: f64,
    ) -> Result<Self> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::invalid(format!("learning rate must be >= 0, got {alpha}")));
        }
        if !(0.0..1.0).contains(&lambda1) || !(0.0..1.0).contains(&lambda2) {
            return Err(Error::invalid(format!(
                "decay rates must lie in [0, 1), got {lambda1}, {lambda2}"
            )));
        }
        if !(epsilon > 0.0) {
            return Err(Error::invalid(format!("epsilon must be positive, got {epsilon}")));
        }
        if u0 < 0.0 {
            return Err(Error::invalid(format!("initial second moment must be >= 0, got {u0}")));
        }
        Ok(Self {
            g: Array1::from_elem(dim, g0),
            u: Array1::from_elem(dim, u0),
            t: 0,
            alpha,
            lambda1,
            lambda2,
            epsilon,
        })
    }

    pub fn dim(&self) -> usize {
        self.g.len()
    }

    /// One Adam update of `beta` in place. Returns the infinity norm of the
    /// change in `beta`.
    pub fn step(&mut self, beta: &mut Array1<f64>, grad: ArrayView1<f64>) -> Result<f64> {
        if beta.len() != self.dim() || grad.len() != self.dim() {
            return Err(Error::shape(format!(
                "adam state has dimension {}, beta {} and gradient {}",
                self.dim(),
                beta.len(),
                grad.len()
            )));
        }
        let t = self.t + 1;
        if let Some(i) = grad.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!(
                "non-finite gradient component {i} at iteration {t}"
            )));
        }
        let (l1, l2) = (self.lambda1, self.lambda2);
        let c1 = 1.0 - l1.powf(t as f64);
        let c2 = 1.0 - l2.powf(t as f64);
        let (alpha, eps) = (self.alpha, self.epsilon);
        let mut max_change = 0.0f64;
        Zip::from(&mut self.g)
            .and(&mut self.u)
            .and(beta)
            .and(&grad)
            .for_each(|g, u, b, &d| {
                *g = l1 * *g + (1.0 - l1) * d;
                *u = l2 * *u + (1.0 - l2) * d * d;
                let g_hat = *g / c1;
                let u_hat = *u / c2;
                let delta = alpha * g_hat / (u_hat.sqrt() + eps);
                let before = *b;
                *b -= delta;
                max_change = max_change.max((*b - before).abs());
            });
        self.t = t;
        Ok(max_change)
    }
}

/// Functional form of [`AdamState::step`].
pub fn adam_step(
    state: &AdamState,
    beta: ArrayView1<f64>,
    grad: ArrayView1<f64>,
) -> Result<(AdamState, Array1<f64>)> {
    let mut next = state.clone();
    let mut b = beta.to_owned();
    next.step(&mut b, grad)?;
    Ok((next, b))
}

/// `s` distinct indices drawn uniformly from `0..n`.
pub fn sample_minibatch<R: Rng + ?Sized>(n: usize, s: usize, rng: &mut R) -> Result<Vec<usize>> {
    if s == 0 {
        return Err(Error::invalid("mini-batch size must be at least 1"));
    }
    if s > n {
        return Err(Error::invalid(format!(
            "mini-batch size {s} exceeds sample count {n}"
        )));
    }
    Ok(index::sample(rng, n, s).into_vec())
}
