//! Square loss, wave loss and the regularized wave objective.
//!
//! The wave loss is evaluated through `t = eta * v^2 * exp(gamma * v)` in the
//! log domain: `L(v) = sigmoid(ln t) / eta`. This saturates to exactly `1/eta`
//! (and its derivative to 0) instead of overflowing when `gamma * v` is large.

use ndarray::{Array1, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveLossParams {
    /// Bounding parameter; the loss never exceeds `1/eta`.
    pub eta: f64,
    /// Shape parameter.
    pub gamma: f64,
}

impl WaveLossParams {
    pub fn new(eta: f64, gamma: f64) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::invalid(format!("eta must be positive, got {eta}")));
        }
        if !gamma.is_finite() {
            return Err(Error::invalid(format!("gamma must be finite, got {gamma}")));
        }
        Ok(Self { eta, gamma })
    }

    pub fn bound(&self) -> f64 {
        1.0 / self.eta
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveParams {
    pub c: f64,
    pub wave: WaveLossParams,
}

impl ObjectiveParams {
    pub fn new(c: f64, wave: WaveLossParams) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::invalid(format!("C must be positive, got {c}")));
        }
        Ok(Self { c, wave })
    }
}

/// Mean of squared residuals.
pub fn square_loss(residuals: &[f64]) -> Result<f64> {
    if residuals.is_empty() {
        return Err(Error::invalid("square loss of an empty residual vector"));
    }
    Ok(residuals.iter().map(|r| r * r).sum::<f64>() / residuals.len() as f64)
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[inline]
fn log_t(v: f64, p: &WaveLossParams) -> f64 {
    p.eta.ln() + 2.0 * v.abs().ln() + p.gamma * v
}

/// `(1/eta) * (1 - 1/(1 + eta v^2 e^{gamma v}))`.
#[inline]
pub fn wave_loss(v: f64, p: &WaveLossParams) -> f64 {
    if v == 0.0 {
        return 0.0;
    }
    let lt = log_t(v, p);
    let bound = p.bound();
    if lt > 0.0 {
        // Subtract the small complement so the result stays below the bound
        // for as long as the gap is representable.
        bound - bound * sigmoid(-lt)
    } else {
        bound * sigmoid(lt)
    }
}

/// `dL/dv = v e^{gamma v} (2 + gamma v) / (1 + eta v^2 e^{gamma v})^2`.
///
/// Computed as `s (1 - s) (2 + gamma v) / (eta v)` with `s = sigmoid(ln t)`,
/// which is the same quantity since `v e^{gamma v} = t / (eta v)`.
#[inline]
pub fn wave_loss_dv(v: f64, p: &WaveLossParams) -> f64 {
    if v == 0.0 {
        return 0.0;
    }
    let lt = log_t(v, p);
    let s = sigmoid(lt);
    let one_minus_s = sigmoid(-lt);
    s * one_minus_s * (2.0 + p.gamma * v) / (p.eta * v)
}

fn check_shapes(beta: &ArrayView1<f64>, z: &ArrayView2<f64>, y: &ArrayView1<f64>) -> Result<()> {
    if z.nrows() != y.len() {
        return Err(Error::shape(format!(
            "design matrix has {} rows but {} labels",
            z.nrows(),
            y.len()
        )));
    }
    if z.ncols() != beta.len() {
        return Err(Error::shape(format!(
            "design matrix has {} columns but beta has length {}",
            z.ncols(),
            beta.len()
        )));
    }
    Ok(())
}

/// `(1/2)||beta||^2 + (C/2) sum_i L_wave(z_i beta - y_i)`.
pub fn objective(
    beta: ArrayView1<f64>,
    z: ArrayView2<f64>,
    y: ArrayView1<f64>,
    p: &ObjectiveParams,
) -> Result<f64> {
    check_shapes(&beta, &z, &y)?;
    let reg = 0.5 * beta.dot(&beta);
    if z.nrows() == 0 {
        return Ok(reg);
    }
    let scores = z.dot(&beta);
    let loss: f64 = scores
        .iter()
        .zip(y.iter())
        .map(|(s, yi)| wave_loss(s - yi, &p.wave))
        .sum();
    Ok(reg + 0.5 * p.c * loss)
}

/// Gradient of the objective restricted to the rows of `zb`:
/// `beta + (C/2) sum_i L'(xi_i) z_i^T` with `xi_i = z_i beta - y_i`.
pub fn objective_gradient(
    beta: ArrayView1<f64>,
    zb: ArrayView2<f64>,
    yb: ArrayView1<f64>,
    p: &ObjectiveParams,
) -> Result<Array1<f64>> {
    check_shapes(&beta, &zb, &yb)?;
    if zb.nrows() == 0 {
        return Err(Error::invalid("gradient over an empty batch"));
    }
    let scores = zb.dot(&beta);
    let weights: Array1<f64> = scores
        .iter()
        .zip(yb.iter())
        .map(|(s, yi)| 0.5 * p.c * wave_loss_dv(s - yi, &p.wave))
        .collect();
    let mut grad = zb.t().dot(&weights);
    grad += &beta;
    Ok(grad)
}
