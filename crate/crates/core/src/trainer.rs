//! Mini-batch Adam training of the wave-loss RVFL objective.

use std::io::Write;

use ndarray::{Array1, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::adam::{sample_minibatch, AdamState};
use crate::data::Dataset;
use crate::derive_seed;
use crate::error::{Error, Result};
use crate::feature_map::{Activation, RandomFeatureMap};
use crate::losses::{objective, objective_gradient, ObjectiveParams, WaveLossParams};
use crate::model::{ModelWeights, TrainingInfo, Variant};

/// Stream tag separating the mini-batch generator from the feature-map one.
const BATCH_STREAM: u64 = 0xBA7C_4E5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    #[serde(rename = "C")]
    pub c: f64,
    pub eta: f64,
    pub gamma: f64,
    #[serde(rename = "N")]
    pub n_hidden: usize,
    pub activation: Activation,
    pub alpha: f64,
    /// Stop once `max |beta_t - beta_{t-1}| < tol`.
    pub tol: f64,
    pub max_iters: usize,
    /// `None` picks 32 below 500 samples and 256 otherwise.
    pub batch_size: Option<usize>,
    pub seed: u64,
    pub beta0: f64,
    pub g0: f64,
    pub u0: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub epsilon: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            c: 10.0,
            eta: 0.6,
            gamma: 0.0,
            n_hidden: 23,
            activation: Activation::Sigmoid,
            alpha: 0.01,
            tol: 1e-5,
            max_iters: 1000,
            batch_size: None,
            seed: 0,
            beta0: 0.01,
            g0: 0.01,
            u0: 0.01,
            lambda1: 0.9,
            lambda2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl TrainConfig {
    pub fn default_batch_size(n: usize) -> usize {
        if n < 500 {
            32
        } else {
            256
        }
    }

    pub fn objective_params(&self) -> Result<ObjectiveParams> {
        ObjectiveParams::new(self.c, WaveLossParams::new(self.eta, self.gamma)?)
    }

    fn validate(&self) -> Result<()> {
        if self.n_hidden == 0 {
            return Err(Error::invalid("N must be at least 1"));
        }
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters must be at least 1"));
        }
        if !(self.tol >= 0.0) {
            return Err(Error::invalid("tolerance must be non-negative"));
        }
        if self.batch_size == Some(0) {
            return Err(Error::invalid("mini-batch size must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: usize,
    pub objective: f64,
    pub step_infnorm: f64,
}

pub fn write_trace_csv<W: Write>(mut w: W, rows: &[TraceRow]) -> std::io::Result<()> {
    writeln!(w, "iter,objective,step_infnorm")?;
    for r in rows {
        writeln!(w, "{},{},{}", r.iter, r.objective, r.step_infnorm)?;
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: ModelWeights,
    pub trace: Option<Vec<TraceRow>>,
}

/// Trains a Wave-RVFL model. Builds the random layer and design matrix once,
/// then runs Adam on a fresh mini-batch every iteration until the largest
/// coordinate change drops below `tol` or `max_iters` is reached.
pub fn train_wave_rvfl(data: &Dataset, cfg: &TrainConfig) -> Result<ModelWeights> {
    Ok(fit(data, cfg, false)?.model)
}

/// Like [`train_wave_rvfl`], also recording the full-data objective and step
/// size at every iteration.
pub fn train_wave_rvfl_traced(data: &Dataset, cfg: &TrainConfig) -> Result<TrainOutcome> {
    fit(data, cfg, true)
}

fn fit(data: &Dataset, cfg: &TrainConfig, trace: bool) -> Result<TrainOutcome> {
    cfg.validate()?;
    let n = data.n_samples();
    if n == 0 {
        return Err(Error::invalid("cannot train on an empty dataset"));
    }
    let params = cfg.objective_params()?;
    let map = RandomFeatureMap::new(data.n_features(), cfg.n_hidden, cfg.activation, cfg.seed)?;
    let z = map.enhance(data.x().view())?.into_inner();
    let y = data.y();
    let d = z.ncols();

    let mut s = cfg.batch_size.unwrap_or_else(|| TrainConfig::default_batch_size(n));
    if s > n {
        log::warn!("mini-batch size {s} exceeds {n} samples; clamping to {n}");
        s = n;
    }

    let mut beta = Array1::from_elem(d, cfg.beta0);
    let mut adam = AdamState::new(
        d,
        cfg.g0,
        cfg.u0,
        cfg.alpha,
        cfg.lambda1,
        cfg.lambda2,
        cfg.epsilon,
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, BATCH_STREAM));
    let mut rows = trace.then(Vec::new);
    let mut iterations = 0;
    let mut converged = false;

    while iterations < cfg.max_iters {
        let idx = sample_minibatch(n, s, &mut rng)?;
        let zb = z.select(Axis(0), &idx);
        let yb = y.select(Axis(0), &idx);
        let grad = objective_gradient(beta.view(), zb.view(), yb.view(), &params)?;
        let change = adam.step(&mut beta, grad.view())?;
        iterations += 1;
        if let Some(rows) = rows.as_mut() {
            rows.push(TraceRow {
                iter: iterations,
                objective: objective(beta.view(), z.view(), y.view(), &params)?,
                step_infnorm: change,
            });
        }
        if change < cfg.tol {
            converged = true;
            break;
        }
    }

    let final_objective = objective(beta.view(), z.view(), y.view(), &params)?;
    let model = ModelWeights::new(Variant::WaveRvfl, map, beta, cfg.c, Some(params.wave))?
        .with_training(TrainingInfo {
            iterations,
            final_objective,
            converged,
        });
    Ok(TrainOutcome { model, trace: rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};

    fn small() -> Dataset {
        let x = Array2::from_shape_fn((40, 2), |(i, j)| ((i * 7 + j * 3) % 11) as f64 / 10.0);
        let y = Array1::from_shape_fn(40, |i| if x[[i, 0]] > 0.5 { 1.0 } else { -1.0 });
        Dataset::new("small", x, y).unwrap()
    }

    #[test]
    fn huge_tolerance_stops_after_one_iteration() {
        let cfg = TrainConfig {
            tol: 10.0,
            ..Default::default()
        };
        let m = train_wave_rvfl(&small(), &cfg).unwrap();
        let info = m.training().unwrap();
        assert_eq!(info.iterations, 1);
        assert!(info.converged);
    }

    #[test]
    fn zero_learning_rate_keeps_initial_beta() {
        let cfg = TrainConfig {
            alpha: 0.0,
            max_iters: 1,
            ..Default::default()
        };
        let m = train_wave_rvfl(&small(), &cfg).unwrap();
        assert!(m.beta().iter().all(|&b| b == 0.01));
        assert_eq!(m.beta().len(), 2 + 23);
    }

    #[test]
    fn deterministic() {
        let cfg = TrainConfig {
            max_iters: 50,
            seed: 3,
            ..Default::default()
        };
        let a = train_wave_rvfl(&small(), &cfg).unwrap();
        let b = train_wave_rvfl(&small(), &cfg).unwrap();
        assert_eq!(a.beta(), b.beta());
    }

    #[test]
    fn oversized_batch_is_clamped() {
        let cfg = TrainConfig {
            batch_size: Some(1000),
            max_iters: 5,
            ..Default::default()
        };
        assert!(train_wave_rvfl(&small(), &cfg).is_ok());
    }

    #[test]
    fn empty_dataset_rejected() {
        let d = Dataset::new("e", Array2::zeros((0, 2)), array![]).unwrap();
        assert!(matches!(
            train_wave_rvfl(&d, &TrainConfig::default()),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn trace_has_one_row_per_iteration() {
        let cfg = TrainConfig {
            max_iters: 20,
            tol: 0.0,
            ..Default::default()
        };
        let out = train_wave_rvfl_traced(&small(), &cfg).unwrap();
        let rows = out.trace.unwrap();
        assert_eq!(rows.len(), 20);
        assert_eq!(rows.last().unwrap().iter, 20);
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("iter,objective,step_infnorm\n1,"));
        assert_eq!(text.lines().count(), 21);
    }
}
