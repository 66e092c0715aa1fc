//! Frozen random hidden layer and the enhanced design matrix `[X | H1]`.
//!
//! Weights and biases are drawn from U[-1, 1] by a ChaCha8 generator seeded
//! with the map's seed. The stream order is fixed: the weight matrix is filled
//! column by column, then the bias row.

use std::fmt;
use std::str::FromStr;

use ndarray::{s, Array1, Array2, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hidden-node activation. Serialized as the integer ids 1-6; the name is
/// also accepted when reading.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "ActivationRepr", into = "u8")]
pub enum Activation {
    Sigmoid = 1,
    Sine = 2,
    Tribas = 3,
    Radbas = 4,
    Tansig = 5,
    Relu = 6,
}

impl Activation {
    pub const ALL: [Activation; 6] = [
        Activation::Sigmoid,
        Activation::Sine,
        Activation::Tribas,
        Activation::Radbas,
        Activation::Tansig,
        Activation::Relu,
    ];

    pub fn from_id(id: u8) -> Result<Self> {
        match id {
            1 => Ok(Activation::Sigmoid),
            2 => Ok(Activation::Sine),
            3 => Ok(Activation::Tribas),
            4 => Ok(Activation::Radbas),
            5 => Ok(Activation::Tansig),
            6 => Ok(Activation::Relu),
            other => Err(Error::invalid(format!(
                "unknown activation id {other} (expected 1-6)"
            ))),
        }
    }

    pub fn id(self) -> u8 {
        self as u8
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Sigmoid => "sigmoid",
            Activation::Sine => "sine",
            Activation::Tribas => "tribas",
            Activation::Radbas => "radbas",
            Activation::Tansig => "tansig",
            Activation::Relu => "relu",
        }
    }

    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Sigmoid => 1.0 / (1.0 + (-x).exp()),
            Activation::Sine => x.sin(),
            Activation::Tribas => (1.0 - x.abs()).max(0.0),
            Activation::Radbas => (-x * x).exp(),
            Activation::Tansig => 2.0 / (1.0 + (-2.0 * x).exp()) - 1.0,
            Activation::Relu => x.max(0.0),
        }
    }
}

impl TryFrom<u8> for Activation {
    type Error = Error;

    fn try_from(id: u8) -> Result<Self> {
        Activation::from_id(id)
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ActivationRepr {
    Id(u8),
    Name(String),
}

impl TryFrom<ActivationRepr> for Activation {
    type Error = Error;

    fn try_from(r: ActivationRepr) -> Result<Self> {
        match r {
            ActivationRepr::Id(id) => Activation::from_id(id),
            ActivationRepr::Name(name) => name.parse(),
        }
    }
}

impl From<Activation> for u8 {
    fn from(a: Activation) -> u8 {
        a.id()
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Accepts either the numeric id ("1".."6") or the lowercase name.
impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Ok(id) = s.parse::<u8>() {
            return Activation::from_id(id);
        }
        Activation::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid(format!("unknown activation '{s}'")))
    }
}

/// Evaluates activation `id` (1-6) at `x`.
pub fn apply_activation(id: u8, x: f64) -> Result<f64> {
    Ok(Activation::from_id(id)?.apply(x))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomFeatureMap {
    input_dim: usize,
    hidden_dim: usize,
    activation: Activation,
    seed: u64,
    weights: Array2<f64>,
    bias: Array1<f64>,
}

impl RandomFeatureMap {
    pub fn new(
        input_dim: usize,
        hidden_dim: usize,
        activation: Activation,
        seed: u64,
    ) -> Result<Self> {
        if input_dim == 0 || hidden_dim == 0 {
            return Err(Error::invalid(format!(
                "feature map needs m >= 1 and N >= 1 (got m={input_dim}, N={hidden_dim})"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut weights = Array2::zeros((input_dim, hidden_dim));
        for j in 0..hidden_dim {
            for i in 0..input_dim {
                weights[[i, j]] = rng.random_range(-1.0..=1.0);
            }
        }
        let bias = Array1::from_shape_fn(hidden_dim, |_| rng.random_range(-1.0..=1.0));
        Ok(Self {
            input_dim,
            hidden_dim,
            activation,
            seed,
            weights,
            bias,
        })
    }

    /// Builds a map from explicit parameters. Used by tests that need a
    /// known bias (e.g. all zeros).
    pub fn from_parts(
        weights: Array2<f64>,
        bias: Array1<f64>,
        activation: Activation,
    ) -> Result<Self> {
        let (m, n) = weights.dim();
        if m == 0 || n == 0 {
            return Err(Error::invalid("feature map weights must be non-empty"));
        }
        if bias.len() != n {
            return Err(Error::shape(format!(
                "bias length {} does not match hidden width {n}",
                bias.len()
            )));
        }
        Ok(Self {
            input_dim: m,
            hidden_dim: n,
            activation,
            seed: 0,
            weights,
            bias,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden_dim
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn weights(&self) -> &Array2<f64> {
        &self.weights
    }

    pub fn bias(&self) -> &Array1<f64> {
        &self.bias
    }

    fn check_input(&self, x: &ArrayView2<f64>) -> Result<()> {
        if x.ncols() != self.input_dim {
            return Err(Error::shape(format!(
                "input has {} columns, feature map expects {}",
                x.ncols(),
                self.input_dim
            )));
        }
        Ok(())
    }

    /// `H1 = phi(X W1 + b1)`, with the bias row broadcast over samples.
    pub fn hidden(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check_input(&x)?;
        let mut h = x.dot(&self.weights);
        h += &self.bias;
        let act = self.activation;
        h.mapv_inplace(|v| act.apply(v));
        Ok(h)
    }

    /// Assembles `[X | H1]`.
    pub fn enhance(&self, x: ArrayView2<f64>) -> Result<EnhancedMatrix> {
        let hidden = self.hidden(x)?;
        let m = self.input_dim;
        let mut data = Array2::zeros((x.nrows(), m + self.hidden_dim));
        data.slice_mut(s![.., ..m]).assign(&x);
        data.slice_mut(s![.., m..]).assign(&hidden);
        Ok(EnhancedMatrix { data, input_dim: m })
    }
}

/// Row-per-sample design matrix `[X | H1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnhancedMatrix {
    data: Array2<f64>,
    input_dim: usize,
}

impl EnhancedMatrix {
    pub fn nrows(&self) -> usize {
        self.data.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.data.ncols()
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.data.view()
    }

    pub fn direct(&self) -> ArrayView2<'_, f64> {
        self.data.slice(s![.., ..self.input_dim])
    }

    pub fn hidden(&self) -> ArrayView2<'_, f64> {
        self.data.slice(s![.., self.input_dim..])
    }

    pub fn select_rows(&self, rows: &[usize]) -> Array2<f64> {
        self.data.select(Axis(0), rows)
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.data
    }
}
