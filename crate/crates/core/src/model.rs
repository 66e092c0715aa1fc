//! Trained output weights plus everything needed to rebuild the design matrix.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use ndarray::{Array1, Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::data::MinMaxScaler;
use crate::error::{Error, Result};
use crate::feature_map::{Activation, RandomFeatureMap};
use crate::losses::WaveLossParams;

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    /// Square loss, closed form, direct links.
    #[serde(rename = "rvfl")]
    Rvfl,
    /// Square loss, closed form, hidden features only (RVFLwoDL).
    #[serde(rename = "elm")]
    Elm,
    /// Wave loss trained with mini-batch Adam, direct links.
    #[serde(rename = "wave-rvfl")]
    WaveRvfl,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Rvfl, Variant::Elm, Variant::WaveRvfl];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Rvfl => "rvfl",
            Variant::Elm => "elm",
            Variant::WaveRvfl => "wave-rvfl",
        }
    }

    pub fn has_direct_links(self) -> bool {
        !matches!(self, Variant::Elm)
    }

    pub fn design_width(self, map: &RandomFeatureMap) -> usize {
        if self.has_direct_links() {
            map.input_dim() + map.hidden_dim()
        } else {
            map.hidden_dim()
        }
    }

    /// `[X | H1]` for variants with direct links, `H1` otherwise.
    pub fn design_matrix(self, map: &RandomFeatureMap, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        if self.has_direct_links() {
            Ok(map.enhance(x)?.into_inner())
        } else {
            map.hidden(x)
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rvfl" => Ok(Variant::Rvfl),
            "elm" | "rvflwodl" => Ok(Variant::Elm),
            "wave-rvfl" | "wave" | "wavervfl" => Ok(Variant::WaveRvfl),
            other => Err(Error::invalid(format!(
                "unknown variant '{other}' (expected rvfl, elm or wave-rvfl)"
            ))),
        }
    }
}

/// Outcome of an iterative fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainingInfo {
    pub iterations: usize,
    pub final_objective: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelWeights {
    variant: Variant,
    feature_map: RandomFeatureMap,
    beta: Array1<f64>,
    c: f64,
    wave: Option<WaveLossParams>,
    scaler: Option<MinMaxScaler>,
    training: Option<TrainingInfo>,
}

impl ModelWeights {
    pub fn new(
        variant: Variant,
        feature_map: RandomFeatureMap,
        beta: Array1<f64>,
        c: f64,
        wave: Option<WaveLossParams>,
    ) -> Result<Self> {
        let width = variant.design_width(&feature_map);
        if beta.len() != width {
            return Err(Error::shape(format!(
                "{variant} model needs {width} output weights, got {}",
                beta.len()
            )));
        }
        if beta.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("output weights contain non-finite values".into()));
        }
        if variant == Variant::WaveRvfl && wave.is_none() {
            return Err(Error::invalid("wave-rvfl model needs wave loss parameters"));
        }
        Ok(Self {
            variant,
            feature_map,
            beta,
            c,
            wave,
            scaler: None,
            training: None,
        })
    }

    pub fn with_scaler(mut self, scaler: MinMaxScaler) -> Self {
        self.scaler = Some(scaler);
        self
    }

    pub fn with_training(mut self, info: TrainingInfo) -> Self {
        self.training = Some(info);
        self
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn feature_map(&self) -> &RandomFeatureMap {
        &self.feature_map
    }

    pub fn beta(&self) -> &Array1<f64> {
        &self.beta
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn wave(&self) -> Option<WaveLossParams> {
        self.wave
    }

    pub fn scaler(&self) -> Option<&MinMaxScaler> {
        self.scaler.as_ref()
    }

    pub fn training(&self) -> Option<TrainingInfo> {
        self.training
    }

    /// Raw scores `z_i beta`. Applies the stored scaler first, if any.
    pub fn decision_function(&self, x: ArrayView2<f64>) -> Result<Array1<f64>> {
        let z = match &self.scaler {
            Some(s) => {
                let xs = s.transform(x)?;
                self.variant.design_matrix(&self.feature_map, xs.view())?
            }
            None => self.variant.design_matrix(&self.feature_map, x)?,
        };
        Ok(z.dot(&self.beta))
    }

    /// Labels in {-1, +1}; a score of exactly 0 maps to +1.
    pub fn predict(&self, x: ArrayView2<f64>) -> Result<Array1<f64>> {
        Ok(self.decision_function(x)?.mapv(sign_label))
    }

    pub fn to_document(&self) -> ModelDocument {
        ModelDocument {
            format_version: MODEL_FORMAT_VERSION,
            variant: self.variant,
            m: self.feature_map.input_dim(),
            n_hidden: self.feature_map.hidden_dim(),
            activation_id: self.feature_map.activation(),
            seed: self.feature_map.seed(),
            beta: self.beta.to_vec(),
            c: self.c,
            eta: self.wave.map(|w| w.eta),
            gamma: self.wave.map(|w| w.gamma),
            scaler: self.scaler.clone(),
            training: self.training,
        }
    }

    pub fn from_document(doc: ModelDocument) -> Result<Self> {
        if doc.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::invalid(format!(
                "unsupported model format version {}",
                doc.format_version
            )));
        }
        let map = RandomFeatureMap::new(doc.m, doc.n_hidden, doc.activation_id, doc.seed)?;
        let wave = match (doc.eta, doc.gamma) {
            (Some(eta), Some(gamma)) => Some(WaveLossParams::new(eta, gamma)?),
            (None, None) => None,
            _ => return Err(Error::invalid("eta and gamma must be given together")),
        };
        let mut model = ModelWeights::new(doc.variant, map, Array1::from(doc.beta), doc.c, wave)?;
        model.scaler = doc.scaler;
        model.training = doc.training;
        Ok(model)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_document())?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_document(serde_json::from_str(s)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()? + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Json(j) => Error::parse(path, j.to_string()),
            other => other,
        })
    }
}

#[inline]
pub fn sign_label(score: f64) -> f64 {
    if score >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Serialized model. The random layer is stored by its generator inputs and
/// rebuilt on load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub format_version: u32,
    pub variant: Variant,
    pub m: usize,
    #[serde(rename = "N")]
    pub n_hidden: usize,
    pub activation_id: Activation,
    pub seed: u64,
    pub beta: Vec<f64>,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scaler: Option<MinMaxScaler>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub training: Option<TrainingInfo>,
}
