use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::LearnError;
use crate::features::{FeatureVector, FEATURE_DIM};
use crate::flock::ModeId;

pub const MODEL_FORMAT: &str = "murmur-weight-mode-classifier";
pub const MODEL_VERSION: u32 = 1;
pub const N_CLASSES: usize = 7;
/// Eight normalized features plus a bias input.
pub const N_INPUTS: usize = FEATURE_DIM + 1;

/// Trained classifier. Row `k` of `weights` scores `ModeId::ALL[k]`; the last
/// column multiplies the constant bias input.
///
/// On disk this is canonical JSON with these exact field names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub format: String,
    pub version: u32,
    pub weights: [[f64; N_INPUTS]; N_CLASSES],
    pub feature_mean: [f64; FEATURE_DIM],
    pub feature_std: [f64; FEATURE_DIM],
    /// Features with zero spread in training; they normalize to 0.
    pub constant_features: [bool; FEATURE_DIM],
}

impl Model {
    /// Model with identity normalization and the given weights.
    pub fn from_weights(weights: [[f64; N_INPUTS]; N_CLASSES]) -> Self {
        Self {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_VERSION,
            weights,
            feature_mean: [0.0; FEATURE_DIM],
            feature_std: [1.0; FEATURE_DIM],
            constant_features: [false; FEATURE_DIM],
        }
    }

    /// Model that always predicts `mode`.
    pub fn constant(mode: ModeId) -> Self {
        let mut weights = [[0.0; N_INPUTS]; N_CLASSES];
        weights[mode.index()][FEATURE_DIM] = 1.0;
        Self::from_weights(weights)
    }

    /// Z-score `raw` and append the bias input.
    pub fn normalize(&self, raw: &[f64; FEATURE_DIM]) -> [f64; N_INPUTS] {
        let mut out = [1.0; N_INPUTS];
        for k in 0..FEATURE_DIM {
            out[k] = if self.constant_features[k] {
                0.0
            } else {
                (raw[k] - self.feature_mean[k]) / self.feature_std[k]
            };
        }
        out
    }

    pub fn scores(&self, input: &[f64; N_INPUTS]) -> [f64; N_CLASSES] {
        self.weights
            .map(|row| row.iter().zip(input).map(|(w, x)| w * x).sum())
    }

    pub fn validate(&self) -> Result<(), LearnError> {
        if self.format != MODEL_FORMAT {
            return Err(LearnError::Format(self.format.clone()));
        }
        if self.version != MODEL_VERSION {
            return Err(LearnError::Version {
                found: self.version,
                expected: MODEL_VERSION,
            });
        }
        let finite = self.weights.iter().flatten().all(|w| w.is_finite())
            && self.feature_mean.iter().all(|m| m.is_finite());
        if !finite {
            return Err(LearnError::Corrupt("non-finite parameters".into()));
        }
        for k in 0..FEATURE_DIM {
            let s = self.feature_std[k];
            if !self.constant_features[k] && !(s.is_finite() && s > 0.0) {
                return Err(LearnError::Corrupt(format!(
                    "feature {k} has std {s} but is not flagged constant"
                )));
            }
        }
        Ok(())
    }
}

/// Highest-scoring mode; ties go to the earlier mode in `ModeId` order.
pub fn predict_mode(model: &Model, features: &FeatureVector) -> Result<ModeId, LearnError> {
    let raw = features.to_array();
    if raw.iter().any(|v| !v.is_finite()) {
        return Err(LearnError::NonFinite("features"));
    }
    let scores = model.scores(&model.normalize(&raw));
    let mut best = 0;
    for (k, s) in scores.iter().enumerate() {
        if *s > scores[best] {
            best = k;
        }
    }
    Ok(ModeId::ALL[best])
}

pub fn save_model(model: &Model, path: impl AsRef<Path>) -> Result<(), LearnError> {
    let mut text = serde_json::to_string_pretty(model)
        .map_err(|e| LearnError::Corrupt(e.to_string()))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Model, LearnError> {
    let text = fs::read_to_string(path)?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| LearnError::Corrupt(e.to_string()))?;
    // Check the tag before the shape, so an old or foreign file reports why.
    match value.get("format").and_then(|f| f.as_str()) {
        Some(MODEL_FORMAT) => {}
        Some(other) => return Err(LearnError::Format(other.to_string())),
        None => return Err(LearnError::Corrupt("missing format tag".into())),
    }
    match value.get("version").and_then(|v| v.as_u64()) {
        Some(v) if v == u64::from(MODEL_VERSION) => {}
        Some(v) => {
            return Err(LearnError::Version {
                found: u32::try_from(v).unwrap_or(u32::MAX),
                expected: MODEL_VERSION,
            })
        }
        None => return Err(LearnError::Corrupt("missing version".into())),
    }
    let model: Model =
        serde_json::from_value(value).map_err(|e| LearnError::Corrupt(e.to_string()))?;
    model.validate()?;
    Ok(model)
}
