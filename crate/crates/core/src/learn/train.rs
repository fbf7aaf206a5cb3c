use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::model::{Model, N_CLASSES, N_INPUTS};
use super::{LearnError, TrainingExample};
use crate::features::FEATURE_DIM;
use crate::flock::ModeId;
use crate::rng::SplitMix64;

/// Spread below this marks a feature as constant.
const CONSTANT_STD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 500,
            learning_rate: 0.5,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub examples: usize,
    pub final_loss: f64,
    pub training_accuracy: f64,
    pub missing_classes: Vec<ModeId>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trained {
    pub model: Model,
    pub report: TrainReport,
}

type Weights = [[f64; N_INPUTS]; N_CLASSES];

fn softmax(scores: &[f64; N_CLASSES]) -> [f64; N_CLASSES] {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exp = scores.map(|s| (s - max).exp());
    let sum: f64 = exp.iter().sum();
    exp.map(|e| e / sum)
}

/// Mean cross-entropy over `inputs` (already normalized, bias last) and its
/// gradient with respect to `weights`.
pub fn loss_and_gradient(weights: &Weights, inputs: &[[f64; N_INPUTS]], labels: &[usize]) -> (f64, Weights) {
    let mut loss = 0.0;
    let mut grad = [[0.0; N_INPUTS]; N_CLASSES];
    for (x, &y) in inputs.iter().zip(labels) {
        let scores = weights.map(|row| row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>());
        let p = softmax(&scores);
        loss -= p[y].max(f64::MIN_POSITIVE).ln();
        for k in 0..N_CLASSES {
            let err = p[k] - if k == y { 1.0 } else { 0.0 };
            for j in 0..N_INPUTS {
                grad[k][j] += err * x[j];
            }
        }
    }
    let n = inputs.len().max(1) as f64;
    for row in grad.iter_mut() {
        for g in row.iter_mut() {
            *g /= n;
        }
    }
    (loss / n, grad)
}

/// Fit the classifier by full-batch gradient descent. Deterministic for a
/// given dataset and config.
pub fn train(dataset: &[TrainingExample], config: &TrainConfig) -> Result<Trained, LearnError> {
    if dataset.is_empty() {
        return Err(LearnError::EmptyDataset);
    }
    let raw: Vec<[f64; FEATURE_DIM]> = dataset.iter().map(|e| e.features.to_array()).collect();
    if raw.iter().flatten().any(|v| !v.is_finite()) {
        return Err(LearnError::NonFinite("training features"));
    }
    let labels: Vec<usize> = dataset.iter().map(|e| e.label.index()).collect();

    let n = raw.len() as f64;
    let mut mean = [0.0; FEATURE_DIM];
    let mut std = [1.0; FEATURE_DIM];
    let mut constant = [false; FEATURE_DIM];
    for k in 0..FEATURE_DIM {
        mean[k] = raw.iter().map(|r| r[k]).sum::<f64>() / n;
        let var = raw.iter().map(|r| (r[k] - mean[k]).powi(2)).sum::<f64>() / n;
        if var.sqrt() < CONSTANT_STD {
            constant[k] = true;
        } else {
            std[k] = var.sqrt();
        }
    }

    let present: BTreeSet<ModeId> = dataset.iter().map(|e| e.label).collect();
    let missing: Vec<ModeId> = ModeId::ALL
        .into_iter()
        .filter(|m| !present.contains(m))
        .collect();
    let mut warnings = Vec::new();
    if !missing.is_empty() {
        let names: Vec<&str> = missing.iter().map(|m| m.name()).collect();
        let w = format!("no training examples for modes: {}", names.join(", "));
        log::warn!("{w}");
        warnings.push(w);
    }

    let mut model = Model::from_weights([[0.0; N_INPUTS]; N_CLASSES]);
    model.feature_mean = mean;
    model.feature_std = std;
    model.constant_features = constant;

    if present.len() == 1 {
        let only = *present.iter().next().unwrap();
        let w = format!("dataset has a single class; model always predicts {only}");
        log::warn!("{w}");
        warnings.push(w);
        model.weights = Model::constant(only).weights;
    } else {
        let inputs: Vec<[f64; N_INPUTS]> = raw.iter().map(|r| model.normalize(r)).collect();
        let mut rng = SplitMix64::new(config.seed);
        let mut weights: Weights = [[0.0; N_INPUTS]; N_CLASSES];
        for w in weights.iter_mut().flatten() {
            *w = rng.range_f64(-0.01, 0.01);
        }
        for _ in 0..config.epochs {
            let (_, grad) = loss_and_gradient(&weights, &inputs, &labels);
            for (row, grow) in weights.iter_mut().zip(&grad) {
                for (w, g) in row.iter_mut().zip(grow) {
                    *w -= config.learning_rate * g;
                }
            }
        }
        model.weights = weights;
    }

    let inputs: Vec<[f64; N_INPUTS]> = raw.iter().map(|r| model.normalize(r)).collect();
    let (final_loss, _) = loss_and_gradient(&model.weights, &inputs, &labels);
    if !final_loss.is_finite() || model.weights.iter().flatten().any(|w| !w.is_finite()) {
        return Err(LearnError::NonFinite("trained weights"));
    }
    let correct = dataset
        .iter()
        .filter(|e| super::predict_mode(&model, &e.features).ok() == Some(e.label))
        .count();

    Ok(Trained {
        model,
        report: TrainReport {
            examples: dataset.len(),
            final_loss,
            training_accuracy: correct as f64 / n,
            missing_classes: missing,
            warnings,
        },
    })
}
