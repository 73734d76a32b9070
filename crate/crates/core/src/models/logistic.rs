//! L2-regularized logistic regression, full-batch gradient descent.
//!
//! Objective: `mean_i softplus(m_i) - y_i m_i + (l2 / 2) |w|^2` where
//! `m_i = w . x_i + b`. The bias is not regularized.

use super::{LinearModel, ModelError, ModelKind, TrainingSet};
use crate::features::FEATURE_LEN;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    pub l2: f64,
    pub iterations: usize,
    pub learning_rate: f64,
}

impl Default for LogisticParams {
    fn default() -> Self {
        Self {
            l2: 1e-3,
            iterations: 500,
            learning_rate: 0.5,
        }
    }
}

fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn target(label: bool) -> f64 {
    if label {
        1.0
    } else {
        0.0
    }
}

pub fn log_loss(model: &LinearModel, data: &TrainingSet, l2: f64) -> f64 {
    let n = data.len().max(1) as f64;
    let data_term: f64 = data
        .instances
        .iter()
        .map(|inst| {
            let m = model.margin(&inst.x);
            softplus(m) - target(inst.label) * m
        })
        .sum::<f64>()
        / n;
    let reg: f64 = model.weights.iter().map(|w| w * w).sum::<f64>();
    data_term + 0.5 * l2 * reg
}

/// Analytic gradient of [`log_loss`]: `(d/dw, d/db)`.
pub fn log_loss_gradient(
    model: &LinearModel,
    data: &TrainingSet,
    l2: f64,
) -> ([f64; FEATURE_LEN], f64) {
    let n = data.len().max(1) as f64;
    let mut gw = [0.0; FEATURE_LEN];
    let mut gb = 0.0;
    for inst in &data.instances {
        let r = logistic(model.margin(&inst.x)) - target(inst.label);
        for (g, x) in gw.iter_mut().zip(&inst.x.0) {
            *g += r * x;
        }
        gb += r;
    }
    for (g, w) in gw.iter_mut().zip(&model.weights) {
        *g = *g / n + l2 * w;
    }
    (gw, gb / n)
}

pub fn train_logistic(
    data: &TrainingSet,
    params: &LogisticParams,
) -> Result<LinearModel, ModelError> {
    data.require_both_classes()?;
    let mut model = LinearModel::zero(ModelKind::Lr);
    for _ in 0..params.iterations {
        let (gw, gb) = log_loss_gradient(&model, data, params.l2);
        for (w, g) in model.weights.iter_mut().zip(&gw) {
            *w -= params.learning_rate * g;
        }
        model.bias -= params.learning_rate * gb;
    }
    if !model.is_finite() {
        return Err(ModelError::NonFinite);
    }
    Ok(model)
}
