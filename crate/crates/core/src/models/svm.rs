//! Linear SVM trained by full-batch subgradient descent on the
//! class-weighted hinge loss.
//!
//! Objective: `(l2 / 2) |w|^2 + (1/n) sum_i c_i max(0, 1 - y_i m_i)` with
//! `y_i in {-1, +1}` and `c_i = positive_class_weight` for receptive
//! instances, 1 otherwise. Step size decays as `learning_rate / sqrt(t)`;
//! the returned model is the average of the iterates from the second half
//! of the run.

use super::{LinearModel, ModelError, ModelKind, TrainingSet};
use crate::features::FEATURE_LEN;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    /// Loss multiplier for receptive instances; raising it trades precision
    /// for recall.
    pub positive_class_weight: f64,
    pub l2: f64,
    pub iterations: usize,
    pub learning_rate: f64,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            positive_class_weight: 3.0,
            l2: 1e-3,
            iterations: 1000,
            learning_rate: 0.5,
        }
    }
}

pub fn train_linear_svm(data: &TrainingSet, params: &SvmParams) -> Result<LinearModel, ModelError> {
    data.require_both_classes()?;
    let n = data.len() as f64;
    let mut w = [0.0; FEATURE_LEN];
    let mut b = 0.0;
    let mut avg_w = [0.0; FEATURE_LEN];
    let mut avg_b = 0.0;
    let mut averaged = 0usize;
    let avg_from = params.iterations / 2;

    for t in 0..params.iterations {
        let mut gw = [0.0; FEATURE_LEN];
        let mut gb = 0.0;
        for inst in &data.instances {
            let (y, c) = if inst.label {
                (1.0, params.positive_class_weight)
            } else {
                (-1.0, 1.0)
            };
            let m = inst.x.dot(&w) + b;
            if y * m < 1.0 {
                for (g, x) in gw.iter_mut().zip(&inst.x.0) {
                    *g -= c * y * x;
                }
                gb -= c * y;
            }
        }
        let step = params.learning_rate / ((t + 1) as f64).sqrt();
        for (wk, g) in w.iter_mut().zip(&gw) {
            *wk -= step * (g / n + params.l2 * *wk);
        }
        b -= step * gb / n;

        if t >= avg_from {
            averaged += 1;
            let k = averaged as f64;
            for (a, wk) in avg_w.iter_mut().zip(&w) {
                *a += (wk - *a) / k;
            }
            avg_b += (b - avg_b) / k;
        }
    }

    let model = LinearModel {
        kind: ModelKind::Svm,
        weights: avg_w,
        bias: avg_b,
    };
    if !model.is_finite() {
        return Err(ModelError::NonFinite);
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureVector;
    use crate::models::testutil::{linear_truth, one_d};
    use crate::models::{prf, LabeledInstance};

    /// Reference loop on 1-D data: plain subgradient, same schedule.
    fn reference(xs: &[(f64, bool)], p: &SvmParams) -> (f64, f64) {
        let (mut w, mut b) = (0.0f64, 0.0f64);
        let (mut aw, mut ab, mut k) = (0.0, 0.0, 0.0);
        let n = xs.len() as f64;
        for t in 0..p.iterations {
            let (mut gw, mut gb) = (0.0, 0.0);
            for &(x, pos) in xs {
                let y = if pos { 1.0 } else { -1.0 };
                let c = if pos { p.positive_class_weight } else { 1.0 };
                if y * (w * x + b) < 1.0 {
                    gw -= c * y * x;
                    gb -= c * y;
                }
            }
            let s = p.learning_rate / ((t + 1) as f64).sqrt();
            w -= s * (gw / n + p.l2 * w);
            b -= s * gb / n;
            if t >= p.iterations / 2 {
                k += 1.0;
                aw += (w - aw) / k;
                ab += (b - ab) / k;
            }
        }
        (aw, ab)
    }

    #[test]
    fn separable_toy_is_fit_perfectly() {
        let pts = [(0.0, false), (0.2, false), (0.8, true), (1.0, true)];
        let data = one_d(&pts, 5);
        let p = SvmParams {
            positive_class_weight: 1.0,
            ..Default::default()
        };
        let m = train_linear_svm(&data, &p).unwrap();
        let preds: Vec<bool> = data
            .instances
            .iter()
            .map(|i| m.is_receptive(&i.x))
            .collect();
        let labels: Vec<bool> = data.instances.iter().map(|i| i.label).collect();
        assert_eq!(preds, labels);

        let flat: Vec<(f64, bool)> = (0..5).flat_map(|_| pts).collect();
        let (w, b) = reference(&flat, &p);
        assert!((m.weights[0] - w).abs() < 1e-9 && (m.bias - b).abs() < 1e-9);
        assert!(flat.iter().all(|&(x, pos)| (w * x + b > 0.0) == pos));
    }

    #[test]
    fn class_weight_raises_recall() {
        let mut w = [0.0; FEATURE_LEN];
        w[0] = 3.0;
        w[1] = 2.0;
        w[2] = -2.0;
        let data = linear_truth(600, 21, &w, -3.5);
        let (pos, neg) = data.class_counts();
        assert!(pos * 2 < neg, "imbalanced fixture: {pos}/{neg}");
        let labels: Vec<bool> = data.instances.iter().map(|i| i.label).collect();
        let recall = |weight: f64| {
            let m = train_linear_svm(
                &data,
                &SvmParams {
                    positive_class_weight: weight,
                    ..Default::default()
                },
            )
            .unwrap();
            let preds: Vec<bool> = data
                .instances
                .iter()
                .map(|i| m.is_receptive(&i.x))
                .collect();
            prf(&preds, &labels).unwrap().recall
        };
        let (r1, r4) = (recall(1.0), recall(4.0));
        assert!(r4 >= r1, "recall w=4 {r4} < w=1 {r1}");
    }

    #[test]
    fn zero_iterations_predicts_nothing_receptive() {
        let data = one_d(&[(0.0, false), (1.0, true)], 2);
        let m = train_linear_svm(
            &data,
            &SvmParams {
                iterations: 0,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(m.weights, [0.0; FEATURE_LEN]);
        assert!(!m.is_receptive(&FeatureVector([1.0; FEATURE_LEN])));
    }

    #[test]
    fn single_class_rejected() {
        let data = TrainingSet::ungrouped(vec![LabeledInstance::new(FeatureVector::ZERO, false)]);
        assert!(matches!(
            train_linear_svm(&data, &SvmParams::default()),
            Err(ModelError::DegenerateTrainingSet { .. })
        ));
    }
}
