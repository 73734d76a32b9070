use super::ModelError;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let ratio = |num: usize, den: usize| {
            if den == 0 {
                0.0
            } else {
                num as f64 / den as f64
            }
        };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Self {
            precision,
            recall,
            f1,
        }
    }
}

/// Precision, recall and F1 of `predictions` against `labels`.
pub fn prf(predictions: &[bool], labels: &[bool]) -> Result<Prf, ModelError> {
    if predictions.len() != labels.len() || labels.is_empty() {
        return Err(ModelError::LengthMismatch {
            predictions: predictions.len(),
            labels: labels.len(),
        });
    }
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for (&p, &l) in predictions.iter().zip(labels) {
        match (p, l) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    Ok(Prf::from_counts(tp, fp, fn_))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub test_groups: Vec<u32>,
    pub train_groups: Vec<u32>,
    pub n_train: usize,
    pub n_test: usize,
    /// Fraction of receptive labels in the held-out fold.
    pub test_prevalence: f64,
    pub scores: Prf,
}

/// Mean precision/recall/F1 over folds, with the per-fold breakdown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub folds: Vec<FoldReport>,
}

impl ClassifierReport {
    pub fn from_folds(folds: Vec<FoldReport>) -> Self {
        let k = folds.len().max(1) as f64;
        let mean = |f: fn(&Prf) -> f64| folds.iter().map(|r| f(&r.scores)).sum::<f64>() / k;
        Self {
            precision: mean(|s| s.precision),
            recall: mean(|s| s.recall),
            f1: mean(|s| s.f1),
            folds,
        }
    }
}
