//! Linear classifiers and the machinery around them.
//!
//! Everything here trains deterministically from zero initialization, so a
//! given dataset and seed always yields bit-identical models.

mod adaptive;
mod baseline;
mod cv;
mod iht;
mod linear;
mod logistic;
mod report;
mod svm;

pub use adaptive::{AdaptiveModel, AdaptivePrediction, DECISION_THRESHOLD};
pub use baseline::{BiasedRandom, BiasedRandomTrainer};
pub use cv::{
    logo_cv, logo_cv_adaptive, partition_groups, Classifier, FnTrainer, LogisticTrainer,
    SvmTrainer, Trainer,
};
pub use iht::{iht_select, iht_undersample, instance_hardness};
pub use linear::{sigmoid, LinearModel, ModelKind, MODEL_RECORD_VERSION};
pub use logistic::{log_loss, log_loss_gradient, train_logistic, LogisticParams};
pub use report::{prf, ClassifierReport, FoldReport, Prf};
pub use svm::{train_linear_svm, SvmParams};

use crate::features::FeatureVector;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("degenerate training set: {positives} positive / {negatives} negative instances")]
    DegenerateTrainingSet { positives: usize, negatives: usize },
    #[error("expected {expected} weights, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("model parameters must be finite")]
    NonFinite,
    #[error("need at least {needed} distinct groups, found {found}")]
    TooFewGroups { needed: usize, found: usize },
    #[error("{folds} folds requested but the smaller class has only {minority} instances")]
    TooManyFolds { folds: usize, minority: usize },
    #[error("could not draw a fold assignment with both classes in every fold")]
    DegenerateFolds,
    #[error("predictions ({predictions}) and labels ({labels}) differ in length or are empty")]
    LengthMismatch { predictions: usize, labels: usize },
    #[error("malformed model record: {0}")]
    Record(String),
}

/// An encoded context with its receptivity label (`true` = receptive).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabeledInstance {
    pub x: FeatureVector,
    pub label: bool,
}

impl LabeledInstance {
    pub fn new(x: FeatureVector, label: bool) -> Self {
        Self { x, label }
    }
}

/// Instances with a participant (group) id each.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingSet {
    pub instances: Vec<LabeledInstance>,
    pub groups: Vec<u32>,
}

impl TrainingSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_parts(instances: Vec<LabeledInstance>, groups: Vec<u32>) -> Self {
        assert_eq!(instances.len(), groups.len(), "one group id per instance");
        Self { instances, groups }
    }

    /// All instances in a single group `0`.
    pub fn ungrouped(instances: Vec<LabeledInstance>) -> Self {
        let groups = vec![0; instances.len()];
        Self { instances, groups }
    }

    pub fn push(&mut self, instance: LabeledInstance, group: u32) {
        self.instances.push(instance);
        self.groups.push(group);
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    /// `(positives, negatives)`
    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.instances.iter().filter(|i| i.label).count();
        (pos, self.instances.len() - pos)
    }

    pub fn has_both_classes(&self) -> bool {
        let (p, n) = self.class_counts();
        p > 0 && n > 0
    }

    pub fn positive_rate(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        self.class_counts().0 as f64 / self.len() as f64
    }

    pub fn subset(&self, indices: &[usize]) -> TrainingSet {
        TrainingSet {
            instances: indices.iter().map(|&i| self.instances[i]).collect(),
            groups: indices.iter().map(|&i| self.groups[i]).collect(),
        }
    }

    /// Sorted distinct group ids.
    pub fn distinct_groups(&self) -> Vec<u32> {
        let mut g = self.groups.clone();
        g.sort_unstable();
        g.dedup();
        g
    }

    pub(crate) fn require_both_classes(&self) -> Result<(), ModelError> {
        let (positives, negatives) = self.class_counts();
        if positives == 0 || negatives == 0 {
            Err(ModelError::DegenerateTrainingSet {
                positives,
                negatives,
            })
        } else {
            Ok(())
        }
    }
}

#[cfg(test)]
pub(crate) mod testutil {
    use super::*;
    use crate::features::FEATURE_LEN;
    use rand::Rng;

    /// Linear-truth data over random `[0,1]^16` inputs.
    pub fn linear_truth(n: usize, seed: u64, w: &[f64; FEATURE_LEN], b: f64) -> TrainingSet {
        let mut rng = crate::rng::stream(seed, &[99]);
        let mut set = TrainingSet::new();
        for i in 0..n {
            let mut x = [0.0; FEATURE_LEN];
            for c in x.iter_mut() {
                *c = rng.random::<f64>();
            }
            let z: f64 = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() + b;
            let label = rng.random::<f64>() < sigmoid(z);
            set.push(
                LabeledInstance::new(FeatureVector(x), label),
                (i % 10) as u32,
            );
        }
        set
    }

    pub fn one_d(points: &[(f64, bool)], copies: usize) -> TrainingSet {
        let mut set = TrainingSet::new();
        for _ in 0..copies {
            for &(v, label) in points {
                let mut x = [0.0; FEATURE_LEN];
                x[0] = v;
                set.push(LabeledInstance::new(FeatureVector(x), label), 0);
            }
        }
        set
    }
}
