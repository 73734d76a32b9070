use super::cv::{Classifier, Trainer};
use super::{ModelError, TrainingSet};
use crate::features::FeatureVector;
use crate::rng;
use rand::Rng;

/// Predicts receptive with a fixed probability, independently per instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasedRandom {
    pub prevalence: f64,
    pub seed: u64,
}

impl BiasedRandom {
    pub fn new(prevalence: f64, seed: u64) -> Self {
        Self {
            prevalence: prevalence.clamp(0.0, 1.0),
            seed,
        }
    }

    pub fn sample(&self, n: usize) -> Vec<bool> {
        let mut r = rng::stream(self.seed, &[]);
        (0..n)
            .map(|_| r.random::<f64>() < self.prevalence)
            .collect()
    }
}

impl Classifier for BiasedRandom {
    fn predict(&self, xs: &[FeatureVector]) -> Vec<bool> {
        self.sample(xs.len())
    }
}

/// Fits a [`BiasedRandom`] whose bias is the training fold's prevalence.
#[derive(Debug, Clone, Copy, Default)]
pub struct BiasedRandomTrainer;

impl Trainer for BiasedRandomTrainer {
    fn fit(&self, train: &TrainingSet, seed: u64) -> Result<Box<dyn Classifier>, ModelError> {
        Ok(Box::new(BiasedRandom::new(train.positive_rate(), seed)))
    }
}
