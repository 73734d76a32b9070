//! Dual-model adaptive predictor: a frozen population model averaged with a
//! personal model retrained lazily on the participant's own labels.

use super::{train_logistic, LabeledInstance, LinearModel, LogisticParams, TrainingSet};
use crate::features::FeatureVector;
use serde::{Deserialize, Serialize};

/// Receptive iff the blended probability is strictly above this.
pub const DECISION_THRESHOLD: f64 = 0.5;

const POPULATION_WEIGHT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptivePrediction {
    pub receptive: bool,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveModel {
    p1: LinearModel,
    personal: TrainingSet,
    p2: Option<LinearModel>,
    dirty: bool,
    params: LogisticParams,
    #[serde(default)]
    prior_strength: f64,
}

impl AdaptiveModel {
    pub fn new(p1: LinearModel, params: LogisticParams) -> Self {
        Self {
            p1,
            personal: TrainingSet::new(),
            p2: None,
            dirty: false,
            params,
            prior_strength: 0.0,
        }
    }

    /// Adds `strength / n` to the personal L2 penalty, where `n` is the
    /// number of personal labels. The total penalty then stays fixed while
    /// the data term grows, so the personal model starts near zero and
    /// sharpens as labels accumulate.
    pub fn with_prior_strength(mut self, strength: f64) -> Self {
        self.prior_strength = strength.max(0.0);
        self
    }

    /// Training parameters for the current personal data.
    pub fn personal_params(&self) -> LogisticParams {
        let mut params = self.params;
        if self.prior_strength > 0.0 && !self.personal.is_empty() {
            params.l2 += self.prior_strength / self.personal.len() as f64;
        }
        params
    }

    pub fn population(&self) -> &LinearModel {
        &self.p1
    }

    pub fn personal(&self) -> Option<&LinearModel> {
        self.p2.as_ref()
    }

    pub fn personal_data(&self) -> &TrainingSet {
        &self.personal
    }

    pub fn is_dirty(&self) -> bool {
        self.dirty
    }

    /// Appends labels; the personal model is retrained on the next predict.
    pub fn ingest(&mut self, instances: &[LabeledInstance]) {
        if instances.is_empty() {
            return;
        }
        for inst in instances {
            self.personal.push(*inst, 0);
        }
        self.dirty = true;
    }

    /// Retrains the personal model if new data arrived and both classes are
    /// present. A no-op otherwise.
    pub fn refresh(&mut self) {
        if !self.dirty {
            return;
        }
        self.dirty = false;
        if self.personal.has_both_classes() {
            // Both classes present, so training cannot hit the degenerate case.
            self.p2 = train_logistic(&self.personal, &self.personal_params()).ok();
        }
    }

    /// Blended probability without retraining.
    pub fn probability(&self, x: &FeatureVector) -> f64 {
        let p1 = self.p1.predict_proba(x);
        match &self.p2 {
            Some(p2) => POPULATION_WEIGHT * p1 + (1.0 - POPULATION_WEIGHT) * p2.predict_proba(x),
            None => p1,
        }
    }

    pub fn predict(&mut self, x: &FeatureVector) -> AdaptivePrediction {
        self.refresh();
        let probability = self.probability(x);
        AdaptivePrediction {
            receptive: probability > DECISION_THRESHOLD,
            probability,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FEATURE_LEN;
    use crate::models::{ModelKind, TrainingSet};

    fn with_bias(b: f64) -> LinearModel {
        let mut m = LinearModel::zero(ModelKind::Lr);
        m.bias = b;
        m
    }

    fn logit(p: f64) -> f64 {
        (p / (1.0 - p)).ln()
    }

    #[test]
    fn disagreement_example_triggers() {
        let mut m = AdaptiveModel::new(with_bias(logit(0.20)), LogisticParams::default());
        m.p2 = Some(with_bias(logit(0.90)));
        let out = m.predict(&FeatureVector::ZERO);
        assert!((out.probability - 0.55).abs() < 1e-12);
        assert!(out.receptive);
    }

    #[test]
    fn exact_half_is_not_receptive() {
        let mut m = AdaptiveModel::new(with_bias(0.0), LogisticParams::default());
        let out = m.predict(&FeatureVector::ZERO);
        assert_eq!(out.probability, 0.5);
        assert!(!out.receptive);
    }

    #[test]
    fn cold_start_uses_population_only() {
        let p1 = with_bias(logit(0.7));
        let mut m = AdaptiveModel::new(p1, LogisticParams::default());
        let out = m.predict(&FeatureVector::ZERO);
        assert_eq!(out.probability, p1.predict_proba(&FeatureVector::ZERO));
        assert!(out.receptive);
    }

    #[test]
    fn single_class_keeps_p1_only() {
        let p1 = with_bias(-0.3);
        let mut m = AdaptiveModel::new(p1, LogisticParams::default());
        m.ingest(&[LabeledInstance::new(FeatureVector::ZERO, true)]);
        assert_eq!(m.personal_data().len(), 1);
        assert!(m.is_dirty());
        let out = m.predict(&FeatureVector::ZERO);
        assert!(m.personal().is_none());
        assert_eq!(out.probability, p1.predict_proba(&FeatureVector::ZERO));
    }

    #[test]
    fn empty_ingest_is_identity() {
        let mut m = AdaptiveModel::new(with_bias(0.1), LogisticParams::default());
        let before = m.clone();
        m.ingest(&[]);
        assert_eq!(m, before);
    }

    #[test]
    fn lazy_retrain_matches_direct_training() {
        let mut data = Vec::new();
        for k in 0..10 {
            let mut x = [0.0; FEATURE_LEN];
            x[k % FEATURE_LEN] = 1.0;
            x[15] = k as f64 / 10.0;
            data.push(LabeledInstance::new(FeatureVector(x), k % 2 == 0));
        }
        let mut m = AdaptiveModel::new(with_bias(0.2), LogisticParams::default());
        m.ingest(&data);
        assert!(m.personal().is_none(), "retrain is deferred to predict");
        let x = FeatureVector([0.5; FEATURE_LEN]);
        let out = m.predict(&x);
        let direct = train_logistic(
            &TrainingSet::ungrouped(data.clone()),
            &LogisticParams::default(),
        )
        .unwrap();
        assert_eq!(m.personal().unwrap().to_record(), direct.to_record());
        let expected = 0.5 * with_bias(0.2).predict_proba(&x) + 0.5 * direct.predict_proba(&x);
        assert_eq!(out.probability, expected);
        assert!(!m.is_dirty());
    }

    #[test]
    fn prior_strength_fades_with_data() {
        let base = LogisticParams {
            l2: 0.0,
            ..LogisticParams::default()
        };
        let mut m = AdaptiveModel::new(with_bias(0.0), base).with_prior_strength(2.0);
        assert_eq!(m.personal_params().l2, 0.0);
        m.ingest(&[LabeledInstance::new(FeatureVector::ZERO, true); 4]);
        assert_eq!(m.personal_params().l2, 0.5);
        m.ingest(&[LabeledInstance::new(FeatureVector::ZERO, false); 4]);
        assert_eq!(m.personal_params().l2, 0.25);
    }

    #[test]
    fn stronger_prior_shrinks_personal_weights() {
        let data: Vec<_> = (0..20)
            .map(|k| {
                let mut x = [0.0; FEATURE_LEN];
                x[8] = (k % 2) as f64;
                LabeledInstance::new(FeatureVector(x), k % 2 == 1 || k % 5 == 0)
            })
            .collect();
        let norm = |strength: f64| {
            let mut m = AdaptiveModel::new(with_bias(0.0), LogisticParams::default())
                .with_prior_strength(strength);
            m.ingest(&data);
            m.refresh();
            let p2 = m.personal().unwrap();
            p2.weights.iter().map(|w| w * w).sum::<f64>()
        };
        assert!(norm(5.0) < norm(0.0));
    }
}
