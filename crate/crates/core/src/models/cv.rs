//! Leave-one-group-out cross-validation over participant groups.

use super::{
    iht_undersample, prf, train_linear_svm, train_logistic, AdaptiveModel, ClassifierReport,
    FoldReport, LinearModel, LogisticParams, ModelError, SvmParams, TrainingSet,
};
use crate::features::FeatureVector;
use crate::rng;
use rand::seq::SliceRandom;
use std::collections::BTreeSet;

pub trait Classifier {
    fn predict(&self, xs: &[FeatureVector]) -> Vec<bool>;
}

impl Classifier for LinearModel {
    fn predict(&self, xs: &[FeatureVector]) -> Vec<bool> {
        xs.iter().map(|x| self.is_receptive(x)).collect()
    }
}

/// A training procedure: fits a classifier on one fold's training data.
pub trait Trainer {
    fn fit(&self, train: &TrainingSet, seed: u64) -> Result<Box<dyn Classifier>, ModelError>;
}

/// Adapts a closure into a [`Trainer`].
pub struct FnTrainer<F>(pub F);

impl<F> Trainer for FnTrainer<F>
where
    F: Fn(&TrainingSet, u64) -> Result<Box<dyn Classifier>, ModelError>,
{
    fn fit(&self, train: &TrainingSet, seed: u64) -> Result<Box<dyn Classifier>, ModelError> {
        (self.0)(train, seed)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SvmTrainer {
    pub params: SvmParams,
}

impl Trainer for SvmTrainer {
    fn fit(&self, train: &TrainingSet, _seed: u64) -> Result<Box<dyn Classifier>, ModelError> {
        Ok(Box::new(train_linear_svm(train, &self.params)?))
    }
}

/// Logistic regression, optionally trained on an IHT-balanced subset.
#[derive(Debug, Clone, Copy, Default)]
pub struct LogisticTrainer {
    pub params: LogisticParams,
    pub iht_folds: Option<usize>,
}

impl LogisticTrainer {
    pub fn fit_model(&self, train: &TrainingSet, seed: u64) -> Result<LinearModel, ModelError> {
        match self.iht_folds {
            Some(folds) => train_logistic(&iht_undersample(train, folds, seed)?, &self.params),
            None => train_logistic(train, &self.params),
        }
    }
}

impl Trainer for LogisticTrainer {
    fn fit(&self, train: &TrainingSet, seed: u64) -> Result<Box<dyn Classifier>, ModelError> {
        Ok(Box::new(self.fit_model(train, seed)?))
    }
}

/// Splits the distinct group ids into `n_groups` near-equal parts after a
/// seeded shuffle. Part sizes differ by at most one.
pub fn partition_groups(
    data: &TrainingSet,
    n_groups: usize,
    seed: u64,
) -> Result<Vec<Vec<u32>>, ModelError> {
    let mut ids = data.distinct_groups();
    if n_groups < 2 || ids.len() < n_groups {
        return Err(ModelError::TooFewGroups {
            needed: n_groups.max(2),
            found: ids.len(),
        });
    }
    ids.shuffle(&mut rng::stream(seed, &[]));
    let mut parts = vec![Vec::new(); n_groups];
    for (k, id) in ids.into_iter().enumerate() {
        parts[k % n_groups].push(id);
    }
    for p in &mut parts {
        p.sort_unstable();
    }
    Ok(parts)
}

struct Fold {
    test_groups: Vec<u32>,
    train_groups: Vec<u32>,
    train_idx: Vec<usize>,
    test_idx: Vec<usize>,
}

fn folds(data: &TrainingSet, n_groups: usize, seed: u64) -> Result<Vec<Fold>, ModelError> {
    let parts = partition_groups(data, n_groups, seed)?;
    Ok(parts
        .iter()
        .map(|test| {
            let held: BTreeSet<u32> = test.iter().copied().collect();
            let (test_idx, train_idx): (Vec<usize>, Vec<usize>) =
                (0..data.len()).partition(|&i| held.contains(&data.groups[i]));
            let train_groups = data
                .distinct_groups()
                .into_iter()
                .filter(|g| !held.contains(g))
                .collect();
            Fold {
                test_groups: test.clone(),
                train_groups,
                train_idx,
                test_idx,
            }
        })
        .collect())
}

fn fold_report(fold: &Fold, data: &TrainingSet, preds: &[bool]) -> Result<FoldReport, ModelError> {
    let labels: Vec<bool> = fold
        .test_idx
        .iter()
        .map(|&i| data.instances[i].label)
        .collect();
    let positives = labels.iter().filter(|&&l| l).count();
    Ok(FoldReport {
        test_groups: fold.test_groups.clone(),
        train_groups: fold.train_groups.clone(),
        n_train: fold.train_idx.len(),
        n_test: fold.test_idx.len(),
        test_prevalence: positives as f64 / labels.len().max(1) as f64,
        scores: prf(preds, &labels)?,
    })
}

/// Grouped cross-validation: each fold holds out one part of the group
/// partition. The partition depends only on `seed`, so different trainers
/// run with the same seed see identical folds.
pub fn logo_cv(
    data: &TrainingSet,
    n_groups: usize,
    trainer: &dyn Trainer,
    seed: u64,
) -> Result<ClassifierReport, ModelError> {
    let mut reports = Vec::new();
    for (k, fold) in folds(data, n_groups, seed)?.iter().enumerate() {
        let train = data.subset(&fold.train_idx);
        let model = trainer.fit(&train, rng::derive_seed(seed, &[k as u64]))?;
        let xs: Vec<FeatureVector> = fold.test_idx.iter().map(|&i| data.instances[i].x).collect();
        reports.push(fold_report(fold, data, &model.predict(&xs))?);
    }
    Ok(ClassifierReport::from_folds(reports))
}

/// Prequential evaluation of the dual model on the same folds as
/// [`logo_cv`]: the population model is fit on the training groups, then
/// each held-out participant's instances are replayed in order, predicting
/// each one before it is added to that participant's personal data.
pub fn logo_cv_adaptive(
    data: &TrainingSet,
    n_groups: usize,
    population: &LogisticTrainer,
    personal: &LogisticParams,
    prior_strength: f64,
    seed: u64,
) -> Result<ClassifierReport, ModelError> {
    let mut reports = Vec::new();
    for (k, fold) in folds(data, n_groups, seed)?.iter().enumerate() {
        let train = data.subset(&fold.train_idx);
        let p1 = population.fit_model(&train, rng::derive_seed(seed, &[k as u64]))?;
        let mut preds = Vec::with_capacity(fold.test_idx.len());
        let mut models: std::collections::BTreeMap<u32, AdaptiveModel> = Default::default();
        for &i in &fold.test_idx {
            let g = data.groups[i];
            let m = models.entry(g).or_insert_with(|| {
                AdaptiveModel::new(p1, *personal).with_prior_strength(prior_strength)
            });
            let inst = data.instances[i];
            preds.push(m.predict(&inst.x).receptive);
            m.ingest(&[inst]);
        }
        reports.push(fold_report(fold, data, &preds)?);
    }
    Ok(ClassifierReport::from_folds(reports))
}
