//! Instance-hardness-threshold undersampling.
//!
//! Hardness of an instance is `1 - p(true label)` under k-fold
//! cross-validated logistic regression. Majority-class instances are
//! dropped hardest first until both classes have the same count.

use super::{train_logistic, LogisticParams, ModelError, TrainingSet};
use crate::rng;
use rand::seq::SliceRandom;

/// Stratified fold id per instance: each class is shuffled and dealt
/// round-robin, so every fold holds both classes whenever the smaller
/// class has at least `folds` members.
fn stratified_folds(data: &TrainingSet, folds: usize, seed: u64) -> Vec<usize> {
    let mut r = rng::stream(seed, &[]);
    let mut assignment = vec![0; data.len()];
    for class in [true, false] {
        let mut idx: Vec<usize> = (0..data.len())
            .filter(|&i| data.instances[i].label == class)
            .collect();
        idx.shuffle(&mut r);
        for (k, i) in idx.into_iter().enumerate() {
            assignment[i] = k % folds;
        }
    }
    assignment
}

fn check_preconditions(data: &TrainingSet, folds: usize) -> Result<(), ModelError> {
    data.require_both_classes()?;
    let (p, n) = data.class_counts();
    let minority = p.min(n);
    if folds < 2 || folds > minority {
        return Err(ModelError::TooManyFolds { folds, minority });
    }
    Ok(())
}

/// Cross-validated hardness of every instance, in input order.
pub fn instance_hardness(
    data: &TrainingSet,
    folds: usize,
    seed: u64,
    params: &LogisticParams,
) -> Result<Vec<f64>, ModelError> {
    check_preconditions(data, folds)?;
    let assignment = stratified_folds(data, folds, seed);
    let mut hardness = vec![0.0; data.len()];
    for fold in 0..folds {
        let train_idx: Vec<usize> = (0..data.len()).filter(|&i| assignment[i] != fold).collect();
        let train = data.subset(&train_idx);
        if !train.has_both_classes() {
            return Err(ModelError::DegenerateFolds);
        }
        let model = train_logistic(&train, params)?;
        for i in (0..data.len()).filter(|&i| assignment[i] == fold) {
            let inst = &data.instances[i];
            let p = model.predict_proba(&inst.x);
            hardness[i] = 1.0 - if inst.label { p } else { 1.0 - p };
        }
    }
    Ok(hardness)
}

/// Indices (ascending) of the instances kept by undersampling.
pub fn iht_select(data: &TrainingSet, folds: usize, seed: u64) -> Result<Vec<usize>, ModelError> {
    check_preconditions(data, folds)?;
    let (pos, neg) = data.class_counts();
    if pos == neg {
        return Ok((0..data.len()).collect());
    }
    let majority = pos > neg;
    let excess = pos.abs_diff(neg);
    let hardness = instance_hardness(data, folds, seed, &LogisticParams::default())?;

    let mut candidates: Vec<usize> = (0..data.len())
        .filter(|&i| data.instances[i].label == majority)
        .collect();
    // Hardest first; ties keep input order.
    candidates.sort_by(|&a, &b| hardness[b].total_cmp(&hardness[a]).then(a.cmp(&b)));
    let mut removed = vec![false; data.len()];
    for &i in &candidates[..excess] {
        removed[i] = true;
    }
    Ok((0..data.len()).filter(|&i| !removed[i]).collect())
}

pub fn iht_undersample(
    data: &TrainingSet,
    folds: usize,
    seed: u64,
) -> Result<TrainingSet, ModelError> {
    Ok(data.subset(&iht_select(data, folds, seed)?))
}
