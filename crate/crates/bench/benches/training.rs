use criterion::{criterion_group, criterion_main, Criterion};
use receptive_jitai::dataset::to_training_set;
use receptive_jitai::models::{
    iht_undersample, logo_cv, train_linear_svm, train_logistic, LogisticParams, SvmParams,
    SvmTrainer,
};
use receptive_jitai::sim::{generate_dataset, DatasetParams};
use receptive_jitai::{ExperimentConfig, TrainingSet};
use std::hint::black_box;

fn dataset() -> TrainingSet {
    let rows = generate_dataset(&DatasetParams {
        population: receptive_jitai::sim::PopulationParams {
            n_participants: 100,
            heterogeneity: 0.0,
            ..ExperimentConfig::default().population_params()
        },
        instances_per_participant: 40,
        study_days: 21,
        label_noise: 0.15,
        target_prevalence: Some(0.3),
        seed: 1,
    });
    to_training_set(&rows)
}

fn training(c: &mut Criterion) {
    let data = dataset();
    c.bench_function("svm_4000", |b| {
        b.iter(|| train_linear_svm(black_box(&data), &SvmParams::default()).unwrap())
    });
    c.bench_function("logistic_4000", |b| {
        b.iter(|| train_logistic(black_box(&data), &LogisticParams::default()).unwrap())
    });
    c.bench_function("iht_4000", |b| {
        b.iter(|| iht_undersample(black_box(&data), 5, 1).unwrap())
    });
    let mut group = c.benchmark_group("cv");
    group.sample_size(10);
    group.bench_function("svm_logo_5", |b| {
        b.iter(|| logo_cv(black_box(&data), 5, &SvmTrainer::default(), 1).unwrap())
    });
    group.finish();
}

criterion_group!(benches, training);
criterion_main!(benches);
