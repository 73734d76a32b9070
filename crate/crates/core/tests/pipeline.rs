use proptest::prelude::*;
use receptive_jitai::dataset::{read_csv, to_training_set, write_csv};
use receptive_jitai::eval::{compare_rates, daily_series, ResampleUnit};
use receptive_jitai::events::{messages, parse_jsonl, to_jsonl, Event};
use receptive_jitai::sim::{generate_dataset, prior_study_dataset, run_replicate};
use receptive_jitai::{DeliveryPolicy, ExperimentConfig, Metric, ModelId, PretrainedModels};

fn small(seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        n_participants: 6,
        prior_participants: 20,
        seed,
        ..ExperimentConfig::default()
    }
}

#[test]
fn simulated_log_survives_serialization_and_evaluation() {
    let config = small(3);
    let models = PretrainedModels::from_prior_study(&config).unwrap();
    let log = run_replicate(&config, &models, 0).unwrap();
    let parsed = parse_jsonl(&to_jsonl(&log.events)).unwrap();
    assert_eq!(parsed, log.events);
    let records = messages(&parsed, 0).unwrap();
    assert_eq!(records, log.messages());

    let rows = compare_rates(
        &records,
        Metric::JitResponse,
        ResampleUnit::Participants,
        200,
        1,
    )
    .unwrap();
    assert_eq!(rows.len(), 2);
    for r in &rows {
        let (lo, d, hi) = (
            r.ci_low.unwrap(),
            r.mean_difference.unwrap(),
            r.ci_high.unwrap(),
        );
        assert!(lo <= d && d <= hi);
    }
    let series = daily_series(&records, Metric::Response);
    let total: u64 = series.values().flatten().map(|p| p.n).sum();
    assert_eq!(total as usize, records.len());
    assert!(series[&ModelId::Adaptive]
        .iter()
        .all(|p| p.day > config.warm_up_days));
}

#[test]
fn dataset_csv_round_trip_trains_identical_models() {
    let rows = prior_study_dataset(&small(5));
    let mut buf = Vec::new();
    write_csv(&mut buf, &rows).unwrap();
    let back = read_csv(buf.as_slice()).unwrap();
    assert_eq!(back, rows);
    let a = PretrainedModels::train(&to_training_set(&rows), 1).unwrap();
    let b = PretrainedModels::train(&to_training_set(&back), 1).unwrap();
    assert_eq!(a, b);
}

#[test]
fn generated_dataset_is_reproducible() {
    let params = receptive_jitai::sim::DatasetParams {
        population: small(1).population_params(),
        instances_per_participant: 10,
        study_days: 21,
        label_noise: 0.1,
        target_prevalence: Some(0.4),
        seed: 9,
    };
    assert_eq!(generate_dataset(&params), generate_dataset(&params));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn every_simulated_delivery_obeys_the_policy(seed in 0u64..1_000) {
        let config = small(seed);
        let models = PretrainedModels::from_prior_study(&config).unwrap();
        let log = run_replicate(&config, &models, 0).unwrap();
        let policy = DeliveryPolicy { warm_up_days: config.warm_up_days, ..DeliveryPolicy::default() };
        let mut last_delivery = std::collections::BTreeMap::new();
        let mut labels = 0;
        for e in &log.events {
            match e {
                Event::Delivery(d) => {
                    prop_assert!(d.check(&policy).is_ok(), "{:?}", d);
                    last_delivery.insert(d.participant, d.delivery_ts);
                }
                Event::Label(l) => {
                    // A label is never known before its message was delivered.
                    prop_assert!(l.ts >= last_delivery[&l.participant]);
                    labels += 1;
                }
                Event::Trigger(t) => prop_assert!(t.day >= 1 && t.day <= config.study_days),
                Event::Outcome(o) => prop_assert!(o.record().validate().is_ok()),
            }
        }
        prop_assert!(labels > 0);
    }
}
