//! The three-arm micro-randomized field study.
//!
//! Per participant and trigger: pending labels whose availability time has
//! passed are handed to the adaptive model, a model is drawn uniformly
//! (control/static during warm-up, all three after), the delivery state
//! machine runs against the participant's context stream, and the response
//! is drawn from the ground truth at the delivery instant.

use super::context::{day_start_ts, ContextStream};
use super::dataset::{generate_dataset, DatasetParams};
use super::population::{generate_population, ParticipantProfile, PopulationParams};
use super::response::simulate_response;
use crate::dataset::{to_training_set, DatasetRow};
use crate::delivery::{run_delivery, DeliveryModel, DeliveryPolicy, Trigger};
use crate::events::{messages, Event, LabelEvent, OutcomeEvent, TriggerEvent};
use crate::labeling::{context_labels, ContextLabel};
use crate::metrics::MessageRecord;
use crate::models::{
    train_linear_svm, AdaptiveModel, LinearModel, LogisticParams, LogisticTrainer, ModelError,
    SvmParams, TrainingSet,
};
use crate::rng::{self, tag};
use crate::scheduler::{exact_half_cohort, plan_day_with};
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("no {0} model supplied")]
    MissingModel(&'static str),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("participant {participant}: {message}")]
    Invariant { participant: u32, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub n_participants: u32,
    pub study_days: u32,
    pub warm_up_days: u32,
    pub seed: u64,
    pub replicates: u32,
    /// Scale of between-participant variation; 0 makes everyone identical.
    pub heterogeneity: f64,
    /// Ground-truth logit drift per study day, applied to every message.
    pub habituation: f64,
    pub context_strength: f64,
    pub base_bias: f64,
    pub late_response_prob: f64,
    pub engagement_prob: f64,
    /// Adds an unlocked-and-still interaction the linear models cannot fit.
    pub misspecified_truth: bool,
    /// Daily probability that a participant leaves the study for good.
    pub dropout_hazard: f64,
    /// Give the optional prompt to exactly half the cohort each day instead
    /// of a per-participant coin.
    pub exact_half_self_monitoring: bool,
    /// Fixed L2 strength of the per-participant logistic model.
    pub personal_l2: f64,
    /// Total prior penalty of the per-participant model, spread over its
    /// labels (see [`AdaptiveModel::with_prior_strength`]).
    pub personal_prior_strength: f64,
    pub prior_participants: u32,
    pub prior_instances: u32,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n_participants: 83,
            study_days: 21,
            warm_up_days: 7,
            seed: 1,
            replicates: 1,
            heterogeneity: 1.0,
            habituation: -0.05,
            context_strength: 1.0,
            base_bias: -1.0,
            late_response_prob: 0.05,
            engagement_prob: 0.4,
            misspecified_truth: false,
            dropout_hazard: 0.0,
            exact_half_self_monitoring: false,
            personal_l2: 0.0,
            personal_prior_strength: 1.0,
            prior_participants: 141,
            prior_instances: 40,
        }
    }
}

fn check(ok: bool, what: &str) -> Result<(), SimError> {
    if ok {
        Ok(())
    } else {
        Err(SimError::InvalidConfig(what.to_string()))
    }
}

impl ExperimentConfig {
    /// Strongly individual participants: the setting where personalization
    /// has room to pay off.
    pub fn heterogeneous() -> Self {
        Self {
            heterogeneity: 1.25,
            ..Self::default()
        }
    }

    /// Identical participants and no habituation; every daily series should
    /// be flat after warm-up.
    pub fn null() -> Self {
        Self {
            heterogeneity: 0.0,
            habituation: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let unit = |p: f64| (0.0..=1.0).contains(&p);
        check(self.n_participants > 0, "n_participants must be positive")?;
        check(self.study_days > 0, "study_days must be positive")?;
        check(
            self.warm_up_days <= self.study_days,
            "warm_up_days exceeds study_days",
        )?;
        check(self.replicates > 0, "replicates must be positive")?;
        check(
            self.heterogeneity.is_finite() && self.heterogeneity >= 0.0,
            "heterogeneity must be finite and >= 0",
        )?;
        check(
            self.habituation.is_finite() && self.habituation <= 0.0,
            "habituation must be finite and <= 0",
        )?;
        check(
            self.context_strength.is_finite(),
            "context_strength must be finite",
        )?;
        check(self.base_bias.is_finite(), "base_bias must be finite")?;
        check(
            unit(self.late_response_prob),
            "late_response_prob must be in [0, 1]",
        )?;
        check(
            unit(self.engagement_prob),
            "engagement_prob must be in [0, 1]",
        )?;
        check(
            (0.0..1.0).contains(&self.dropout_hazard),
            "dropout_hazard must be in [0, 1)",
        )?;
        check(
            self.personal_l2.is_finite() && self.personal_l2 >= 0.0,
            "personal_l2 must be finite and >= 0",
        )?;
        check(
            self.personal_prior_strength.is_finite() && self.personal_prior_strength >= 0.0,
            "personal_prior_strength must be finite and >= 0",
        )?;
        check(
            self.prior_participants >= 2,
            "prior_participants must be >= 2",
        )?;
        check(self.prior_instances > 0, "prior_instances must be positive")
    }

    pub fn population_params(&self) -> PopulationParams {
        PopulationParams {
            n_participants: self.n_participants,
            context_strength: self.context_strength,
            base_bias: self.base_bias,
            heterogeneity: self.heterogeneity,
            habituation: self.habituation,
            late_response_prob: self.late_response_prob,
            engagement_prob: self.engagement_prob,
            misspecified_truth: self.misspecified_truth,
        }
    }

    pub fn policy(&self) -> DeliveryPolicy {
        DeliveryPolicy {
            warm_up_days: self.warm_up_days,
            ..DeliveryPolicy::default()
        }
    }

    pub fn personal_params(&self) -> LogisticParams {
        LogisticParams {
            l2: self.personal_l2,
            ..LogisticParams::default()
        }
    }

    pub fn replicate_seed(&self, replicate: u32) -> u64 {
        rng::derive_seed(self.seed, &[tag::REPLICATE, replicate as u64])
    }
}

/// Labeled contexts from an earlier study with a separate cohort drawn from
/// the same population, used to pre-train the static and population
/// models.
pub fn prior_study_dataset(config: &ExperimentConfig) -> Vec<DatasetRow> {
    generate_dataset(&DatasetParams {
        population: PopulationParams {
            n_participants: config.prior_participants,
            ..config.population_params()
        },
        instances_per_participant: config.prior_instances,
        study_days: config.study_days,
        label_noise: 0.0,
        target_prevalence: None,
        seed: rng::derive_seed(config.seed, &[tag::PRIOR]),
    })
}

/// Models trained before the study starts.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PretrainedModels {
    pub static_model: Option<LinearModel>,
    pub p1: Option<LinearModel>,
}

impl PretrainedModels {
    /// Static: class-weighted linear SVM. Population: logistic regression on
    /// an IHT-balanced subset.
    pub fn train(data: &TrainingSet, seed: u64) -> Result<Self, ModelError> {
        let static_model = train_linear_svm(data, &SvmParams::default())?;
        let p1 = LogisticTrainer {
            params: LogisticParams::default(),
            iht_folds: Some(5),
        }
        .fit_model(data, seed)?;
        Ok(Self {
            static_model: Some(static_model),
            p1: Some(p1),
        })
    }

    pub fn from_prior_study(config: &ExperimentConfig) -> Result<Self, ModelError> {
        let rows = prior_study_dataset(config);
        Self::train(
            &to_training_set(&rows),
            rng::derive_seed(config.seed, &[tag::PRIOR, 1]),
        )
    }
}

/// Event log of one replicate, participant-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateLog {
    pub replicate: u32,
    pub seed: u64,
    pub events: Vec<Event>,
}

impl ReplicateLog {
    pub fn messages(&self) -> Vec<MessageRecord> {
        messages(&self.events, self.replicate).expect("simulated logs pair every delivery")
    }
}

struct Models<'a> {
    static_model: &'a LinearModel,
    p1: &'a LinearModel,
}

fn run_participant(
    config: &ExperimentConfig,
    profile: &ParticipantProfile,
    models: &Models<'_>,
    seed: u64,
    cohorts: &[Vec<bool>],
) -> Result<Vec<Event>, SimError> {
    let id = profile.id;
    let policy = config.policy();
    let mut stream = ContextStream::new(profile, seed);
    let mut select_rng = rng::stream(seed, &[tag::SELECT, id as u64]);
    let mut response_rng = rng::stream(seed, &[tag::RESPONSE, id as u64]);
    let mut dropout_rng = rng::stream(seed, &[tag::DROPOUT, id as u64]);
    let mut static_model = *models.static_model;
    let mut adaptive = AdaptiveModel::new(*models.p1, config.personal_params())
        .with_prior_strength(config.personal_prior_strength);
    let mut pending: Vec<ContextLabel> = Vec::new();
    let mut events = Vec::new();
    let invariant = |message: String| SimError::Invariant {
        participant: id,
        message,
    };

    for day in 1..=config.study_days {
        if day > 1 && dropout_rng.random::<f64>() < config.dropout_hazard {
            break;
        }
        stream.forget_before(day);
        let mut plan_rng = rng::stream(seed, &[tag::PLAN, id as u64, day as u64]);
        let forced = config
            .exact_half_self_monitoring
            .then(|| cohorts[day as usize - 1][id as usize]);
        let plan = plan_day_with(&mut plan_rng, forced);

        for planned in &plan.triggers {
            let ts = day_start_ts(day) + planned.minute as i64 * 60;
            let (ready, later): (Vec<ContextLabel>, Vec<ContextLabel>) =
                pending.drain(..).partition(|l| l.ts <= ts);
            pending = later;
            let ready: Vec<_> = ready.iter().map(ContextLabel::instance).collect();
            adaptive.ingest(&ready);

            events.push(Event::Trigger(TriggerEvent {
                participant: id,
                day,
                ts,
                kind: planned.kind,
            }));
            let model = match policy.select_model(day, &mut select_rng) {
                crate::delivery::ModelId::Control => DeliveryModel::Control,
                crate::delivery::ModelId::Static => DeliveryModel::Static(&mut static_model),
                crate::delivery::ModelId::Adaptive => DeliveryModel::Adaptive(&mut adaptive),
            };
            let trigger = Trigger {
                participant: id,
                day,
                ts,
            };
            let record = run_delivery(trigger, model, &mut |t| stream.at(t), &policy);
            record.check(&policy).map_err(invariant)?;
            let outcome = simulate_response(
                profile,
                &record.context,
                record.delivery_ts,
                day,
                &mut response_rng,
                &mut |t| stream.at(t),
            );
            let labels = context_labels(&record, &outcome, policy.jit_window_s)
                .map_err(|e| invariant(e.to_string()))?;
            events.push(Event::Delivery(record));
            events.push(Event::Outcome(OutcomeEvent::new(id, day, &outcome)));
            for l in &labels {
                events.push(Event::Label(LabelEvent {
                    participant: id,
                    ts: l.ts,
                    label: l.label,
                    context: l.context,
                }));
            }
            pending.extend(labels);
        }
    }
    Ok(events)
}

fn resolve(models: &PretrainedModels) -> Result<Models<'_>, SimError> {
    Ok(Models {
        static_model: models
            .static_model
            .as_ref()
            .ok_or(SimError::MissingModel("static"))?,
        p1: models
            .p1
            .as_ref()
            .ok_or(SimError::MissingModel("population"))?,
    })
}

/// Runs one replicate. Participants run in parallel on the current rayon
/// pool; the log is identical for any pool size.
pub fn run_replicate(
    config: &ExperimentConfig,
    models: &PretrainedModels,
    replicate: u32,
) -> Result<ReplicateLog, SimError> {
    config.validate()?;
    let models = resolve(models)?;
    let seed = config.replicate_seed(replicate);
    let profiles = generate_population(&config.population_params(), seed);
    let cohorts: Vec<Vec<bool>> = if config.exact_half_self_monitoring {
        (1..=config.study_days)
            .map(|d| exact_half_cohort(config.n_participants, d, seed))
            .collect()
    } else {
        Vec::new()
    };
    let per_participant: Vec<Vec<Event>> = profiles
        .par_iter()
        .map(|p| run_participant(config, p, &models, seed, &cohorts))
        .collect::<Result<_, _>>()?;
    Ok(ReplicateLog {
        replicate,
        seed,
        events: per_participant.into_iter().flatten().collect(),
    })
}

pub fn run_experiment(
    config: &ExperimentConfig,
    models: &PretrainedModels,
) -> Result<Vec<ReplicateLog>, SimError> {
    config.validate()?;
    resolve(models)?;
    (0..config.replicates)
        .into_par_iter()
        .map(|r| run_replicate(config, models, r))
        .collect()
}
