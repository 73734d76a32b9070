//! Labeled context datasets drawn from a synthetic population.
//!
//! Contexts are sampled at trigger instants (the same distribution the
//! deployed models see); labels are Bernoulli draws from the ground truth,
//! optionally shifted to a target prevalence and flipped with a fixed noise
//! rate.

use super::context::{day_start_ts, ContextStream};
use super::population::{generate_population, PopulationParams};
use crate::dataset::DatasetRow;
use crate::features::ContextSnapshot;
use crate::models::sigmoid;
use crate::rng::{self, tag};
use crate::scheduler::plan_day_with;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DatasetParams {
    pub population: PopulationParams,
    pub instances_per_participant: u32,
    /// Days are drawn uniformly from `1..=study_days`.
    pub study_days: u32,
    /// Probability of flipping each label after drawing it.
    pub label_noise: f64,
    /// Observed prevalence to calibrate to, after noise.
    pub target_prevalence: Option<f64>,
    pub seed: u64,
}

struct Draw {
    participant: u32,
    context: ContextSnapshot,
    logit: f64,
}

fn sample_contexts(params: &DatasetParams) -> Vec<Draw> {
    let seed = rng::derive_seed(params.seed, &[tag::DATASET]);
    let mut out = Vec::new();
    for profile in generate_population(&params.population, seed) {
        let mut stream = ContextStream::new(&profile, seed);
        let mut r = rng::stream(seed, &[tag::DATASET, profile.id as u64]);
        let mut picks: Vec<(u32, u32)> = (0..params.instances_per_participant)
            .map(|_| {
                let day = r.random_range(1..=params.study_days.max(1));
                let plan = plan_day_with(&mut r, None);
                let t = plan.triggers[r.random_range(0..plan.triggers.len())];
                (day, t.minute)
            })
            .collect();
        // Day order keeps the stream cache small.
        picks.sort_by_key(|&(d, _)| d);
        for (day, minute) in picks {
            stream.forget_before(day);
            let context = stream.at(day_start_ts(day) + minute as i64 * 60);
            out.push(Draw {
                participant: profile.id,
                context,
                logit: profile.logit(&context.encode(), day),
            });
        }
    }
    out
}

/// Observed prevalence when every logit is shifted by `shift`.
fn observed_prevalence(draws: &[Draw], shift: f64, noise: f64) -> f64 {
    let p = draws.iter().map(|d| sigmoid(d.logit + shift)).sum::<f64>() / draws.len() as f64;
    p * (1.0 - 2.0 * noise) + noise
}

/// Logit shift reaching `target` observed prevalence, found by bisection.
/// Targets outside what the noise rate allows are clamped to the reachable
/// range.
fn calibrate_shift(draws: &[Draw], target: f64, noise: f64) -> f64 {
    let (mut lo, mut hi) = (-30.0, 30.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if observed_prevalence(draws, mid, noise) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn generate_dataset(params: &DatasetParams) -> Vec<DatasetRow> {
    let draws = sample_contexts(params);
    if draws.is_empty() {
        return Vec::new();
    }
    let noise = params.label_noise.clamp(0.0, 0.5);
    let shift = params
        .target_prevalence
        .map_or(0.0, |t| calibrate_shift(&draws, t, noise));
    let mut r = rng::stream(params.seed, &[tag::DATASET, u64::MAX]);
    draws
        .iter()
        .map(|d| {
            let truth = r.random::<f64>() < sigmoid(d.logit + shift);
            let flip = r.random::<f64>() < noise;
            DatasetRow {
                participant: d.participant,
                context: d.context,
                label: truth ^ flip,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(noise: f64, target: Option<f64>) -> DatasetParams {
        DatasetParams {
            population: PopulationParams {
                n_participants: 50,
                context_strength: 1.0,
                base_bias: -1.0,
                heterogeneity: 1.0,
                habituation: 0.0,
                late_response_prob: 0.3,
                engagement_prob: 0.4,
                misspecified_truth: false,
            },
            instances_per_participant: 40,
            study_days: 21,
            label_noise: noise,
            target_prevalence: target,
            seed: 3,
        }
    }

    #[test]
    fn shape_and_determinism() {
        let a = generate_dataset(&params(0.0, None));
        assert_eq!(a.len(), 2000);
        assert_eq!(a, generate_dataset(&params(0.0, None)));
        let ids: std::collections::BTreeSet<u32> = a.iter().map(|r| r.participant).collect();
        assert_eq!(ids.len(), 50);
    }

    #[test]
    fn hits_target_prevalence() {
        let rows = generate_dataset(&params(0.15, Some(0.3)));
        let prev = rows.iter().filter(|r| r.label).count() as f64 / rows.len() as f64;
        assert!((prev - 0.3).abs() < 0.03, "{prev}");
    }
}
