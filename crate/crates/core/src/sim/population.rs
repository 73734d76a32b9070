use crate::features::{Activity, FEATURE_LEN};
use crate::rng::{self, tag};
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

/// Ground-truth receptivity weights shared by the whole population, in the
/// encoded feature layout. Receptivity rises with an unlocked phone, a
/// recent lock change, being still or on foot, and falls in a vehicle.
pub const BASE_WEIGHTS: [f64; FEATURE_LEN] = [
    0.2,  // weekend
    0.0,  // morning
    0.2,  // afternoon
    0.4,  // evening
    0.3,  // charging
    0.0,  // discharging
    0.2,  // full
    0.4,  // battery level
    1.6,  // unlocked
    -1.6, // lock change (log-compressed seconds)
    0.4,  // wifi
    0.4,  // still
    0.2,  // on foot
    -0.8, // on bike
    -1.0, // running
    -1.4, // in vehicle
];

/// Per-participant daily routine driving the context generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextRegime {
    pub wake_minute: u32,
    pub leave_minute: u32,
    pub return_minute: u32,
    pub sleep_minute: u32,
    pub commute_minutes: u32,
    pub commute_mode: Activity,
    pub away_wifi_prob: f64,
    pub weekend_outing_prob: f64,
    pub mean_unlocked_min: f64,
    pub mean_locked_min: f64,
    /// Idle drain in percent per hour while unplugged.
    pub idle_drain_per_hour: f64,
    /// Extra drain in percent per minute while unlocked.
    pub usage_drain_per_min: f64,
}

/// One synthetic participant with known receptivity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticipantProfile {
    pub id: u32,
    pub weights: [f64; FEATURE_LEN],
    pub bias: f64,
    /// Coefficient on `unlocked * still`; zero unless the misspecified-truth
    /// mode is on.
    pub interaction: f64,
    /// Additive logit drift per study day (<= 0).
    pub habituation: f64,
    pub late_response_prob: f64,
    /// Log-normal parameters of the extra delay (seconds) past the window.
    pub late_delay_mu: f64,
    pub late_delay_sigma: f64,
    pub engagement_prob: f64,
    pub regime: ContextRegime,
}

impl ParticipantProfile {
    /// Day-1 logit of a just-in-time response.
    pub fn base_logit(&self, x: &crate::features::FeatureVector) -> f64 {
        x.dot(&self.weights) + self.bias + self.interaction * x.0[8] * x.0[11]
    }

    /// Ground-truth logit on `day`. Habituation erodes baseline willingness:
    /// the drift is scaled by `(1 - p1)^SHELTER_EXPONENT` where `p1` is the
    /// day-1 probability, so prompts in well-aligned contexts keep most of
    /// their appeal.
    pub fn logit(&self, x: &crate::features::FeatureVector, day: u32) -> f64 {
        let base = self.base_logit(x);
        let alignment = crate::models::sigmoid(base);
        let drift = self.habituation * day.saturating_sub(1) as f64;
        base + drift * (1.0 - alignment).powi(SHELTER_EXPONENT)
    }

    pub fn is_valid(&self) -> bool {
        let probs = [
            self.late_response_prob,
            self.engagement_prob,
            self.regime.away_wifi_prob,
            self.regime.weekend_outing_prob,
        ];
        probs.iter().all(|p| (0.0..=1.0).contains(p))
            && self.habituation <= 0.0
            && self.weights.iter().all(|w| w.is_finite())
            && self.bias.is_finite()
            && self.late_delay_mu.is_finite()
            && self.late_delay_sigma.is_finite()
            && self.late_delay_sigma >= 0.0
    }
}

/// Knobs of the population generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PopulationParams {
    pub n_participants: u32,
    /// Multiplier on [`BASE_WEIGHTS`].
    pub context_strength: f64,
    pub base_bias: f64,
    /// Scale of every per-participant deviation; zero gives identical
    /// profiles.
    pub heterogeneity: f64,
    pub habituation: f64,
    pub late_response_prob: f64,
    pub engagement_prob: f64,
    pub misspecified_truth: bool,
}

const INTERACTION: f64 = 1.5;
const SHELTER_EXPONENT: i32 = 3;
const DEVIATION_SCALE: f64 = 1.0;
const BIAS_SCALE: f64 = 0.2;
/// Features that change within minutes (lock state, lock clock, activity):
/// the ones a polling model can act on.
const ACTIONABLE: [usize; 7] = [8, 9, 11, 12, 13, 14, 15];
const ACTIONABLE_SCALE: f64 = 5.0;
const ONE_HOT_GROUPS: [std::ops::Range<usize>; 3] = [1..4, 4..7, 11..16];

fn clamp01(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}

fn minute(base: f64, spread: f64, lo: u32, hi: u32) -> u32 {
    (base + spread).round().clamp(lo as f64, hi as f64) as u32
}

pub fn generate_profile(params: &PopulationParams, id: u32, seed: u64) -> ParticipantProfile {
    let mut r = rng::stream(seed, &[tag::POPULATION, id as u64]);
    let h = params.heterogeneity;
    let std = Normal::new(0.0, 1.0).expect("unit normal");
    let mut z = || std.sample(&mut r);

    let mut deviation = [0.0; FEATURE_LEN];
    for (i, d) in deviation.iter_mut().enumerate() {
        let scale = if ACTIONABLE.contains(&i) {
            ACTIONABLE_SCALE
        } else {
            DEVIATION_SCALE
        };
        *d = h * scale * z();
    }
    // Deviations are centered within each one-hot group, so individuality
    // lives in how context matters rather than in overall responsiveness.
    for group in ONE_HOT_GROUPS {
        let mean = group.clone().map(|i| deviation[i]).sum::<f64>() / group.len() as f64;
        for i in group {
            deviation[i] -= mean;
        }
    }
    let mut weights = [0.0; FEATURE_LEN];
    for ((w, base), d) in weights.iter_mut().zip(BASE_WEIGHTS).zip(deviation) {
        *w = params.context_strength * base + d;
    }
    let bias = params.base_bias + h * BIAS_SCALE * z();

    let mut regime = ContextRegime {
        wake_minute: minute(420.0, h * 30.0 * z(), 300, 540),
        leave_minute: minute(500.0, h * 30.0 * z(), 440, 600),
        return_minute: minute(1050.0, h * 45.0 * z(), 900, 1200),
        sleep_minute: minute(1380.0, h * 30.0 * z(), 1290, 1439),
        commute_minutes: minute(30.0, h * 10.0 * z(), 10, 60),
        commute_mode: Activity::InVehicle,
        away_wifi_prob: clamp01(0.5 + 0.25 * h * z()),
        weekend_outing_prob: clamp01(0.5 + 0.2 * h * z()),
        mean_unlocked_min: (3.0 * (0.3 * h * z()).exp()).max(1.0),
        mean_locked_min: (15.0 * (0.3 * h * z()).exp()).max(3.0),
        idle_drain_per_hour: 0.8 * (0.3 * h * z()).exp(),
        usage_drain_per_min: 0.25 * (0.3 * h * z()).exp(),
    };
    let mode_draw = z();
    if h > 0.0 {
        regime.commute_mode = if mode_draw > 1.0 {
            Activity::OnBike
        } else if mode_draw < -1.2 {
            Activity::OnFoot
        } else {
            Activity::InVehicle
        };
    }

    ParticipantProfile {
        id,
        weights,
        bias,
        interaction: if params.misspecified_truth {
            INTERACTION
        } else {
            0.0
        },
        habituation: params.habituation.min(0.0),
        late_response_prob: clamp01(params.late_response_prob + 0.1 * h * z()),
        late_delay_mu: 3600f64.ln() + 0.3 * h * z(),
        late_delay_sigma: 1.0,
        engagement_prob: clamp01(params.engagement_prob + 0.1 * h * z()),
        regime,
    }
}

pub fn generate_population(params: &PopulationParams, seed: u64) -> Vec<ParticipantProfile> {
    (0..params.n_participants)
        .map(|id| generate_profile(params, id, seed))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(h: f64) -> PopulationParams {
        PopulationParams {
            n_participants: 83,
            context_strength: 1.0,
            base_bias: -1.0,
            heterogeneity: h,
            habituation: -0.05,
            late_response_prob: 0.35,
            engagement_prob: 0.4,
            misspecified_truth: false,
        }
    }

    #[test]
    fn zero_heterogeneity_gives_identical_profiles() {
        let pop = generate_population(&params(0.0), 3);
        for p in &pop[1..] {
            let mut q = p.clone();
            q.id = 0;
            assert_eq!(q, pop[0]);
        }
    }

    #[test]
    fn seeded() {
        assert_eq!(
            generate_population(&params(1.0), 5),
            generate_population(&params(1.0), 5)
        );
        assert_ne!(
            generate_population(&params(1.0), 5),
            generate_population(&params(1.0), 6)
        );
    }

    #[test]
    fn heterogeneous_profiles_are_distinct_and_valid() {
        let pop = generate_population(&params(1.0), 7);
        for (i, a) in pop.iter().enumerate() {
            assert!(a.is_valid());
            for b in &pop[i + 1..] {
                let d: f64 = a
                    .weights
                    .iter()
                    .zip(&b.weights)
                    .map(|(x, y)| (x - y).powi(2))
                    .sum();
                assert!(d > 0.0);
            }
        }
    }
}
