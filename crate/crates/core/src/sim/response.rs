use super::ParticipantProfile;
use crate::features::ContextSnapshot;
use crate::labeling::OutcomeRecord;
use crate::metrics::JIT_WINDOW_S;
use crate::models::sigmoid;
use crate::rng::Rng;
use rand::Rng as _;
use rand_distr::{Distribution, LogNormal};

const MAX_LATE_DELAY_S: i64 = 7 * 86_400;
const MAX_LATE_WAIT_S: i64 = 86_400;

/// Probability of a just-in-time response to a message delivered in
/// `context` on study day `day`.
pub fn jit_probability(profile: &ParticipantProfile, context: &ContextSnapshot, day: u32) -> f64 {
    sigmoid(profile.logit(&context.encode(), day))
}

/// Draws the participant's reaction to a delivered message.
///
/// With the ground-truth probability the first reply lands 5..=600 s after
/// delivery, optionally followed by 1-3 more replies inside the window.
/// Otherwise the participant answers late with `late_response_prob`, or not
/// at all. A late reply comes after the window plus a log-normal delay, at
/// the first following minute that passes a receptivity draw (capped at one
/// day of waiting), so the reply context reflects when they can engage.
pub fn simulate_response(
    profile: &ParticipantProfile,
    context_at_delivery: &ContextSnapshot,
    delivery_ts: i64,
    day: u32,
    rng: &mut Rng,
    context_at: &mut dyn FnMut(i64) -> ContextSnapshot,
) -> OutcomeRecord {
    let p_jit = jit_probability(profile, context_at_delivery, day);
    let window_end = delivery_ts + JIT_WINDOW_S;
    // Fixed draw order keeps the stream aligned across branches.
    let u_jit: f64 = rng.random();
    let u_late: f64 = rng.random();
    let u_engage: f64 = rng.random();

    if u_jit < p_jit {
        let first = delivery_ts + rng.random_range(5..=JIT_WINDOW_S);
        let mut replies = vec![first];
        if u_engage < profile.engagement_prob {
            let extra = rng.random_range(1..=3);
            for _ in 0..extra {
                replies.push(rng.random_range(first..=window_end));
            }
        }
        replies.sort_unstable();
        return OutcomeRecord {
            delivery_ts,
            first_response_ts: Some(first),
            reply_ts: replies,
            context_at_response: Some(context_at(first)),
        };
    }
    if u_late < profile.late_response_prob {
        let dist = LogNormal::new(profile.late_delay_mu, profile.late_delay_sigma)
            .expect("finite log-normal parameters");
        let extra = (dist.sample(rng).round() as i64).clamp(1, MAX_LATE_DELAY_S);
        // The reply waits for the first minute the participant is receptive.
        let mut at = window_end + extra;
        let give_up = at + MAX_LATE_WAIT_S;
        while at < give_up {
            let (d, _) = super::context::split_ts(at);
            if rng.random::<f64>() < jit_probability(profile, &context_at(at), d) {
                break;
            }
            at += 60;
        }
        return OutcomeRecord {
            delivery_ts,
            first_response_ts: Some(at),
            reply_ts: vec![at],
            context_at_response: Some(context_at(at)),
        };
    }
    OutcomeRecord::no_response(delivery_ts)
}
