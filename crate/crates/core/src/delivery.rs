//! Per-message delivery state machine.
//!
//! A control delivery goes out immediately. A model-timed delivery polls its
//! model at 0, 5, ..., 30 minutes after the trigger and goes out at the
//! first receptive poll; if every poll says no, it goes out at minute 31 and
//! is attributed to control.

use crate::features::ContextSnapshot;
use crate::models::{AdaptiveModel, LinearModel};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelId {
    Control,
    Static,
    Adaptive,
}

impl ModelId {
    pub const ALL: [ModelId; 3] = [ModelId::Control, ModelId::Static, ModelId::Adaptive];

    pub fn as_str(&self) -> &'static str {
        match self {
            ModelId::Control => "control",
            ModelId::Static => "static",
            ModelId::Adaptive => "adaptive",
        }
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeliveryPolicy {
    /// Days on which only control and static are eligible.
    pub warm_up_days: u32,
    pub retry_interval_s: i64,
    pub poll_count: u32,
    pub fallback_offset_s: i64,
    pub jit_window_s: i64,
}

impl Default for DeliveryPolicy {
    fn default() -> Self {
        Self {
            warm_up_days: 7,
            retry_interval_s: 300,
            poll_count: 7,
            fallback_offset_s: 1860,
            jit_window_s: 600,
        }
    }
}

impl DeliveryPolicy {
    pub fn poll_offsets(&self) -> impl Iterator<Item = i64> + '_ {
        (0..self.poll_count as i64).map(move |k| k * self.retry_interval_s)
    }

    pub fn last_poll_offset(&self) -> i64 {
        (self.poll_count as i64 - 1) * self.retry_interval_s
    }

    pub fn is_valid(&self) -> bool {
        self.poll_count >= 1
            && self.retry_interval_s > 0
            && self.fallback_offset_s > self.last_poll_offset()
    }

    /// Draws the delivery model for a trigger on `day` (1-based).
    pub fn select_model<R: Rng + ?Sized>(&self, day: u32, rng: &mut R) -> ModelId {
        if day <= self.warm_up_days {
            [ModelId::Control, ModelId::Static][rng.random_range(0..2)]
        } else {
            ModelId::ALL[rng.random_range(0..3)]
        }
    }
}

/// Model used to time a delivery. Control never consults a model.
pub enum DeliveryModel<'a> {
    Control,
    Static(&'a mut dyn Poller),
    Adaptive(&'a mut dyn Poller),
}

impl DeliveryModel<'_> {
    pub fn id(&self) -> ModelId {
        match self {
            DeliveryModel::Control => ModelId::Control,
            DeliveryModel::Static(_) => ModelId::Static,
            DeliveryModel::Adaptive(_) => ModelId::Adaptive,
        }
    }
}

/// Answers "is the participant receptive now?" at a poll instant.
pub trait Poller {
    fn poll(&mut self, at: i64, context: &ContextSnapshot) -> bool;
}

impl Poller for LinearModel {
    fn poll(&mut self, _at: i64, context: &ContextSnapshot) -> bool {
        self.is_receptive(&context.encode())
    }
}

impl Poller for AdaptiveModel {
    fn poll(&mut self, _at: i64, context: &ContextSnapshot) -> bool {
        self.predict(&context.encode()).receptive
    }
}

/// Wraps a closure as a [`Poller`].
pub struct FnPoller<F>(pub F);

impl<F: FnMut(i64, &ContextSnapshot) -> bool> Poller for FnPoller<F> {
    fn poll(&mut self, at: i64, context: &ContextSnapshot) -> bool {
        (self.0)(at, context)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trigger {
    pub participant: u32,
    /// 1-based study day.
    pub day: u32,
    /// Absolute seconds since the start of study day 1.
    pub ts: i64,
}

/// One delivered initiating message.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeliveryRecord {
    pub participant: u32,
    pub day: u32,
    pub trigger_ts: i64,
    pub model_selected: ModelId,
    pub model_attributed: ModelId,
    pub delivery_ts: i64,
    pub attempts: u32,
    pub context: ContextSnapshot,
}

impl DeliveryRecord {
    pub fn offset(&self) -> i64 {
        self.delivery_ts - self.trigger_ts
    }

    pub fn is_fallback(&self, policy: &DeliveryPolicy) -> bool {
        self.offset() == policy.fallback_offset_s
    }

    /// Checks the record-level state-machine invariants.
    pub fn check(&self, policy: &DeliveryPolicy) -> Result<(), String> {
        let off = self.offset();
        let on_grid =
            off >= 0 && off <= policy.last_poll_offset() && off % policy.retry_interval_s == 0;
        if !on_grid && off != policy.fallback_offset_s {
            return Err(format!("offset {off} s is neither a poll nor the fallback"));
        }
        let fallback = off == policy.fallback_offset_s;
        let expected_attr = if fallback {
            ModelId::Control
        } else {
            self.model_selected
        };
        if self.model_attributed != expected_attr {
            return Err(format!(
                "attributed {} but selected {} at offset {off}",
                self.model_attributed, self.model_selected
            ));
        }
        if self.model_selected == ModelId::Control && (off != 0 || self.attempts != 1) {
            return Err(format!(
                "control delivery at offset {off} after {} attempts",
                self.attempts
            ));
        }
        let expected_attempts = if fallback {
            policy.poll_count
        } else {
            (off / policy.retry_interval_s) as u32 + 1
        };
        if self.attempts != expected_attempts {
            return Err(format!(
                "{} attempts for offset {off}, expected {expected_attempts}",
                self.attempts
            ));
        }
        if self.model_selected == ModelId::Adaptive && self.day <= policy.warm_up_days {
            return Err(format!("adaptive selected on warm-up day {}", self.day));
        }
        Ok(())
    }
}

/// Runs one trigger to delivery. `context_at` must answer for every poll
/// instant and for the fallback instant.
pub fn run_delivery(
    trigger: Trigger,
    model: DeliveryModel<'_>,
    context_at: &mut dyn FnMut(i64) -> ContextSnapshot,
    policy: &DeliveryPolicy,
) -> DeliveryRecord {
    let selected = model.id();
    let deliver =
        |at: i64, attributed: ModelId, attempts: u32, context: ContextSnapshot| DeliveryRecord {
            participant: trigger.participant,
            day: trigger.day,
            trigger_ts: trigger.ts,
            model_selected: selected,
            model_attributed: attributed,
            delivery_ts: at,
            attempts,
            context,
        };
    let poller = match model {
        DeliveryModel::Control => {
            return deliver(trigger.ts, ModelId::Control, 1, context_at(trigger.ts));
        }
        DeliveryModel::Static(p) | DeliveryModel::Adaptive(p) => p,
    };
    for (k, off) in policy.poll_offsets().enumerate() {
        let at = trigger.ts + off;
        let ctx = context_at(at);
        if poller.poll(at, &ctx) {
            return deliver(at, selected, k as u32 + 1, ctx);
        }
    }
    let at = trigger.ts + policy.fallback_offset_s;
    deliver(at, ModelId::Control, policy.poll_count, context_at(at))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{Activity, BatteryStatus, DayType, LockState, TimeOfDay, Wifi};
    use proptest::prelude::*;

    fn ctx(level: u32) -> ContextSnapshot {
        ContextSnapshot::new(
            DayType::Weekday,
            TimeOfDay::Morning,
            BatteryStatus::Discharging,
            level,
            LockState::Locked,
            60,
            Wifi::Disconnected,
            Activity::Still,
        )
        .unwrap()
    }

    /// Context whose battery level encodes the poll index, so tests can see
    /// which instant was used.
    fn stream(trigger: i64) -> impl FnMut(i64) -> ContextSnapshot {
        move |t| ctx(1 + ((t - trigger) / 60) as u32)
    }

    const T: Trigger = Trigger {
        participant: 1,
        day: 9,
        ts: 100_000,
    };

    #[test]
    fn always_receptive_delivers_at_first_poll() {
        let mut p = FnPoller(|_, _: &ContextSnapshot| true);
        let r = run_delivery(
            T,
            DeliveryModel::Static(&mut p),
            &mut stream(T.ts),
            &Default::default(),
        );
        assert_eq!(
            (r.offset(), r.attempts, r.model_attributed),
            (0, 1, ModelId::Static)
        );
        assert_eq!(r.context, ctx(1));
    }

    #[test]
    fn never_receptive_falls_back_to_control() {
        let mut p = FnPoller(|_, _: &ContextSnapshot| false);
        let r = run_delivery(
            T,
            DeliveryModel::Static(&mut p),
            &mut stream(T.ts),
            &Default::default(),
        );
        assert_eq!(r.offset(), 1860);
        assert_eq!(r.attempts, 7);
        assert_eq!(r.model_selected, ModelId::Static);
        assert_eq!(r.model_attributed, ModelId::Control);
        assert_eq!(r.context, ctx(32));
    }

    #[test]
    fn fourth_poll() {
        let mut calls = 0;
        let mut p = FnPoller(|_, _: &ContextSnapshot| {
            calls += 1;
            calls == 4
        });
        let r = run_delivery(
            T,
            DeliveryModel::Adaptive(&mut p),
            &mut stream(T.ts),
            &Default::default(),
        );
        assert_eq!(r.delivery_ts, T.ts + 900);
        assert_eq!(r.attempts, 4);
        assert_eq!(r.model_attributed, ModelId::Adaptive);
        assert_eq!(r.context, ctx(16));
    }

    #[test]
    fn control_is_immediate() {
        let r = run_delivery(
            T,
            DeliveryModel::Control,
            &mut stream(T.ts),
            &Default::default(),
        );
        assert_eq!(
            (r.offset(), r.attempts, r.model_attributed),
            (0, 1, ModelId::Control)
        );
        r.check(&Default::default()).unwrap();
    }

    #[test]
    fn policy_offsets() {
        let p = DeliveryPolicy::default();
        assert_eq!(
            p.poll_offsets().collect::<Vec<_>>(),
            vec![0, 300, 600, 900, 1200, 1500, 1800]
        );
        assert!(p.is_valid());
        assert!(!DeliveryPolicy {
            fallback_offset_s: 1800,
            ..p
        }
        .is_valid());
    }

    #[test]
    fn selection_frequencies() {
        let p = DeliveryPolicy::default();
        let mut rng = crate::rng::stream(1, &[]);
        let mut counts = [0usize; 3];
        for _ in 0..60_000 {
            counts[p.select_model(3, &mut rng) as usize] += 1;
        }
        assert_eq!(counts[2], 0);
        assert!(
            counts[0].abs_diff(30_000) <= 500 && counts[1].abs_diff(30_000) <= 500,
            "{counts:?}"
        );

        let mut counts = [0usize; 3];
        for _ in 0..60_000 {
            counts[p.select_model(8, &mut rng) as usize] += 1;
        }
        assert!(
            counts.iter().all(|c| c.abs_diff(20_000) <= 500),
            "{counts:?}"
        );
    }

    #[test]
    fn warm_up_boundary() {
        let p = DeliveryPolicy::default();
        let draw = |day| {
            let mut rng = crate::rng::stream(2, &[]);
            let mut seen = std::collections::BTreeSet::new();
            for _ in 0..1000 {
                seen.insert(p.select_model(day, &mut rng));
            }
            seen.len()
        };
        assert_eq!(draw(7), 2);
        assert_eq!(draw(8), 3);
    }

    fn first_yes(answers: &[bool]) -> i64 {
        let mut k = 0;
        let mut p = FnPoller(|_, _: &ContextSnapshot| {
            let a = answers.get(k).copied().unwrap_or(false);
            k += 1;
            a
        });
        run_delivery(
            T,
            DeliveryModel::Static(&mut p),
            &mut stream(T.ts),
            &Default::default(),
        )
        .delivery_ts
    }

    proptest! {
        #[test]
        fn records_satisfy_invariants(answers in proptest::collection::vec(any::<bool>(), 7), kind in 0u8..3, day in 1u32..22) {
            let policy = DeliveryPolicy::default();
            let mut k = 0;
            let mut p = FnPoller(|_, _: &ContextSnapshot| { k += 1; answers[k - 1] });
            let trig = Trigger { day, ..T };
            let model = match kind {
                0 => DeliveryModel::Control,
                1 => DeliveryModel::Static(&mut p),
                _ if day > 7 => DeliveryModel::Adaptive(&mut p),
                _ => DeliveryModel::Static(&mut p),
            };
            let r = run_delivery(trig, model, &mut stream(T.ts), &policy);
            prop_assert!(r.check(&policy).is_ok(), "{:?}", r.check(&policy));
            if r.model_attributed != ModelId::Control {
                prop_assert_ne!(r.offset(), 1860);
            }
        }

        #[test]
        fn dominant_model_delivers_no_later(b in proptest::collection::vec(any::<bool>(), 7), extra in proptest::collection::vec(any::<bool>(), 7)) {
            let a: Vec<bool> = b.iter().zip(&extra).map(|(x, y)| *x || *y).collect();
            prop_assert!(first_yes(&a) <= first_yes(&b));
        }
    }
}
