//! Minute-resolution synthetic context streams.
//!
//! Each participant-day is generated independently from `(profile, day,
//! seed)`: a home/away routine drives Wi-Fi and the activity mix, a
//! semi-Markov process drives activity and lock state, and the battery
//! drains while unplugged and recharges overnight.

use super::ParticipantProfile;
use crate::features::{
    time_of_day_from_clock, Activity, BatteryStatus, ContextSnapshot, DayType, LockState, Wifi,
};
use crate::rng::{self, tag, Rng};
use rand::Rng as _;
use rand_distr::{Distribution, Exp};
use std::collections::BTreeMap;

pub const MINUTES_PER_DAY: usize = 1440;
pub const SECONDS_PER_DAY: i64 = 86_400;

/// Overnight charge rate, percent per minute.
const CHARGE_PER_MIN: f64 = 25.0 / 60.0;

/// Study day (1-based) and minute of day for an absolute timestamp.
pub fn split_ts(ts: i64) -> (u32, u32) {
    let day = ts.div_euclid(SECONDS_PER_DAY) + 1;
    let minute = ts.rem_euclid(SECONDS_PER_DAY) / 60;
    (day.max(1) as u32, minute as u32)
}

pub fn day_start_ts(day: u32) -> i64 {
    (day as i64 - 1) * SECONDS_PER_DAY
}

/// Day of week (0 = Monday) of study day 1. Enrollment is staggered, so
/// this is drawn per participant even when profiles are identical.
pub fn enrollment_weekday(profile: &ParticipantProfile, seed: u64) -> u32 {
    rng::stream(seed, &[tag::CONTEXT, profile.id as u64, u64::MAX]).random_range(0..7)
}

pub fn day_type(profile: &ParticipantProfile, day: u32, seed: u64) -> DayType {
    if (enrollment_weekday(profile, seed) + day - 1) % 7 >= 5 {
        DayType::Weekend
    } else {
        DayType::Weekday
    }
}

/// One participant-day of context, one snapshot per minute.
#[derive(Debug, Clone, PartialEq)]
pub struct DayStream {
    minutes: Vec<ContextSnapshot>,
}

impl DayStream {
    pub fn at_minute(&self, minute: u32) -> ContextSnapshot {
        self.minutes[(minute as usize).min(MINUTES_PER_DAY - 1)]
    }

    pub fn minutes(&self) -> &[ContextSnapshot] {
        &self.minutes
    }
}

fn dwell(rng: &mut Rng, mean_min: f64) -> u32 {
    let e = Exp::new(1.0 / mean_min.max(0.5)).expect("positive rate");
    (e.sample(rng).round() as u32).max(1)
}

fn draw_activity(rng: &mut Rng, away: bool) -> Activity {
    let weights: [f64; 5] = if away {
        [0.60, 0.22, 0.05, 0.05, 0.08]
    } else {
        [0.80, 0.15, 0.01, 0.03, 0.01]
    };
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (a, w) in Activity::ALL.iter().zip(weights) {
        acc += w;
        if u < acc {
            return *a;
        }
    }
    Activity::Still
}

fn activity_mean_dwell(a: Activity) -> f64 {
    match a {
        Activity::Still => 35.0,
        Activity::OnFoot => 8.0,
        Activity::OnBike => 15.0,
        Activity::Running => 25.0,
        Activity::InVehicle => 20.0,
    }
}

/// Generates the stream for one participant-day.
pub fn simulate_context(profile: &ParticipantProfile, day: u32, seed: u64) -> DayStream {
    let reg = &profile.regime;
    let mut r = rng::stream(seed, &[tag::CONTEXT, profile.id as u64, day as u64]);
    let dtype = day_type(profile, day, seed);

    // Daily routine with per-day jitter.
    let jitter = |r: &mut Rng, spread: i32| r.random_range(-spread..=spread);
    let wake = (reg.wake_minute as i32 + jitter(&mut r, 20)).clamp(240, 600) as u32;
    let sleep = (reg.sleep_minute as i32 + jitter(&mut r, 30)).clamp(1200, 1439) as u32;
    let (away_from, away_to) = match dtype {
        DayType::Weekday => (
            (reg.leave_minute as i32 + jitter(&mut r, 20)).max(wake as i32 + 10) as u32,
            (reg.return_minute as i32 + jitter(&mut r, 40)).min(sleep as i32 - 30) as u32,
        ),
        DayType::Weekend => {
            let outing = r.random_bool(reg.weekend_outing_prob);
            let start = r.random_range(660..840);
            let len = r.random_range(120..300);
            if outing {
                (start, (start + len).min(sleep - 30))
            } else {
                (0, 0)
            }
        }
    };
    let away_wifi = r.random_bool(reg.away_wifi_prob);
    let commute = reg.commute_minutes;
    let start_level: f64 = r.random_range(20.0..60.0);

    let is_away = |m: u32| away_to > away_from && m >= away_from && m < away_to;
    let is_commute = |m: u32| {
        away_to > away_from
            && ((m >= away_from && m < away_from + commute)
                || (m + commute >= away_to && m < away_to))
    };
    let asleep = |m: u32| m < wake || m >= sleep;

    let mut minutes = Vec::with_capacity(MINUTES_PER_DAY);
    let mut activity = Activity::Still;
    let mut activity_left = 0u32;
    let mut lock = LockState::Locked;
    let mut lock_left = 0u32;
    let mut since_lock_change: u32 = 3600 + 60 * r.random_range(0..120);
    let mut level = start_level;

    for m in 0..MINUTES_PER_DAY as u32 {
        let away = is_away(m);

        // Activity.
        if asleep(m) {
            activity = Activity::Still;
            activity_left = 0;
        } else if is_commute(m) {
            activity = reg.commute_mode;
            activity_left = 0;
        } else if activity_left == 0 {
            activity = draw_activity(&mut r, away);
            activity_left = dwell(&mut r, activity_mean_dwell(activity));
        }
        activity_left = activity_left.saturating_sub(1);

        // Lock state. Transitions happen at the start of a minute.
        if m > 0 {
            let next = if asleep(m) {
                LockState::Locked
            } else if lock_left == 0 {
                match lock {
                    LockState::Locked => LockState::Unlocked,
                    LockState::Unlocked => LockState::Locked,
                }
            } else {
                lock
            };
            if next != lock {
                lock = next;
                since_lock_change = 0;
                let moving = matches!(
                    activity,
                    Activity::InVehicle | Activity::Running | Activity::OnBike
                );
                let mean = match lock {
                    LockState::Unlocked => reg.mean_unlocked_min,
                    LockState::Locked if moving => 2.0 * reg.mean_locked_min,
                    LockState::Locked => reg.mean_locked_min,
                };
                lock_left = dwell(&mut r, mean);
            } else {
                since_lock_change = since_lock_change.saturating_add(60);
            }
            lock_left = lock_left.saturating_sub(1);
        }

        // Battery: plugged in overnight.
        let plugged = asleep(m);
        if m > 0 {
            if plugged {
                level = (level + CHARGE_PER_MIN).min(100.0);
            } else {
                level -= reg.idle_drain_per_hour / 60.0;
                if lock == LockState::Unlocked {
                    level -= reg.usage_drain_per_min;
                }
                level = level.max(1.0);
            }
        }
        let level_int = (level.round() as u32).clamp(1, 100);
        let battery_status = match (plugged, level_int >= 100) {
            (true, true) => BatteryStatus::Full,
            (true, false) => BatteryStatus::Charging,
            (false, _) => BatteryStatus::Discharging,
        };

        let home = !away;
        let wifi = if home || away_wifi {
            Wifi::Connected
        } else {
            Wifi::Disconnected
        };

        minutes.push(
            ContextSnapshot::new(
                dtype,
                time_of_day_from_clock(m).expect("minute in range"),
                battery_status,
                level_int,
                lock,
                since_lock_change,
                wifi,
                activity,
            )
            .expect("battery clamped to 1..=100"),
        );
    }
    DayStream { minutes }
}

/// Lazily generated day streams for one participant, addressable by
/// absolute time.
#[derive(Debug, Clone)]
pub struct ContextStream<'a> {
    profile: &'a ParticipantProfile,
    seed: u64,
    days: BTreeMap<u32, DayStream>,
}

impl<'a> ContextStream<'a> {
    pub fn new(profile: &'a ParticipantProfile, seed: u64) -> Self {
        Self {
            profile,
            seed,
            days: BTreeMap::new(),
        }
    }

    pub fn at(&mut self, ts: i64) -> ContextSnapshot {
        let (day, minute) = split_ts(ts);
        let (profile, seed) = (self.profile, self.seed);
        self.days
            .entry(day)
            .or_insert_with(|| simulate_context(profile, day, seed))
            .at_minute(minute)
    }

    /// Drops cached days before `day`.
    pub fn forget_before(&mut self, day: u32) {
        self.days = self.days.split_off(&day);
    }
}
