//! Daily trigger planning and step goals.
//!
//! Three blocks per day: goal setting somewhere in 08:00-10:00, an optional
//! self-monitoring prompt in 10:00-18:00 (about half of participants each
//! day), and goal achievement at 21:00.

use crate::rng::{self, tag, Rng};
use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const GOAL_SETTING_WINDOW: std::ops::Range<u32> = 480..600;
pub const SELF_MONITORING_WINDOW: std::ops::Range<u32> = 600..1080;
pub const GOAL_ACHIEVEMENT_MINUTE: u32 = 1260;
pub const STEP_HISTORY_DAYS: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TriggerKind {
    GoalSetting,
    SelfMonitoring,
    GoalAchievement,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlannedTrigger {
    pub kind: TriggerKind,
    /// Minutes since midnight.
    pub minute: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DayPlan {
    /// Sorted by minute, at most one per kind.
    pub triggers: Vec<PlannedTrigger>,
}

impl DayPlan {
    pub fn is_valid(&self) -> bool {
        let sorted = self.triggers.windows(2).all(|w| w[0].minute < w[1].minute);
        let mut kinds: Vec<TriggerKind> = self.triggers.iter().map(|t| t.kind).collect();
        kinds.sort();
        kinds.dedup();
        let in_block = self.triggers.iter().all(|t| match t.kind {
            TriggerKind::GoalSetting => GOAL_SETTING_WINDOW.contains(&t.minute),
            TriggerKind::SelfMonitoring => SELF_MONITORING_WINDOW.contains(&t.minute),
            TriggerKind::GoalAchievement => t.minute == GOAL_ACHIEVEMENT_MINUTE,
        });
        sorted && kinds.len() == self.triggers.len() && in_block
    }
}

/// Plans a day from `rng`. `self_monitoring` forces the optional prompt on
/// or off; `None` flips a fair coin.
pub fn plan_day_with(rng: &mut Rng, self_monitoring: Option<bool>) -> DayPlan {
    let goal_setting = rng.random_range(GOAL_SETTING_WINDOW);
    let coin = rng.random_bool(0.5);
    let monitor_minute = rng.random_range(SELF_MONITORING_WINDOW);
    let mut triggers = vec![PlannedTrigger {
        kind: TriggerKind::GoalSetting,
        minute: goal_setting,
    }];
    if self_monitoring.unwrap_or(coin) {
        triggers.push(PlannedTrigger {
            kind: TriggerKind::SelfMonitoring,
            minute: monitor_minute,
        });
    }
    triggers.push(PlannedTrigger {
        kind: TriggerKind::GoalAchievement,
        minute: GOAL_ACHIEVEMENT_MINUTE,
    });
    DayPlan { triggers }
}

pub fn plan_day(participant: u32, day: u32, seed: u64) -> DayPlan {
    let mut r = rng::stream(seed, &[tag::PLAN, participant as u64, day as u64]);
    plan_day_with(&mut r, None)
}

/// Exact-half cohort for one day: `n / 2` participants (rounded down),
/// chosen by a seeded shuffle, get the self-monitoring prompt.
pub fn exact_half_cohort(n_participants: u32, day: u32, seed: u64) -> Vec<bool> {
    let mut ids: Vec<u32> = (0..n_participants).collect();
    ids.shuffle(&mut rng::stream(seed, &[tag::PLAN, u64::MAX, day as u64]));
    let mut selected = vec![false; n_participants as usize];
    for &id in &ids[..n_participants as usize / 2] {
        selected[id as usize] = true;
    }
    selected
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StepGoalError {
    #[error("step goal needs at least one day of history")]
    EmptyHistory,
}

/// Nearest-rank 60th percentile of the last (up to) nine daily step counts.
pub fn step_goal(history: &[u32]) -> Result<u32, StepGoalError> {
    if history.is_empty() {
        return Err(StepGoalError::EmptyHistory);
    }
    let start = history.len().saturating_sub(STEP_HISTORY_DAYS);
    let mut recent = history[start..].to_vec();
    recent.sort_unstable();
    let n = recent.len();
    // ceil(0.6 n) in integers.
    let rank = (6 * n).div_ceil(10);
    Ok(recent[rank - 1])
}
