//! Contextual state of a participant-moment and its numeric encoding.
//!
//! Layout of the encoded vector (16 components, all in `[0, 1]`):
//!
//! | index  | component                                   |
//! |--------|---------------------------------------------|
//! | 0      | is_weekend                                  |
//! | 1..=3  | time of day: morning, afternoon, evening    |
//! | 4..=6  | battery: charging, discharging, full        |
//! | 7      | battery_level / 100                         |
//! | 8      | is_unlocked                                 |
//! | 9      | min(ln(1 + lock_change_s) / ln(1 + 86400), 1) |
//! | 10     | wifi connected                              |
//! | 11..=15| activity: still, on_foot, on_bike, running, in_vehicle |

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const FEATURE_LEN: usize = 16;

/// Seconds after which the lock-change component saturates at 1.
pub const LOCK_CHANGE_CAP_S: u32 = 86_400;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FeatureError {
    #[error("battery level {0} outside 1..=100")]
    BatteryLevel(u32),
    #[error("minute of day {0} outside 0..=1439")]
    MinuteOfDay(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DayType {
    Weekday,
    Weekend,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeOfDay {
    Morning,
    Afternoon,
    Evening,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BatteryStatus {
    Charging,
    Discharging,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LockState {
    Locked,
    Unlocked,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Wifi {
    Connected,
    Disconnected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activity {
    Still,
    OnFoot,
    OnBike,
    Running,
    InVehicle,
}

impl Activity {
    pub const ALL: [Activity; 5] = [
        Activity::Still,
        Activity::OnFoot,
        Activity::OnBike,
        Activity::Running,
        Activity::InVehicle,
    ];
}

/// One participant-moment of passively sensed context.
///
/// Construct through [`ContextSnapshot::new`] (or deserialization, which
/// runs the same checks) so the battery range invariant always holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawSnapshot")]
pub struct ContextSnapshot {
    pub day_type: DayType,
    pub time_of_day: TimeOfDay,
    pub battery_status: BatteryStatus,
    pub battery_level: u32,
    pub lock_state: LockState,
    /// Seconds since the last lock/unlock transition.
    pub lock_change_time: u32,
    pub wifi: Wifi,
    pub activity: Activity,
}

#[derive(Deserialize)]
struct RawSnapshot {
    day_type: DayType,
    time_of_day: TimeOfDay,
    battery_status: BatteryStatus,
    battery_level: u32,
    lock_state: LockState,
    lock_change_time: u32,
    wifi: Wifi,
    activity: Activity,
}

impl TryFrom<RawSnapshot> for ContextSnapshot {
    type Error = FeatureError;

    fn try_from(r: RawSnapshot) -> Result<Self, Self::Error> {
        ContextSnapshot::new(
            r.day_type,
            r.time_of_day,
            r.battery_status,
            r.battery_level,
            r.lock_state,
            r.lock_change_time,
            r.wifi,
            r.activity,
        )
    }
}

impl ContextSnapshot {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        day_type: DayType,
        time_of_day: TimeOfDay,
        battery_status: BatteryStatus,
        battery_level: u32,
        lock_state: LockState,
        lock_change_time: u32,
        wifi: Wifi,
        activity: Activity,
    ) -> Result<Self, FeatureError> {
        if !(1..=100).contains(&battery_level) {
            return Err(FeatureError::BatteryLevel(battery_level));
        }
        Ok(Self {
            day_type,
            time_of_day,
            battery_status,
            battery_level,
            lock_state,
            lock_change_time,
            wifi,
            activity,
        })
    }

    pub fn encode(&self) -> FeatureVector {
        encode(self)
    }
}

/// Dense encoded context. Every component lies in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector(pub [f64; FEATURE_LEN]);

impl FeatureVector {
    pub const ZERO: FeatureVector = FeatureVector([0.0; FEATURE_LEN]);

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dot(&self, w: &[f64; FEATURE_LEN]) -> f64 {
        self.0.iter().zip(w).map(|(a, b)| a * b).sum()
    }
}

impl From<[f64; FEATURE_LEN]> for FeatureVector {
    fn from(v: [f64; FEATURE_LEN]) -> Self {
        FeatureVector(v)
    }
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Compressed lock-change component: `min(ln_1p(t) / ln_1p(86400), 1)`.
pub fn lock_change_component(seconds: u32) -> f64 {
    let v = (seconds as f64).ln_1p() / (LOCK_CHANGE_CAP_S as f64).ln_1p();
    v.min(1.0)
}

pub fn encode(s: &ContextSnapshot) -> FeatureVector {
    debug_assert!((1..=100).contains(&s.battery_level));
    let mut v = [0.0; FEATURE_LEN];
    v[0] = flag(s.day_type == DayType::Weekend);
    v[1 + s.time_of_day as usize] = 1.0;
    v[4 + s.battery_status as usize] = 1.0;
    v[7] = s.battery_level as f64 / 100.0;
    v[8] = flag(s.lock_state == LockState::Unlocked);
    v[9] = lock_change_component(s.lock_change_time);
    v[10] = flag(s.wifi == Wifi::Connected);
    v[11 + s.activity as usize] = 1.0;
    FeatureVector(v)
}

/// Morning is [05:00, 12:00), afternoon [12:00, 18:00), evening otherwise.
pub fn time_of_day_from_clock(minutes_since_midnight: u32) -> Result<TimeOfDay, FeatureError> {
    match minutes_since_midnight {
        300..=719 => Ok(TimeOfDay::Morning),
        720..=1079 => Ok(TimeOfDay::Afternoon),
        0..=299 | 1080..=1439 => Ok(TimeOfDay::Evening),
        m => Err(FeatureError::MinuteOfDay(m)),
    }
}
