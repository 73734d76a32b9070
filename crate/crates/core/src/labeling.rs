//! Turns a delivered message and its outcome into training labels.
//!
//! * just-in-time response (delay <= window): delivery context, receptive
//! * later response: delivery context non-receptive, plus response context
//!   receptive
//! * no response: delivery context, non-receptive

use crate::delivery::DeliveryRecord;
use crate::features::ContextSnapshot;
pub use crate::models::LabeledInstance;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OutcomeError {
    #[error("response at {response} precedes delivery at {delivery}")]
    ResponseBeforeDelivery { delivery: i64, response: i64 },
    #[error("first response does not match the earliest reply")]
    FirstReplyMismatch,
    #[error("response context present iff a response exists")]
    ContextMismatch,
}

/// The participant's reaction to one delivered message.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeRecord {
    pub delivery_ts: i64,
    pub first_response_ts: Option<i64>,
    /// Every reply in the conversation, ascending.
    pub reply_ts: Vec<i64>,
    pub context_at_response: Option<ContextSnapshot>,
}

impl OutcomeRecord {
    pub fn no_response(delivery_ts: i64) -> Self {
        Self {
            delivery_ts,
            first_response_ts: None,
            reply_ts: Vec::new(),
            context_at_response: None,
        }
    }

    pub fn validate(&self) -> Result<(), OutcomeError> {
        if let Some(&r) = self.reply_ts.iter().find(|&&r| r < self.delivery_ts) {
            return Err(OutcomeError::ResponseBeforeDelivery {
                delivery: self.delivery_ts,
                response: r,
            });
        }
        if let Some(first) = self.first_response_ts {
            if first < self.delivery_ts {
                return Err(OutcomeError::ResponseBeforeDelivery {
                    delivery: self.delivery_ts,
                    response: first,
                });
            }
        }
        if self.first_response_ts != self.reply_ts.iter().min().copied() {
            return Err(OutcomeError::FirstReplyMismatch);
        }
        if self.first_response_ts.is_some() != self.context_at_response.is_some() {
            return Err(OutcomeError::ContextMismatch);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeCase {
    JustInTime,
    Late,
    NoResponse,
}

/// A label with the context it describes and the instant it becomes known.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextLabel {
    /// When the label is available to the adaptive model: the response
    /// instant for receptive labels, the window expiry for non-receptive
    /// ones.
    pub ts: i64,
    pub label: bool,
    pub context: ContextSnapshot,
}

impl ContextLabel {
    pub fn instance(&self) -> LabeledInstance {
        LabeledInstance::new(self.context.encode(), self.label)
    }
}

pub fn classify(outcome: &OutcomeRecord, jit_window_s: i64) -> Result<OutcomeCase, OutcomeError> {
    outcome.validate()?;
    Ok(match outcome.first_response_ts {
        Some(r) if r - outcome.delivery_ts <= jit_window_s => OutcomeCase::JustInTime,
        Some(_) => OutcomeCase::Late,
        None => OutcomeCase::NoResponse,
    })
}

pub fn context_labels(
    delivery: &DeliveryRecord,
    outcome: &OutcomeRecord,
    jit_window_s: i64,
) -> Result<Vec<ContextLabel>, OutcomeError> {
    let expiry = delivery.delivery_ts + jit_window_s;
    let at_delivery = |ts, label| ContextLabel {
        ts,
        label,
        context: delivery.context,
    };
    Ok(match classify(outcome, jit_window_s)? {
        OutcomeCase::JustInTime => {
            vec![at_delivery(
                outcome.first_response_ts.unwrap_or(expiry),
                true,
            )]
        }
        OutcomeCase::Late => vec![
            at_delivery(expiry, false),
            ContextLabel {
                ts: outcome.first_response_ts.unwrap_or(expiry),
                label: true,
                context: outcome
                    .context_at_response
                    .ok_or(OutcomeError::ContextMismatch)?,
            },
        ],
        OutcomeCase::NoResponse => vec![at_delivery(expiry, false)],
    })
}

pub fn label_outcome(
    delivery: &DeliveryRecord,
    outcome: &OutcomeRecord,
    jit_window_s: i64,
) -> Result<Vec<LabeledInstance>, OutcomeError> {
    Ok(context_labels(delivery, outcome, jit_window_s)?
        .iter()
        .map(ContextLabel::instance)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::delivery::ModelId;
    use crate::features::{Activity, BatteryStatus, DayType, LockState, TimeOfDay, Wifi};

    fn ctx(activity: Activity) -> ContextSnapshot {
        ContextSnapshot::new(
            DayType::Weekend,
            TimeOfDay::Evening,
            BatteryStatus::Full,
            80,
            LockState::Unlocked,
            10,
            Wifi::Connected,
            activity,
        )
        .unwrap()
    }

    fn delivery() -> DeliveryRecord {
        DeliveryRecord {
            participant: 3,
            day: 2,
            trigger_ts: 1000,
            model_selected: ModelId::Static,
            model_attributed: ModelId::Static,
            delivery_ts: 1000,
            attempts: 1,
            context: ctx(Activity::Still),
        }
    }

    fn responded(delay: i64) -> OutcomeRecord {
        OutcomeRecord {
            delivery_ts: 1000,
            first_response_ts: Some(1000 + delay),
            reply_ts: vec![1000 + delay],
            context_at_response: Some(ctx(Activity::OnFoot)),
        }
    }

    #[test]
    fn jit_response_is_receptive() {
        let out = label_outcome(&delivery(), &responded(540), 600).unwrap();
        assert_eq!(
            out,
            vec![LabeledInstance::new(ctx(Activity::Still).encode(), true)]
        );
    }

    #[test]
    fn boundary_delay_is_jit() {
        assert_eq!(classify(&responded(600), 600), Ok(OutcomeCase::JustInTime));
        assert_eq!(classify(&responded(601), 600), Ok(OutcomeCase::Late));
    }

    #[test]
    fn late_response_gives_two_labels() {
        let out = label_outcome(&delivery(), &responded(3600), 600).unwrap();
        assert_eq!(
            out,
            vec![
                LabeledInstance::new(ctx(Activity::Still).encode(), false),
                LabeledInstance::new(ctx(Activity::OnFoot).encode(), true),
            ]
        );
        let timed = context_labels(&delivery(), &responded(3600), 600).unwrap();
        assert_eq!(timed[0].ts, 1600);
        assert_eq!(timed[1].ts, 4600);
    }

    #[test]
    fn no_response_is_non_receptive() {
        let out = label_outcome(&delivery(), &OutcomeRecord::no_response(1000), 600).unwrap();
        assert_eq!(
            out,
            vec![LabeledInstance::new(ctx(Activity::Still).encode(), false)]
        );
    }

    #[test]
    fn malformed_outcomes_rejected() {
        let mut bad = responded(10);
        bad.first_response_ts = Some(900);
        bad.reply_ts = vec![900];
        assert!(matches!(
            label_outcome(&delivery(), &bad, 600),
            Err(OutcomeError::ResponseBeforeDelivery { .. })
        ));
        let mut bad = responded(10);
        bad.context_at_response = None;
        assert_eq!(bad.validate(), Err(OutcomeError::ContextMismatch));
        let mut bad = responded(10);
        bad.reply_ts = vec![1005, 1010];
        assert_eq!(bad.validate(), Err(OutcomeError::FirstReplyMismatch));
    }
}
