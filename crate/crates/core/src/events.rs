//! JSON Lines event log of a simulated study.
//!
//! One JSON object per line, discriminated by `"event"`:
//!
//! * `trigger`: `{participant, day, ts, kind}`
//! * `delivery`: `{participant, day, trigger_ts, model_selected,
//!   model_attributed, delivery_ts, attempts, context}`
//! * `outcome`: `{participant, day, delivery_ts, first_response_ts,
//!   reply_ts, context_at_response}`
//! * `label`: `{participant, ts, label, context}` with `label` 1 or 0

use crate::delivery::DeliveryRecord;
use crate::features::ContextSnapshot;
use crate::labeling::OutcomeRecord;
use crate::metrics::MessageRecord;
use crate::scheduler::TriggerKind;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriggerEvent {
    pub participant: u32,
    pub day: u32,
    pub ts: i64,
    pub kind: TriggerKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeEvent {
    pub participant: u32,
    pub day: u32,
    pub delivery_ts: i64,
    pub first_response_ts: Option<i64>,
    pub reply_ts: Vec<i64>,
    pub context_at_response: Option<ContextSnapshot>,
}

impl OutcomeEvent {
    pub fn new(participant: u32, day: u32, o: &OutcomeRecord) -> Self {
        Self {
            participant,
            day,
            delivery_ts: o.delivery_ts,
            first_response_ts: o.first_response_ts,
            reply_ts: o.reply_ts.clone(),
            context_at_response: o.context_at_response,
        }
    }

    pub fn record(&self) -> OutcomeRecord {
        OutcomeRecord {
            delivery_ts: self.delivery_ts,
            first_response_ts: self.first_response_ts,
            reply_ts: self.reply_ts.clone(),
            context_at_response: self.context_at_response,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelEvent {
    pub participant: u32,
    pub ts: i64,
    #[serde(with = "label_digit")]
    pub label: bool,
    pub context: ContextSnapshot,
}

mod label_digit {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &bool, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(*v as u8)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<bool, D::Error> {
        match u8::deserialize(d)? {
            0 => Ok(false),
            1 => Ok(true),
            other => Err(D::Error::custom(format!(
                "label must be 0 or 1, found {other}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    Trigger(TriggerEvent),
    Delivery(DeliveryRecord),
    Outcome(OutcomeEvent),
    Label(LabelEvent),
}

impl Event {
    pub fn participant(&self) -> u32 {
        match self {
            Event::Trigger(e) => e.participant,
            Event::Delivery(e) => e.participant,
            Event::Outcome(e) => e.participant,
            Event::Label(e) => e.participant,
        }
    }
}

#[derive(Debug, Error)]
pub enum EventLogError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("delivery for participant {participant} at {delivery_ts} has no outcome")]
    MissingOutcome { participant: u32, delivery_ts: i64 },
}

pub fn to_jsonl(events: &[Event]) -> String {
    let mut out = String::new();
    for e in events {
        out.push_str(&serde_json::to_string(e).expect("events always serialize"));
        out.push('\n');
    }
    out
}

/// Parses a log; blank lines are skipped, line numbers are 1-based.
pub fn parse_jsonl(text: &str) -> Result<Vec<Event>, EventLogError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| EventLogError::Parse {
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

/// Joins each delivery with its outcome, in delivery order.
pub fn messages(events: &[Event], replicate: u32) -> Result<Vec<MessageRecord>, EventLogError> {
    let outcomes: HashMap<(u32, i64), &OutcomeEvent> = events
        .iter()
        .filter_map(|e| match e {
            Event::Outcome(o) => Some(((o.participant, o.delivery_ts), o)),
            _ => None,
        })
        .collect();
    events
        .iter()
        .filter_map(|e| match e {
            Event::Delivery(d) => Some(d),
            _ => None,
        })
        .map(|d| {
            let o = outcomes.get(&(d.participant, d.delivery_ts)).ok_or(
                EventLogError::MissingOutcome {
                    participant: d.participant,
                    delivery_ts: d.delivery_ts,
                },
            )?;
            Ok(MessageRecord {
                replicate,
                delivery: *d,
                outcome: o.record(),
            })
        })
        .collect()
}
