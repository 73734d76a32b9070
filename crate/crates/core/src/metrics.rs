//! Receptivity metrics for single messages and their aggregates.

use crate::delivery::DeliveryRecord;
use crate::labeling::OutcomeRecord;
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Response window for just-in-time response and conversation engagement,
/// inclusive at its end.
pub const JIT_WINDOW_S: i64 = 600;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("response at {response} precedes delivery at {delivery}")]
    NegativeDelay { delivery: i64, response: i64 },
}

pub fn response_delay(delivery_ts: i64, first_response_ts: i64) -> Result<i64, MetricError> {
    if first_response_ts < delivery_ts {
        return Err(MetricError::NegativeDelay {
            delivery: delivery_ts,
            response: first_response_ts,
        });
    }
    Ok(first_response_ts - delivery_ts)
}

pub fn jit_response(delivery_ts: i64, first_response_ts: Option<i64>) -> Result<bool, MetricError> {
    match first_response_ts {
        Some(r) => Ok(response_delay(delivery_ts, r)? <= JIT_WINDOW_S),
        None => Ok(false),
    }
}

/// At least two replies in `(delivery, delivery + 600 s]`.
pub fn conversation_engagement(delivery_ts: i64, reply_ts: &[i64]) -> bool {
    reply_ts
        .iter()
        .filter(|&&r| r > delivery_ts && r <= delivery_ts + JIT_WINDOW_S)
        .count()
        >= 2
}

/// A delivered message joined with its outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MessageRecord {
    /// Replicate the message came from; participants are clustered by
    /// `(replicate, participant)`.
    #[serde(default)]
    pub replicate: u32,
    pub delivery: DeliveryRecord,
    pub outcome: OutcomeRecord,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    JitResponse,
    Response,
    ConversationEngagement,
}

impl Metric {
    pub const ALL: [Metric; 3] = [
        Metric::JitResponse,
        Metric::Response,
        Metric::ConversationEngagement,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Metric::JitResponse => "jit_response",
            Metric::Response => "response",
            Metric::ConversationEngagement => "conversation_engagement",
        }
    }

    /// Whether the message counts toward this metric. Outcomes that violate
    /// their own invariants count as no response.
    pub fn hit(&self, m: &MessageRecord) -> bool {
        let o = &m.outcome;
        match self {
            Metric::JitResponse => {
                jit_response(o.delivery_ts, o.first_response_ts).unwrap_or(false)
            }
            Metric::Response => o.first_response_ts.is_some(),
            Metric::ConversationEngagement => conversation_engagement(o.delivery_ts, &o.reply_ts),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Raw counts; these add exactly across disjoint message sets.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReceptivityCounts {
    pub n_messages: u64,
    pub n_jit: u64,
    pub n_responded: u64,
    pub n_conversation: u64,
    pub total_delay_s: i64,
}

impl ReceptivityCounts {
    pub fn add(&mut self, m: &MessageRecord) {
        self.n_messages += 1;
        self.n_jit += Metric::JitResponse.hit(m) as u64;
        self.n_conversation += Metric::ConversationEngagement.hit(m) as u64;
        if let Some(r) = m.outcome.first_response_ts {
            if let Ok(d) = response_delay(m.outcome.delivery_ts, r) {
                self.n_responded += 1;
                self.total_delay_s += d;
            }
        }
    }

    pub fn merge(self, other: Self) -> Self {
        Self {
            n_messages: self.n_messages + other.n_messages,
            n_jit: self.n_jit + other.n_jit,
            n_responded: self.n_responded + other.n_responded,
            n_conversation: self.n_conversation + other.n_conversation,
            total_delay_s: self.total_delay_s + other.total_delay_s,
        }
    }

    pub fn summary(&self) -> ReceptivitySummary {
        let rate = |k: u64| (self.n_messages > 0).then(|| k as f64 / self.n_messages as f64);
        ReceptivitySummary {
            n_messages: self.n_messages,
            n_responded: self.n_responded,
            jit_response_rate: rate(self.n_jit),
            overall_response_rate: rate(self.n_responded),
            conversation_rate: rate(self.n_conversation),
            average_response_delay: (self.n_responded > 0)
                .then(|| self.total_delay_s as f64 / self.n_responded as f64),
        }
    }
}

/// Rates over a set of messages. `None` marks an undefined value (no
/// messages, or no responses for the delay).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReceptivitySummary {
    pub n_messages: u64,
    pub n_responded: u64,
    pub jit_response_rate: Option<f64>,
    pub overall_response_rate: Option<f64>,
    pub conversation_rate: Option<f64>,
    pub average_response_delay: Option<f64>,
}

pub const SUMMARY_CSV_HEADER: &str =
    "period,model,n,jit_rate,response_rate,conversation_rate,avg_delay_s";

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{x:.6}"))
}

impl ReceptivitySummary {
    pub fn csv_row(&self, period: &str, model: &str) -> String {
        format!(
            "{period},{model},{},{},{},{},{}",
            self.n_messages,
            opt(self.jit_response_rate),
            opt(self.overall_response_rate),
            opt(self.conversation_rate),
            opt(self.average_response_delay)
        )
    }
}

pub fn counts<'a, I>(records: I, filter: impl Fn(&MessageRecord) -> bool) -> ReceptivityCounts
where
    I: IntoIterator<Item = &'a MessageRecord>,
{
    let mut c = ReceptivityCounts::default();
    for m in records.into_iter().filter(|m| filter(m)) {
        c.add(m);
    }
    c
}

pub fn summarize<'a, I>(records: I, filter: impl Fn(&MessageRecord) -> bool) -> ReceptivitySummary
where
    I: IntoIterator<Item = &'a MessageRecord>,
{
    counts(records, filter).summary()
}
