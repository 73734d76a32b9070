//! CSV datasets of labeled contexts.
//!
//! Columns: `participant`, then the eight context fields in
//! [`ContextSnapshot`] order, then `label` (1 = receptive, 0 = not).
//! Categorical values use the snake_case names, e.g. `in_vehicle`.

use crate::features::{
    Activity, BatteryStatus, ContextSnapshot, DayType, LockState, TimeOfDay, Wifi,
};
use crate::models::{LabeledInstance, TrainingSet};
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use thiserror::Error;

pub const CSV_HEADER: [&str; 10] = [
    "participant",
    "day_type",
    "time_of_day",
    "battery_status",
    "battery_level",
    "lock_state",
    "lock_change_time",
    "wifi",
    "activity",
    "label",
];

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("write failed: {0}")]
    Write(String),
}

impl DatasetError {
    pub fn line(&self) -> Option<u64> {
        match self {
            DatasetError::Parse { line, .. } => Some(*line),
            DatasetError::Write(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DatasetRow {
    pub participant: u32,
    pub context: ContextSnapshot,
    pub label: bool,
}

impl DatasetRow {
    pub fn instance(&self) -> LabeledInstance {
        LabeledInstance::new(self.context.encode(), self.label)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    participant: u32,
    day_type: DayType,
    time_of_day: TimeOfDay,
    battery_status: BatteryStatus,
    battery_level: u32,
    lock_state: LockState,
    lock_change_time: u32,
    wifi: Wifi,
    activity: Activity,
    label: u8,
}

fn parse_err(line: u64, message: impl Into<String>) -> DatasetError {
    DatasetError::Parse {
        line,
        message: message.into(),
    }
}

pub fn read_csv<R: Read>(reader: R) -> Result<Vec<DatasetRow>, DatasetError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .clone();
    if headers.is_empty() || headers.iter().all(|h| h.trim().is_empty()) {
        return Err(parse_err(1, "empty dataset: missing header"));
    }
    let found: Vec<&str> = headers.iter().map(str::trim).collect();
    if found != CSV_HEADER {
        return Err(parse_err(
            1,
            format!(
                "header must be {}, found {}",
                CSV_HEADER.join(","),
                found.join(",")
            ),
        ));
    }
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let raw: CsvRow = record
            .deserialize(Some(&headers))
            .map_err(|e| parse_err(line, e.to_string()))?;
        let label = match raw.label {
            0 => false,
            1 => true,
            other => {
                return Err(parse_err(
                    line,
                    format!("label must be 0 or 1, found {other}"),
                ))
            }
        };
        let context = ContextSnapshot::new(
            raw.day_type,
            raw.time_of_day,
            raw.battery_status,
            raw.battery_level,
            raw.lock_state,
            raw.lock_change_time,
            raw.wifi,
            raw.activity,
        )
        .map_err(|e| parse_err(line, e.to_string()))?;
        rows.push(DatasetRow {
            participant: raw.participant,
            context,
            label,
        });
    }
    if rows.is_empty() {
        return Err(parse_err(2, "dataset has a header but no rows"));
    }
    Ok(rows)
}

pub fn write_csv<W: Write>(writer: W, rows: &[DatasetRow]) -> Result<(), DatasetError> {
    let mut wtr = csv::Writer::from_writer(writer);
    for r in rows {
        let c = &r.context;
        wtr.serialize(CsvRow {
            participant: r.participant,
            day_type: c.day_type,
            time_of_day: c.time_of_day,
            battery_status: c.battery_status,
            battery_level: c.battery_level,
            lock_state: c.lock_state,
            lock_change_time: c.lock_change_time,
            wifi: c.wifi,
            activity: c.activity,
            label: r.label as u8,
        })
        .map_err(|e| DatasetError::Write(e.to_string()))?;
    }
    wtr.flush().map_err(|e| DatasetError::Write(e.to_string()))
}

pub fn to_training_set(rows: &[DatasetRow]) -> TrainingSet {
    TrainingSet::from_parts(
        rows.iter().map(DatasetRow::instance).collect(),
        rows.iter().map(|r| r.participant).collect(),
    )
}
