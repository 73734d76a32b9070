//! Receptivity-aware just-in-time intervention delivery.
//!
//! The crate is split along the lifecycle of an initiating message:
//!
//! * [`features`] encodes a participant-moment into a fixed 16-wide vector.
//! * [`models`] holds the linear classifiers, undersampling, grouped
//!   cross-validation and the dual-model adaptive predictor.
//! * [`scheduler`] plans the day's triggers; [`delivery`] runs the
//!   poll/fallback state machine; [`labeling`] turns outcomes into training
//!   instances; [`metrics`] scores outcomes.
//! * [`sim`] is a synthetic field study with known ground truth, and
//!   [`eval`] produces the comparison tables and per-day trend series.

#![forbid(unsafe_code)]

pub mod dataset;
pub mod delivery;
pub mod eval;
pub mod events;
pub mod features;
pub mod labeling;
pub mod metrics;
pub mod models;
pub mod rng;
pub mod scheduler;
pub mod sim;

pub use delivery::{DeliveryPolicy, DeliveryRecord, ModelId};
pub use features::{ContextSnapshot, FeatureVector, FEATURE_LEN};
pub use labeling::{LabeledInstance, OutcomeRecord};
pub use metrics::{MessageRecord, Metric};
pub use models::{AdaptiveModel, LinearModel, ModelKind, TrainingSet};
pub use sim::{ExperimentConfig, ParticipantProfile, PretrainedModels};
