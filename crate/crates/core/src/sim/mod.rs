//! Synthetic field study with known ground truth.
//!
//! A seeded population of participants with individual context routines
//! and receptivity weights; everything downstream (contexts, trigger plans,
//! model choice, responses) is drawn from streams keyed by purpose,
//! participant and day, so outputs do not depend on execution order.

pub mod context;
pub mod dataset;
pub mod experiment;
pub mod population;
pub mod response;

pub use context::{simulate_context, ContextStream, DayStream};
pub use dataset::{generate_dataset, DatasetParams};
pub use experiment::{
    prior_study_dataset, run_experiment, run_replicate, ExperimentConfig, PretrainedModels,
    ReplicateLog, SimError,
};
pub use population::{generate_population, ParticipantProfile, PopulationParams};
pub use response::{jit_probability, simulate_response};
