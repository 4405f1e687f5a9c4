//! Simulation engine and analysis toolkit for the feedback loop between
//! venue-choice behavior and a periodically retrained next-venue
//! recommender.
//!
//! The pipeline: [`ingest`] loads and filters check-in data and splits it
//! into train/post periods; [`recsys`] fits binary-feedback recommenders;
//! [`mobility`] supplies the autonomous exploration / preferential-return
//! choice model; [`engine`] replays the post period substituting every
//! venue choice and retraining the model on a fixed event-time cadence;
//! [`metrics`] measures inequality, co-location structure, and attention
//! shifts on the simulated visits. [`synth`] generates self-consistent
//! check-in datasets for demos and tests.

pub mod engine;
pub mod error;
pub mod geo;
pub mod ingest;
pub mod metrics;
pub mod mobility;
pub mod recsys;
pub mod rng;
pub mod synth;
pub mod types;

pub use engine::{
    AnchorMode, JumpScope, RunMetadata, RunMetrics, SimData, SimulatedVisit, SimulationConfig,
    SweepSpec,
};
pub use error::{Error, Result};
pub use geo::{haversine, JumpLengthDistribution, SpatialIndex};
pub use ingest::{Catalog, Dataset, SplitSpec, UserTable, Venue, VisitEvent};
pub use metrics::{ColocationNetwork, DecileReport};
pub use mobility::{DecisionMode, ExplorationMode, ExplorationPolicy, UserHistory};
pub use recsys::{
    EvalReport, InteractionMatrix, RecommenderKind, RecommenderModel, ScoredCandidates,
    TrainingHyper,
};
pub use types::{CategoryId, FirstLevelId, Timestamp, UserId, VenueId};
