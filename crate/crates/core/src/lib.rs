//! Kinematic analysis of mobile robot / pedestrian encounters.
//!
//! The crate is organised as a pipeline:
//!
//! - [`encounter`]: trial data model, validation and dataset ingestion.
//! - [`kinematics`]: the six per-trial variables (robot speed, minimum
//!   distance, lateral distance at the pass, maximum path curvature, minimum
//!   projected time-to-collision and the distance at that instant).
//! - [`predictors`]: binning, bin weights and the three binary comfort
//!   predictors.
//! - [`stats`]: distance correlation with permutation testing, 2x2 table
//!   statistics, classification metrics and linear trends.
//! - [`evaluation`]: joins features, labels and predictors into a report.
//! - [`synthgen`]: seeded synthetic hallway encounters with known ground truth.

pub mod config;
pub mod encounter;
pub mod evaluation;
pub mod kinematics;
pub mod predictors;
pub mod stats;
pub mod synthgen;

pub use config::AnalysisConfig;
pub use encounter::{
    load_dataset, validate_trial, write_dataset, DatasetFormat, EncounterDataset, SpeedGroup,
    Trajectory, TrajectorySample, TrialRecord,
};
pub use kinematics::{extract_features, KinematicFeatures, KinematicParams};
pub use predictors::{PredictorConfig, Variable};
