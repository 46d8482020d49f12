//! Per-trial kinematic variables.
//!
//! [`extract_features`] runs the whole pipeline for one trial: resample both
//! tracks onto a common grid, build the relative series, and compute
//!
//! | field  | meaning                                                        |
//! |--------|----------------------------------------------------------------|
//! | `v`    | robot mean speed (m/s)                                         |
//! | `d_min`| minimum robot-pedestrian distance (m)                          |
//! | `d_lat`| lateral distance at the passing moment (m)                     |
//! | `rho`  | maximum curvature of the robot path (1/m)                      |
//! | `t_p`  | minimum projected time-to-collision (s)                        |
//! | `d_tp` | distance at the instant of minimum PTTC (m)                    |
//!
//! Per-feature failures become [`FeatureFlag`]s rather than errors so one bad
//! feature never hides the other five.

mod geometry;
mod io;
mod relative;
mod resample;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::encounter::TrialRecord;

pub use geometry::{lateral_distance, max_curvature, mean_speed, SpeedEstimate};
pub use io::{read_features_csv, write_features_csv, FeatureIoError, FEATURE_COLUMNS};
pub use relative::{
    min_distance, min_pttc_and_distance, pttc_at, pttc_series, relative_series, MinDistance,
    MinPttc, PttcEntry, PttcSeries, PttcStatus, RelativeState,
};
pub use resample::resample_and_derive;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KinematicsError {
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("robot and pedestrian trajectories do not overlap in time")]
    NoTemporalOverlap,
    #[error("empty series")]
    EmptySeries,
    #[error("robot heading is neither recorded nor derivable from its motion")]
    HeadingUnavailable,
    #[error("every sample is slower than the curvature speed floor")]
    DegenerateTrajectory,
    #[error("the agents never approach each other")]
    NeverApproaching,
}

/// Every tunable of the feature pipeline. Serialized next to feature output
/// so values can be reproduced from (data, params).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KinematicParams {
    /// Resampling step, seconds.
    pub dt: f64,
    /// Odd moving-average window (samples) applied to positions; 1 = none.
    pub smoothing_window: usize,
    /// Samples slower than this (m/s) are ignored for curvature and heading.
    pub v_floor: f64,
    /// Minimum radial closing speed (m/s) for a finite PTTC.
    pub closing_speed_epsilon: f64,
    /// Separations below this (m) count as a collision with PTTC 0.
    pub collision_distance: f64,
    /// Relative deviation from the nominal group speed still considered consistent.
    pub speed_group_tolerance: f64,
}

impl Default for KinematicParams {
    fn default() -> Self {
        Self {
            dt: 0.05,
            smoothing_window: 5,
            v_floor: 0.1,
            closing_speed_epsilon: 1e-6,
            collision_distance: 1e-6,
            speed_group_tolerance: 0.25,
        }
    }
}

impl KinematicParams {
    pub fn validate(&self) -> Result<(), KinematicsError> {
        resample::check_grid(self.dt, self.smoothing_window)?;
        for (name, v) in [
            ("v_floor", self.v_floor),
            ("closing_speed_epsilon", self.closing_speed_epsilon),
            ("collision_distance", self.collision_distance),
            ("speed_group_tolerance", self.speed_group_tolerance),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(KinematicsError::InvalidParameter(format!(
                    "{name} must be finite and non-negative, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Condition attached to a feature row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureFlag {
    /// Trial marked as lacking a usable lateral measurement.
    LateralInvalid,
    /// The pedestrian never moved from ahead of to behind the robot.
    NoPassingMoment,
    HeadingUnavailable,
    /// No sample with positive closing speed; `t_p` and `d_tp` are missing.
    NeverApproaching,
    /// Some sample came within the collision distance.
    Collision,
    /// Every robot sample was below the curvature speed floor.
    DegenerateCurvature,
    /// A trajectory was too short for at least one feature.
    TooFewSamples,
    /// Nearest speed group of the measured speed differs from the trial metadata.
    SpeedGroupMismatch,
    /// Measured speed is far from every nominal speed.
    SpeedInconsistent,
}

impl FeatureFlag {
    pub const ALL: [FeatureFlag; 9] = [
        FeatureFlag::LateralInvalid,
        FeatureFlag::NoPassingMoment,
        FeatureFlag::HeadingUnavailable,
        FeatureFlag::NeverApproaching,
        FeatureFlag::Collision,
        FeatureFlag::DegenerateCurvature,
        FeatureFlag::TooFewSamples,
        FeatureFlag::SpeedGroupMismatch,
        FeatureFlag::SpeedInconsistent,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureFlag::LateralInvalid => "lateral_invalid",
            FeatureFlag::NoPassingMoment => "no_passing_moment",
            FeatureFlag::HeadingUnavailable => "heading_unavailable",
            FeatureFlag::NeverApproaching => "never_approaching",
            FeatureFlag::Collision => "collision",
            FeatureFlag::DegenerateCurvature => "degenerate_curvature",
            FeatureFlag::TooFewSamples => "too_few_samples",
            FeatureFlag::SpeedGroupMismatch => "speed_group_mismatch",
            FeatureFlag::SpeedInconsistent => "speed_inconsistent",
        }
    }
}

impl fmt::Display for FeatureFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FeatureFlag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FeatureFlag::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| format!("unknown feature flag `{s}`"))
    }
}

/// The six kinematic variables of one trial. Missing values are `None`, never 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KinematicFeatures {
    pub trial_id: String,
    pub v: Option<f64>,
    pub d_min: Option<f64>,
    pub d_lat: Option<f64>,
    pub rho: Option<f64>,
    pub t_p: Option<f64>,
    pub d_tp: Option<f64>,
    pub flags: BTreeSet<FeatureFlag>,
}

impl KinematicFeatures {
    pub fn empty(trial_id: impl Into<String>) -> Self {
        Self {
            trial_id: trial_id.into(),
            v: None,
            d_min: None,
            d_lat: None,
            rho: None,
            t_p: None,
            d_tp: None,
            flags: BTreeSet::new(),
        }
    }

    pub fn has(&self, flag: FeatureFlag) -> bool {
        self.flags.contains(&flag)
    }

    /// `t_p` as used by the predictors: an encounter that never approaches
    /// counts as an infinite time-to-collision.
    pub fn effective_t_p(&self) -> Option<f64> {
        match self.t_p {
            Some(t) => Some(t),
            None if self.has(FeatureFlag::NeverApproaching) => Some(f64::INFINITY),
            None => None,
        }
    }
}

/// Computes all six features of `trial`.
///
/// Only a missing temporal overlap (or invalid `params`) fails the trial;
/// every other problem is recorded as a flag on the affected features.
pub fn extract_features(
    trial: &TrialRecord,
    params: &KinematicParams,
) -> Result<KinematicFeatures, KinematicsError> {
    params.validate()?;
    let mut out = KinematicFeatures::empty(&trial.trial_id);

    match resample_and_derive(&trial.robot, params.dt, params.smoothing_window) {
        Ok(robot) => {
            if let Ok(speed) = mean_speed(&robot, params.speed_group_tolerance) {
                out.v = Some(speed.mean);
                if !speed.consistent {
                    out.flags.insert(FeatureFlag::SpeedInconsistent);
                } else if speed.nearest != trial.speed_group {
                    out.flags.insert(FeatureFlag::SpeedGroupMismatch);
                }
            }
            match max_curvature(
                &geometry::trim_ends(&robot, params.smoothing_window / 2),
                params.v_floor,
            ) {
                Ok(rho) => out.rho = Some(rho),
                Err(KinematicsError::DegenerateTrajectory) => {
                    out.flags.insert(FeatureFlag::DegenerateCurvature);
                }
                Err(_) => {
                    out.flags.insert(FeatureFlag::TooFewSamples);
                }
            }
        }
        Err(_) => {
            out.flags.insert(FeatureFlag::TooFewSamples);
        }
    }

    relative::overlap(trial)?;
    let aligned = match relative::align(trial, params) {
        Ok(a) => a,
        Err(KinematicsError::NoTemporalOverlap) => return Err(KinematicsError::NoTemporalOverlap),
        Err(_) => {
            out.flags.insert(FeatureFlag::TooFewSamples);
            if !trial.lateral_valid {
                out.flags.insert(FeatureFlag::LateralInvalid);
            }
            return Ok(out);
        }
    };
    let rel = relative::relative_from(&aligned);

    out.d_min = min_distance(&rel).ok().map(|m| m.distance);

    let series = pttc_series(&rel, params)?;
    if series.has_collision() {
        out.flags.insert(FeatureFlag::Collision);
    }
    match min_pttc_and_distance(&rel, &series) {
        Ok(m) => {
            out.t_p = Some(m.t_p);
            out.d_tp = Some(m.d_tp);
        }
        Err(_) => {
            out.flags.insert(FeatureFlag::NeverApproaching);
        }
    }

    if !trial.lateral_valid {
        out.flags.insert(FeatureFlag::LateralInvalid);
    } else {
        match geometry::headings(&aligned.robot, params.v_floor) {
            Ok(h) => match geometry::lateral_from_aligned(&rel, &h) {
                Some(d) => out.d_lat = Some(d),
                None => {
                    out.flags.insert(FeatureFlag::NoPassingMoment);
                }
            },
            Err(_) => {
                out.flags.insert(FeatureFlag::HeadingUnavailable);
            }
        }
    }

    Ok(out)
}

/// Feature extraction over many trials, in parallel; output order follows `trials`.
pub fn extract_all(
    trials: &[TrialRecord],
    params: &KinematicParams,
) -> Vec<Result<KinematicFeatures, KinematicsError>> {
    use rayon::prelude::*;
    trials
        .par_iter()
        .map(|t| extract_features(t, params))
        .collect()
}
