//! Encounter data model: trajectories, trial records and datasets.

pub(crate) mod io;

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use io::{load_dataset, read_trajectory, write_dataset, write_trajectory, DatasetFormat};

/// Number of trials each participant attends.
pub const TRIALS_PER_PARTICIPANT: u8 = 5;

/// Frame label used for all trajectories after ingestion.
pub const WORLD_FRAME: &str = "world";

#[derive(Debug, Error)]
pub enum EncounterError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: missing column `{column}`")]
    MissingColumn { path: PathBuf, column: String },
    #[error("{path}: row {row}: {message}")]
    Parse {
        path: PathBuf,
        row: usize,
        message: String,
    },
    #[error("trial {trial_id}: {role} timestamps not strictly increasing at sample {index}")]
    NonMonotoneTime {
        trial_id: String,
        role: Role,
        index: usize,
    },
    #[error("trial {trial_id}: reported comfort {value} outside 1..=5")]
    ComfortOutOfRange { trial_id: String, value: i64 },
    #[error("duplicate trial id `{0}`")]
    DuplicateTrialId(String),
    #[error("trial {trial_id}: {}", format_violations(.violations))]
    InvalidTrial {
        trial_id: String,
        violations: Vec<Violation>,
    },
    #[error("trial {trial_id}: cannot convert robot-relative pedestrian track: {message}")]
    FrameConversion { trial_id: String, message: String },
    #[error("{0}: no trials found")]
    EmptyDataset(PathBuf),
}

fn format_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| v.message.as_str())
        .collect::<Vec<_>>()
        .join("; ")
}

/// Which agent a trajectory belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Robot,
    Pedestrian,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Role::Robot => f.write_str("robot"),
            Role::Pedestrian => f.write_str("pedestrian"),
        }
    }
}

/// Commanded robot speed condition of a trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SpeedGroup {
    /// 1.4 m/s.
    R14,
    /// 2.8 m/s.
    R28,
}

impl SpeedGroup {
    pub const ALL: [SpeedGroup; 2] = [SpeedGroup::R14, SpeedGroup::R28];

    pub fn nominal_speed(self) -> f64 {
        match self {
            SpeedGroup::R14 => 1.4,
            SpeedGroup::R28 => 2.8,
        }
    }

    /// Group whose nominal speed is closest to `speed` (ties go to R14).
    pub fn nearest(speed: f64) -> SpeedGroup {
        let d14 = (speed - SpeedGroup::R14.nominal_speed()).abs();
        let d28 = (speed - SpeedGroup::R28.nominal_speed()).abs();
        if d28 < d14 {
            SpeedGroup::R28
        } else {
            SpeedGroup::R14
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SpeedGroup::R14 => "R14",
            SpeedGroup::R28 => "R28",
        }
    }
}

impl fmt::Display for SpeedGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SpeedGroup {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "R14" | "r14" => Ok(SpeedGroup::R14),
            "R28" | "r28" => Ok(SpeedGroup::R28),
            other => Err(format!(
                "unknown speed group `{other}` (expected R14 or R28)"
            )),
        }
    }
}

/// One timestamped planar state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    /// Seconds.
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub vx: Option<f64>,
    pub vy: Option<f64>,
    /// Radians, world frame. Usually only present for the robot.
    pub heading: Option<f64>,
}

impl TrajectorySample {
    pub fn new(t: f64, x: f64, y: f64) -> Self {
        Self {
            t,
            x,
            y,
            vx: None,
            vy: None,
            heading: None,
        }
    }

    pub fn with_velocity(mut self, vx: f64, vy: f64) -> Self {
        self.vx = Some(vx);
        self.vy = Some(vy);
        self
    }

    pub fn with_heading(mut self, heading: f64) -> Self {
        self.heading = Some(heading);
        self
    }

    pub fn velocity(&self) -> Option<(f64, f64)> {
        match (self.vx, self.vy) {
            (Some(vx), Some(vy)) => Some((vx, vy)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub frame_id: String,
}

impl Trajectory {
    pub fn new(samples: Vec<TrajectorySample>) -> Self {
        Self {
            samples,
            frame_id: WORLD_FRAME.to_string(),
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn start_time(&self) -> Option<f64> {
        self.samples.first().map(|s| s.t)
    }

    pub fn end_time(&self) -> Option<f64> {
        self.samples.last().map(|s| s.t)
    }

    /// True when every sample carries both velocity components.
    pub fn has_velocity(&self) -> bool {
        !self.samples.is_empty() && self.samples.iter().all(|s| s.velocity().is_some())
    }

    pub fn has_heading(&self) -> bool {
        !self.samples.is_empty() && self.samples.iter().all(|s| s.heading.is_some())
    }

    /// Index of the first sample whose timestamp does not exceed its predecessor.
    pub fn first_non_monotone(&self) -> Option<usize> {
        self.samples
            .windows(2)
            .position(|w| w[1].t.partial_cmp(&w[0].t) != Some(std::cmp::Ordering::Greater))
            .map(|i| i + 1)
    }

    fn violations(&self, role: Role, out: &mut Vec<Violation>) {
        if self.samples.len() < 2 {
            out.push(Violation::new(
                ViolationCode::TooFewSamples,
                format!(
                    "{role} trajectory has {} sample(s), need at least 2",
                    self.samples.len()
                ),
            ));
        }
        for (i, s) in self.samples.iter().enumerate() {
            if !(s.t.is_finite() && s.x.is_finite() && s.y.is_finite()) {
                out.push(Violation::new(
                    ViolationCode::NonFiniteValue,
                    format!("{role} sample {i} has a non-finite time or position"),
                ));
                break;
            }
            let vel_ok = match (s.vx, s.vy) {
                (Some(vx), Some(vy)) => vx.is_finite() && vy.is_finite(),
                (None, None) => true,
                _ => false,
            };
            if !vel_ok {
                out.push(Violation::new(
                    ViolationCode::InvalidVelocity,
                    format!("{role} sample {i} has a partial or non-finite velocity"),
                ));
                break;
            }
            if s.heading.is_some_and(|h| !h.is_finite()) {
                out.push(Violation::new(
                    ViolationCode::NonFiniteValue,
                    format!("{role} sample {i} has a non-finite heading"),
                ));
                break;
            }
        }
        if let Some(i) = self.first_non_monotone() {
            out.push(Violation::new(
                ViolationCode::NonMonotoneTime,
                format!("{role} timestamps not strictly increasing at sample {i}"),
            ));
        }
    }
}

/// One robot-pedestrian encounter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_id: String,
    pub participant_id: String,
    /// 1..=5, order of the trial within the participant's session.
    pub trial_index: u8,
    pub speed_group: SpeedGroup,
    pub robot: Trajectory,
    pub pedestrian: Trajectory,
    /// Likert comfort, 1 (most dangerous) ..= 5 (most comfortable).
    pub reported_comfort: u8,
    /// False when the lateral-distance measurement failed for this trial.
    pub lateral_valid: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationCode {
    EmptyIdentifier,
    TrialIndexOutOfRange,
    ComfortOutOfRange,
    TooFewSamples,
    NonFiniteValue,
    InvalidVelocity,
    NonMonotoneTime,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub code: ViolationCode,
    pub message: String,
}

impl Violation {
    fn new(code: ViolationCode, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

/// Checks every [`TrialRecord`] invariant; an empty list means the trial is valid.
pub fn validate_trial(trial: &TrialRecord) -> Vec<Violation> {
    let mut out = Vec::new();
    if trial.trial_id.trim().is_empty() {
        out.push(Violation::new(
            ViolationCode::EmptyIdentifier,
            "trial_id is empty",
        ));
    }
    if trial.participant_id.trim().is_empty() {
        out.push(Violation::new(
            ViolationCode::EmptyIdentifier,
            "participant_id is empty",
        ));
    }
    if !(1..=TRIALS_PER_PARTICIPANT).contains(&trial.trial_index) {
        out.push(Violation::new(
            ViolationCode::TrialIndexOutOfRange,
            format!("trial_index {} outside 1..=5", trial.trial_index),
        ));
    }
    if !(1..=5).contains(&trial.reported_comfort) {
        out.push(Violation::new(
            ViolationCode::ComfortOutOfRange,
            format!("reported_comfort {} outside 1..=5", trial.reported_comfort),
        ));
    }
    trial.robot.violations(Role::Robot, &mut out);
    trial.pedestrian.violations(Role::Pedestrian, &mut out);
    out
}

/// Turns the violations of one trial into the most specific ingest error.
pub(crate) fn check_trial(trial: &TrialRecord) -> Result<(), EncounterError> {
    let violations = validate_trial(trial);
    if violations.is_empty() {
        return Ok(());
    }
    if violations
        .iter()
        .any(|v| v.code == ViolationCode::ComfortOutOfRange)
    {
        return Err(EncounterError::ComfortOutOfRange {
            trial_id: trial.trial_id.clone(),
            value: i64::from(trial.reported_comfort),
        });
    }
    for (role, traj) in [
        (Role::Robot, &trial.robot),
        (Role::Pedestrian, &trial.pedestrian),
    ] {
        if let Some(index) = traj.first_non_monotone() {
            return Err(EncounterError::NonMonotoneTime {
                trial_id: trial.trial_id.clone(),
                role,
                index,
            });
        }
    }
    Err(EncounterError::InvalidTrial {
        trial_id: trial.trial_id.clone(),
        violations,
    })
}

/// An immutable collection of validated trials.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EncounterDataset {
    trials: Vec<TrialRecord>,
    pub provenance: BTreeMap<String, String>,
}

impl EncounterDataset {
    /// Validates every trial and rejects duplicate ids.
    pub fn new(
        trials: Vec<TrialRecord>,
        provenance: BTreeMap<String, String>,
    ) -> Result<Self, EncounterError> {
        let mut seen = HashSet::new();
        for trial in &trials {
            check_trial(trial)?;
            if !seen.insert(trial.trial_id.as_str()) {
                return Err(EncounterError::DuplicateTrialId(trial.trial_id.clone()));
            }
        }
        Ok(Self { trials, provenance })
    }

    pub fn trials(&self) -> &[TrialRecord] {
        &self.trials
    }

    pub fn len(&self) -> usize {
        self.trials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trials.is_empty()
    }

    pub fn get(&self, trial_id: &str) -> Option<&TrialRecord> {
        self.trials.iter().find(|t| t.trial_id == trial_id)
    }

    /// Trials usable for lateral-distance analysis.
    pub fn lateral_valid(&self) -> impl Iterator<Item = &TrialRecord> {
        self.trials.iter().filter(|t| t.lateral_valid)
    }

    pub fn into_trials(self) -> Vec<TrialRecord> {
        self.trials
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: usize) -> Trajectory {
        Trajectory::new(
            (0..n)
                .map(|i| TrajectorySample::new(i as f64 * 0.1, i as f64 * 0.14, 0.0))
                .collect(),
        )
    }

    pub(crate) fn trial(id: &str) -> TrialRecord {
        TrialRecord {
            trial_id: id.to_string(),
            participant_id: "p01".to_string(),
            trial_index: 1,
            speed_group: SpeedGroup::R14,
            robot: line(10),
            pedestrian: line(10),
            reported_comfort: 4,
            lateral_valid: true,
        }
    }

    #[test]
    fn valid_trial_has_no_violations() {
        assert!(validate_trial(&trial("a")).is_empty());
    }

    #[test]
    fn single_sample_trajectory_is_too_few() {
        let mut t = trial("a");
        t.robot = line(1);
        let codes: Vec<_> = validate_trial(&t).into_iter().map(|v| v.code).collect();
        assert_eq!(codes, vec![ViolationCode::TooFewSamples]);
    }

    #[test]
    fn trial_index_seven_is_out_of_range() {
        let mut t = trial("a");
        t.trial_index = 7;
        let codes: Vec<_> = validate_trial(&t).into_iter().map(|v| v.code).collect();
        assert_eq!(codes, vec![ViolationCode::TrialIndexOutOfRange]);
    }

    #[test]
    fn partial_velocity_is_rejected() {
        let mut t = trial("a");
        t.pedestrian.samples[3].vx = Some(1.0);
        let codes: Vec<_> = validate_trial(&t).into_iter().map(|v| v.code).collect();
        assert_eq!(codes, vec![ViolationCode::InvalidVelocity]);
    }

    #[test]
    fn repeated_timestamp_is_non_monotone() {
        let mut t = trial("a");
        t.robot.samples[4].t = t.robot.samples[3].t;
        assert!(matches!(
            check_trial(&t),
            Err(EncounterError::NonMonotoneTime {
                role: Role::Robot,
                index: 4,
                ..
            })
        ));
    }

    #[test]
    fn dataset_rejects_duplicate_ids() {
        let err = EncounterDataset::new(vec![trial("a"), trial("a")], BTreeMap::new()).unwrap_err();
        assert!(matches!(err, EncounterError::DuplicateTrialId(id) if id == "a"));
    }

    #[test]
    fn nearest_speed_group() {
        assert_eq!(SpeedGroup::nearest(1.3), SpeedGroup::R14);
        assert_eq!(SpeedGroup::nearest(2.5), SpeedGroup::R28);
        assert_eq!(SpeedGroup::nearest(0.0), SpeedGroup::R14);
    }
}
