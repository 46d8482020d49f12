use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::encounter::{Trajectory, TrialRecord};

use super::resample::resample_between;
use super::{KinematicParams, KinematicsError};

/// Pedestrian state relative to the robot at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativeState {
    pub t: f64,
    /// Pedestrian position minus robot position, meters.
    pub p_rel: Vector2<f64>,
    /// Pedestrian velocity minus robot velocity, meters/second.
    pub v_rel: Vector2<f64>,
    pub dist: f64,
}

impl RelativeState {
    pub fn new(t: f64, p_rel: Vector2<f64>, v_rel: Vector2<f64>) -> Self {
        Self {
            t,
            p_rel,
            v_rel,
            dist: p_rel.norm(),
        }
    }
}

/// Robot and pedestrian resampled onto one shared time grid.
#[derive(Debug, Clone)]
pub(crate) struct AlignedPair {
    pub robot: Trajectory,
    pub pedestrian: Trajectory,
}

pub(crate) fn overlap(trial: &TrialRecord) -> Result<(f64, f64), KinematicsError> {
    let (r0, r1) = span(&trial.robot).ok_or(KinematicsError::NoTemporalOverlap)?;
    let (p0, p1) = span(&trial.pedestrian).ok_or(KinematicsError::NoTemporalOverlap)?;
    let (start, end) = (r0.max(p0), r1.min(p1));
    if end < start {
        return Err(KinematicsError::NoTemporalOverlap);
    }
    Ok((start, end))
}

fn span(traj: &Trajectory) -> Option<(f64, f64)> {
    Some((traj.start_time()?, traj.end_time()?))
}

pub(crate) fn align(
    trial: &TrialRecord,
    params: &KinematicParams,
) -> Result<AlignedPair, KinematicsError> {
    let (start, end) = overlap(trial)?;
    let robot = resample_between(&trial.robot, start, end, params.dt, params.smoothing_window)?;
    let pedestrian = resample_between(
        &trial.pedestrian,
        start,
        end,
        params.dt,
        params.smoothing_window,
    )?;
    Ok(AlignedPair { robot, pedestrian })
}

pub(crate) fn relative_from(aligned: &AlignedPair) -> Vec<RelativeState> {
    aligned
        .robot
        .samples
        .iter()
        .zip(&aligned.pedestrian.samples)
        .map(|(r, p)| {
            let vel = |s: &crate::encounter::TrajectorySample| {
                Vector2::new(s.vx.unwrap_or(0.0), s.vy.unwrap_or(0.0))
            };
            RelativeState::new(r.t, Vector2::new(p.x - r.x, p.y - r.y), vel(p) - vel(r))
        })
        .collect()
}

/// Pedestrian-relative-to-robot states on the common time grid of the trial.
pub fn relative_series(
    trial: &TrialRecord,
    params: &KinematicParams,
) -> Result<Vec<RelativeState>, KinematicsError> {
    params.validate()?;
    Ok(relative_from(&align(trial, params)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinDistance {
    pub distance: f64,
    pub t: f64,
    pub index: usize,
}

/// Smallest sampled separation; ties resolve to the earliest sample.
pub fn min_distance(rel: &[RelativeState]) -> Result<MinDistance, KinematicsError> {
    rel.iter()
        .enumerate()
        .fold(None::<MinDistance>, |best, (index, s)| match best {
            Some(b) if b.distance <= s.dist => Some(b),
            _ => Some(MinDistance {
                distance: s.dist,
                t: s.t,
                index,
            }),
        })
        .ok_or(KinematicsError::EmptySeries)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PttcStatus {
    Approaching,
    NonApproaching,
    /// Separation below the collision threshold; PTTC is reported as 0.
    Collision,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PttcEntry {
    pub t: f64,
    /// Seconds; `f64::INFINITY` when not approaching.
    pub pttc: f64,
    pub status: PttcStatus,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PttcSeries {
    pub entries: Vec<PttcEntry>,
}

impl PttcSeries {
    pub fn has_collision(&self) -> bool {
        self.entries
            .iter()
            .any(|e| e.status == PttcStatus::Collision)
    }
}

/// Projected time-to-collision of one relative state: separation divided by
/// the radial closing speed, infinite when the agents are not closing.
pub fn pttc_at(state: &RelativeState, params: &KinematicParams) -> PttcEntry {
    let t = state.t;
    if state.dist < params.collision_distance {
        return PttcEntry {
            t,
            pttc: 0.0,
            status: PttcStatus::Collision,
        };
    }
    let closing = -state.p_rel.dot(&state.v_rel) / state.dist;
    if closing > params.closing_speed_epsilon {
        PttcEntry {
            t,
            pttc: state.dist / closing,
            status: PttcStatus::Approaching,
        }
    } else {
        PttcEntry {
            t,
            pttc: f64::INFINITY,
            status: PttcStatus::NonApproaching,
        }
    }
}

pub fn pttc_series(
    rel: &[RelativeState],
    params: &KinematicParams,
) -> Result<PttcSeries, KinematicsError> {
    if rel.is_empty() {
        return Err(KinematicsError::EmptySeries);
    }
    Ok(PttcSeries {
        entries: rel.iter().map(|s| pttc_at(s, params)).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinPttc {
    /// Minimum PTTC, seconds.
    pub t_p: f64,
    /// Separation at the sample where the minimum occurs, meters.
    pub d_tp: f64,
    pub t: f64,
    pub index: usize,
}

/// Minimum finite PTTC and the separation at that same sample.
pub fn min_pttc_and_distance(
    rel: &[RelativeState],
    series: &PttcSeries,
) -> Result<MinPttc, KinematicsError> {
    if rel.len() != series.entries.len() {
        return Err(KinematicsError::InvalidParameter(format!(
            "relative series has {} samples but PTTC series has {}",
            rel.len(),
            series.entries.len()
        )));
    }
    let mut best: Option<(usize, f64)> = None;
    for (i, e) in series.entries.iter().enumerate() {
        if e.pttc.is_finite() && best.is_none_or(|(_, b)| e.pttc < b) {
            best = Some((i, e.pttc));
        }
    }
    let (index, t_p) = best.ok_or(KinematicsError::NeverApproaching)?;
    Ok(MinPttc {
        t_p,
        d_tp: rel[index].dist,
        t: rel[index].t,
        index,
    })
}
