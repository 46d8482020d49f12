use serde::{Deserialize, Serialize};

use crate::encounter::{SpeedGroup, Trajectory, TrialRecord};

use super::relative::{align, relative_from, RelativeState};
use super::{KinematicParams, KinematicsError};

/// Robot heading per sample: recorded heading if present, otherwise the
/// velocity direction while moving faster than `v_floor`. Slow samples hold
/// the nearest earlier valid heading (or the first valid one at the start).
pub(crate) fn headings(robot: &Trajectory, v_floor: f64) -> Result<Vec<f64>, KinematicsError> {
    let raw: Vec<Option<f64>> = robot
        .samples
        .iter()
        .map(|s| {
            s.heading.or_else(|| {
                let (vx, vy) = s.velocity()?;
                (vx.hypot(vy) >= v_floor).then(|| vy.atan2(vx))
            })
        })
        .collect();
    let first = raw
        .iter()
        .flatten()
        .copied()
        .next()
        .ok_or(KinematicsError::HeadingUnavailable)?;
    let mut last = first;
    Ok(raw
        .into_iter()
        .map(|h| {
            if let Some(h) = h {
                last = h;
            }
            last
        })
        .collect())
}

/// Lateral separation at the first instant the pedestrian moves from ahead of
/// the robot to behind it, measured in the robot heading frame.
pub(crate) fn lateral_from_aligned(rel: &[RelativeState], headings: &[f64]) -> Option<f64> {
    let frame = |i: usize| {
        let (sin, cos) = headings[i].sin_cos();
        let p = rel[i].p_rel;
        let longitudinal = p.x * cos + p.y * sin;
        let lateral = -p.x * sin + p.y * cos;
        (longitudinal, lateral)
    };
    (0..rel.len().saturating_sub(1)).find_map(|i| {
        let (lon0, lat0) = frame(i);
        let (lon1, lat1) = frame(i + 1);
        if lon0 > 0.0 && lon1 <= 0.0 {
            let w = lon0 / (lon0 - lon1);
            Some((lat0 + w * (lat1 - lat0)).abs())
        } else {
            None
        }
    })
}

/// Perpendicular robot-pedestrian distance at the passing moment, or `None`
/// if the pedestrian never passes from ahead to behind the robot.
pub fn lateral_distance(
    trial: &TrialRecord,
    params: &KinematicParams,
) -> Result<Option<f64>, KinematicsError> {
    params.validate()?;
    let aligned = align(trial, params)?;
    let rel = relative_from(&aligned);
    let h = headings(&aligned.robot, params.v_floor)?;
    Ok(lateral_from_aligned(&rel, &h))
}

/// Maximum of `|x'y'' - y'x''| / |v|^3` over a uniformly resampled (and
/// usually smoothed) trajectory, using three-point finite differences.
/// Samples slower than `v_floor` are skipped.
pub fn max_curvature(traj: &Trajectory, v_floor: f64) -> Result<f64, KinematicsError> {
    let s = &traj.samples;
    if s.len() < 4 {
        return Err(KinematicsError::TooFewSamples {
            needed: 4,
            got: s.len(),
        });
    }
    let mut best: Option<f64> = None;
    for i in 1..s.len() - 1 {
        let (a, b, c) = (&s[i - 1], &s[i], &s[i + 1]);
        let h1 = b.t - a.t;
        let h2 = c.t - b.t;
        // Non-uniform three-point stencils; reduce to central differences when h1 == h2.
        let d1 = |pa: f64, pb: f64, pc: f64| {
            (-h2 / (h1 * (h1 + h2))) * pa
                + ((h2 - h1) / (h1 * h2)) * pb
                + (h1 / (h2 * (h1 + h2))) * pc
        };
        let d2 = |pa: f64, pb: f64, pc: f64| {
            2.0 * (pa / (h1 * (h1 + h2)) - pb / (h1 * h2) + pc / (h2 * (h1 + h2)))
        };
        let (xp, yp) = (d1(a.x, b.x, c.x), d1(a.y, b.y, c.y));
        let (xpp, ypp) = (d2(a.x, b.x, c.x), d2(a.y, b.y, c.y));
        let speed = xp.hypot(yp);
        if speed < v_floor {
            continue;
        }
        let kappa = (xp * ypp - yp * xpp).abs() / speed.powi(3);
        best = Some(best.map_or(kappa, |m| m.max(kappa)));
    }
    best.ok_or(KinematicsError::DegenerateTrajectory)
}

/// Drops `margin` samples from each end, where a truncated smoothing window
/// bends curved paths; kept whole if too few samples would remain.
pub(crate) fn trim_ends(traj: &Trajectory, margin: usize) -> Trajectory {
    let n = traj.samples.len();
    if margin == 0 || n < 2 * margin + 4 {
        return traj.clone();
    }
    Trajectory {
        samples: traj.samples[margin..n - margin].to_vec(),
        frame_id: traj.frame_id.clone(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedEstimate {
    /// Mean of per-sample speed magnitudes, m/s.
    pub mean: f64,
    pub nearest: SpeedGroup,
    /// Whether `mean` lies within the configured relative tolerance of
    /// `nearest`'s nominal speed.
    pub consistent: bool,
}

/// Mean speed of a trajectory plus its nearest speed condition.
pub fn mean_speed(traj: &Trajectory, tolerance: f64) -> Result<SpeedEstimate, KinematicsError> {
    let s = &traj.samples;
    if s.len() < 2 {
        return Err(KinematicsError::TooFewSamples {
            needed: 2,
            got: s.len(),
        });
    }
    let speed_at = |i: usize| match s[i].velocity() {
        Some((vx, vy)) => vx.hypot(vy),
        None => {
            let (a, b) = if i == 0 {
                (0, 1)
            } else if i + 1 == s.len() {
                (i - 1, i)
            } else {
                (i - 1, i + 1)
            };
            (s[b].x - s[a].x).hypot(s[b].y - s[a].y) / (s[b].t - s[a].t)
        }
    };
    let mean = (0..s.len()).map(speed_at).sum::<f64>() / s.len() as f64;
    let nearest = SpeedGroup::nearest(mean);
    let nominal = nearest.nominal_speed();
    Ok(SpeedEstimate {
        mean,
        nearest,
        consistent: (mean - nominal).abs() <= tolerance * nominal,
    })
}
