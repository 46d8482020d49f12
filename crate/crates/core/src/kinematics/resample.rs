use std::f64::consts::{PI, TAU};

use crate::encounter::{Trajectory, TrajectorySample};

use super::KinematicsError;

/// Resamples `traj` onto a uniform grid spanning its own time range.
///
/// Positions are linearly interpolated and then smoothed with a centred moving
/// average of `smoothing_window` samples (1 disables smoothing; the window is
/// truncated symmetrically near the ends so straight-line motion is preserved
/// exactly). Recorded velocities and headings are interpolated when every
/// source sample carries them; otherwise velocities are derived from the
/// smoothed positions by central differences.
pub fn resample_and_derive(
    traj: &Trajectory,
    dt: f64,
    smoothing_window: usize,
) -> Result<Trajectory, KinematicsError> {
    let (start, end) = match (traj.start_time(), traj.end_time()) {
        (Some(s), Some(e)) if traj.len() >= 2 => (s, e),
        _ => {
            return Err(KinematicsError::TooFewSamples {
                needed: 2,
                got: traj.len(),
            })
        }
    };
    resample_between(traj, start, end, dt, smoothing_window)
}

/// Same as [`resample_and_derive`] on the grid `start + k * dt` up to `end`.
pub(crate) fn resample_between(
    traj: &Trajectory,
    start: f64,
    end: f64,
    dt: f64,
    smoothing_window: usize,
) -> Result<Trajectory, KinematicsError> {
    if traj.len() < 2 {
        return Err(KinematicsError::TooFewSamples {
            needed: 2,
            got: traj.len(),
        });
    }
    check_grid(dt, smoothing_window)?;
    let n = grid_len(start, end, dt);
    let src = &traj.samples;
    let with_velocity = traj.has_velocity();
    let with_heading = traj.has_heading();

    let mut out: Vec<TrajectorySample> = Vec::with_capacity(n);
    let mut slopes = Vec::with_capacity(n);
    for k in 0..n {
        let t = start + k as f64 * dt;
        let (a, b, w) = locate(src, t);
        let (sa, sb) = (&src[a], &src[b]);
        let lerp = |p: f64, q: f64| {
            if w == 0.0 {
                p
            } else if w == 1.0 {
                q
            } else {
                p + w * (q - p)
            }
        };
        let mut s = TrajectorySample::new(t, lerp(sa.x, sb.x), lerp(sa.y, sb.y));
        if with_velocity {
            s.vx = Some(lerp(sa.vx.unwrap(), sb.vx.unwrap()));
            s.vy = Some(lerp(sa.vy.unwrap(), sb.vy.unwrap()));
        }
        if with_heading {
            let ha = sa.heading.unwrap();
            let dh = wrap_angle(sb.heading.unwrap() - ha);
            s.heading = Some(if w == 0.0 { ha } else { ha + w * dh });
        }
        let span = sb.t - sa.t;
        slopes.push(((sb.x - sa.x) / span, (sb.y - sa.y) / span));
        out.push(s);
    }

    smooth_positions(&mut out, smoothing_window);

    if !with_velocity {
        if out.len() == 1 {
            let (vx, vy) = slopes[0];
            out[0].vx = Some(vx);
            out[0].vy = Some(vy);
        } else {
            let derived: Vec<(f64, f64)> = (0..out.len())
                .map(|i| {
                    let (a, b) = if i == 0 {
                        (0, 1)
                    } else if i + 1 == out.len() {
                        (i - 1, i)
                    } else {
                        (i - 1, i + 1)
                    };
                    let span = out[b].t - out[a].t;
                    ((out[b].x - out[a].x) / span, (out[b].y - out[a].y) / span)
                })
                .collect();
            for (s, (vx, vy)) in out.iter_mut().zip(derived) {
                s.vx = Some(vx);
                s.vy = Some(vy);
            }
        }
    }

    Ok(Trajectory {
        samples: out,
        frame_id: traj.frame_id.clone(),
    })
}

pub(crate) fn check_grid(dt: f64, smoothing_window: usize) -> Result<(), KinematicsError> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(KinematicsError::InvalidParameter(format!(
            "dt must be positive, got {dt}"
        )));
    }
    if smoothing_window == 0 || smoothing_window.is_multiple_of(2) {
        return Err(KinematicsError::InvalidParameter(format!(
            "smoothing window must be a positive odd number, got {smoothing_window}"
        )));
    }
    Ok(())
}

fn grid_len(start: f64, end: f64, dt: f64) -> usize {
    let steps = ((end - start) / dt + 1e-9).floor();
    if steps < 0.0 {
        1
    } else {
        steps as usize + 1
    }
}

/// Segment `(a, b)` of `src` bracketing `t` and the interpolation weight.
/// Weights within 1e-9 of a knot snap to it so on-grid samples are reproduced exactly.
fn locate(src: &[TrajectorySample], t: f64) -> (usize, usize, f64) {
    let j = src.partition_point(|s| s.t <= t).clamp(1, src.len() - 1);
    let (a, b) = (j - 1, j);
    let w = ((t - src[a].t) / (src[b].t - src[a].t)).clamp(0.0, 1.0);
    let w = if w < 1e-9 {
        0.0
    } else if w > 1.0 - 1e-9 {
        1.0
    } else {
        w
    };
    (a, b, w)
}

fn smooth_positions(samples: &mut [TrajectorySample], window: usize) {
    let half = window / 2;
    if half == 0 || samples.len() < 3 {
        return;
    }
    let xs: Vec<f64> = samples.iter().map(|s| s.x).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.y).collect();
    let n = samples.len();
    for (i, s) in samples.iter_mut().enumerate() {
        let h = half.min(i).min(n - 1 - i);
        let range = i - h..=i + h;
        let count = (2 * h + 1) as f64;
        s.x = xs[range.clone()].iter().sum::<f64>() / count;
        s.y = ys[range].iter().sum::<f64>() / count;
    }
}

pub(crate) fn wrap_angle(a: f64) -> f64 {
    (a + PI).rem_euclid(TAU) - PI
}
