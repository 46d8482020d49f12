//! Synthetic hallway encounters with known ground truth.
//!
//! The robot drives along +x and the pedestrian walks along -x on a line
//! offset by `lateral_offset`. Both reach x = 0 at the meeting time `t_m`.
//! An optional swerve replaces part of the robot's straight path with three
//! circular arcs of radius `R` (turn by `θ`, back by `2θ`, return by `θ`),
//! bulging away from the pedestrian with peak height `2R(1 - cos θ)` at the
//! meeting point.
//!
//! Ground truth is computed from the exact continuous motion; Gaussian
//! position noise is added afterwards.

use std::collections::BTreeMap;

use nalgebra::Vector2;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::encounter::{
    EncounterDataset, EncounterError, SpeedGroup, Trajectory, TrajectorySample, TrialRecord,
    TRIALS_PER_PARTICIPANT,
};
use crate::kinematics::KinematicFeatures;
use crate::predictors::{composite_score, PredictorConfig};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid scenario: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Encounter(#[from] EncounterError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Meters.
    pub hallway_width: f64,
    /// m/s.
    pub robot_speed: f64,
    /// m/s.
    pub ped_speed: f64,
    /// Initial separation along the hallway, meters.
    pub approach_length: f64,
    /// Signed y coordinate of the pedestrian's lane, meters.
    pub lateral_offset: f64,
    /// Swerve arc radius in meters; 0 (or non-finite) means no swerve.
    pub avoidance_radius: f64,
    /// Turning angle of the first swerve arc, radians.
    pub swerve_angle: f64,
    /// Standard deviation of Gaussian position noise, meters.
    pub noise_sigma: f64,
    /// Sampling step, seconds.
    pub dt: f64,
    /// Total duration in seconds; defaults to twice the meeting time.
    pub duration: Option<f64>,
    /// Also write velocity and heading columns (noise-free).
    pub record_velocity: bool,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            hallway_width: 3.2,
            robot_speed: 1.4,
            ped_speed: 1.4,
            approach_length: 10.0,
            lateral_offset: 0.9,
            avoidance_radius: 0.0,
            swerve_angle: std::f64::consts::FRAC_PI_6,
            noise_sigma: 0.0,
            dt: 0.05,
            duration: None,
            record_velocity: false,
            seed: 0,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::InvalidConfig(m));
        for (name, v) in [
            ("robot_speed", self.robot_speed),
            ("ped_speed", self.ped_speed),
            ("noise_sigma", self.noise_sigma),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} must be finite and non-negative, got {v}"));
            }
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.hallway_width.is_finite() && self.hallway_width > 0.0) {
            return bad(format!(
                "hallway_width must be positive, got {}",
                self.hallway_width
            ));
        }
        if self
            .lateral_offset
            .abs()
            .partial_cmp(&(self.hallway_width / 2.0))
            != Some(std::cmp::Ordering::Less)
        {
            return bad(format!(
                "|lateral_offset| = {} must be below half the hallway width",
                self.lateral_offset.abs()
            ));
        }
        if !(self.approach_length.is_finite() && self.approach_length > 0.0) {
            return bad(format!(
                "approach_length must be positive, got {}",
                self.approach_length
            ));
        }
        if self.robot_speed + self.ped_speed <= 0.0 {
            return bad("robot and pedestrian cannot both stand still".to_string());
        }
        if self.has_swerve() {
            if self.avoidance_radius < 0.0 {
                return bad(format!(
                    "avoidance_radius must be non-negative, got {}",
                    self.avoidance_radius
                ));
            }
            if !(self.swerve_angle > 0.0 && self.swerve_angle < std::f64::consts::FRAC_PI_2) {
                return bad(format!(
                    "swerve_angle must lie in (0, pi/2), got {}",
                    self.swerve_angle
                ));
            }
            if self.robot_speed <= 0.0 {
                return bad("a swerve needs a moving robot".to_string());
            }
        }
        if let Some(d) = self.duration {
            if !(d.is_finite() && d > 0.0) {
                return bad(format!("duration must be positive, got {d}"));
            }
        }
        Ok(())
    }

    pub fn has_swerve(&self) -> bool {
        self.avoidance_radius.is_finite() && self.avoidance_radius != 0.0
    }

    /// Meeting time, rounded to the sampling grid.
    pub fn meeting_time(&self) -> f64 {
        let t = self.approach_length / (self.robot_speed + self.ped_speed);
        (t / self.dt).round() * self.dt
    }

    pub fn total_duration(&self) -> f64 {
        self.duration.unwrap_or(2.0 * self.meeting_time())
    }

    /// Side the swerve bulges towards: away from the pedestrian lane.
    fn swerve_sign(&self) -> f64 {
        if self.lateral_offset >= 0.0 {
            -1.0
        } else {
            1.0
        }
    }

    /// Exact robot position and velocity at time `t`.
    pub fn robot_state(&self, t: f64) -> (Vector2<f64>, Vector2<f64>) {
        let vr = self.robot_speed;
        let s = vr * (t - self.meeting_time());
        if !self.has_swerve() {
            return (Vector2::new(s, 0.0), Vector2::new(vr, 0.0));
        }
        let r = self.avoidance_radius;
        let theta = self.swerve_angle;
        let k = self.swerve_sign() / r;
        let half_arc = 2.0 * r * theta;
        let half_x = 2.0 * r * theta.sin();
        if s <= -half_arc {
            return (
                Vector2::new(s + half_arc - half_x, 0.0),
                Vector2::new(vr, 0.0),
            );
        }
        if s >= half_arc {
            return (
                Vector2::new(s - half_arc + half_x, 0.0),
                Vector2::new(vr, 0.0),
            );
        }
        // Constant-curvature segments: (length, signed curvature).
        let segments = [(r * theta, k), (2.0 * r * theta, -k), (r * theta, k)];
        let mut p = Vector2::new(-half_x, 0.0);
        let mut heading = 0.0_f64;
        let mut remaining = s + half_arc;
        for (len, kappa) in segments {
            let u = remaining.min(len);
            let h1 = heading + kappa * u;
            p += Vector2::new(
                (h1.sin() - heading.sin()) / kappa,
                (heading.cos() - h1.cos()) / kappa,
            );
            heading = h1;
            remaining -= u;
            if remaining <= 0.0 {
                break;
            }
        }
        (p, vr * Vector2::new(heading.cos(), heading.sin()))
    }

    /// Exact pedestrian position and velocity at time `t`.
    pub fn pedestrian_state(&self, t: f64) -> (Vector2<f64>, Vector2<f64>) {
        let x = -self.ped_speed * (t - self.meeting_time());
        (
            Vector2::new(x, self.lateral_offset),
            Vector2::new(-self.ped_speed, 0.0),
        )
    }

    /// Pedestrian minus robot position and velocity at time `t`.
    pub fn relative_state(&self, t: f64) -> (Vector2<f64>, Vector2<f64>) {
        let (pr, vr) = self.robot_state(t);
        let (pp, vp) = self.pedestrian_state(t);
        (pp - pr, vp - vr)
    }
}

/// Noise-free values of the six kinematic variables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub v: f64,
    pub d_min: f64,
    /// `None` if the pedestrian never passes the robot.
    pub d_lat: Option<f64>,
    pub rho: f64,
    /// `None` if the agents never approach.
    pub t_p: Option<f64>,
    pub d_tp: Option<f64>,
}

impl GroundTruth {
    /// As a feature row, for scoring with the predictors.
    pub fn to_features(&self, trial_id: &str) -> KinematicFeatures {
        let mut f = KinematicFeatures::empty(trial_id);
        f.v = Some(self.v);
        f.d_min = Some(self.d_min);
        f.d_lat = self.d_lat;
        f.rho = Some(self.rho);
        f.t_p = self.t_p;
        f.d_tp = self.d_tp;
        if self.t_p.is_none() {
            f.flags
                .insert(crate::kinematics::FeatureFlag::NeverApproaching);
        }
        f
    }
}

/// Closest approach of `p0 + t * v` for `t` in `window`: `(t*, distance)`.
pub fn closest_approach(p0: Vector2<f64>, v: Vector2<f64>, window: (f64, f64)) -> (f64, f64) {
    let vv = v.norm_squared();
    let t = if vv > 0.0 { -p0.dot(&v) / vv } else { window.0 };
    let t = t.clamp(window.0, window.1);
    (t, (p0 + v * t).norm())
}

/// PTTC of a relative state; `None` when not closing.
fn pttc(p: Vector2<f64>, v: Vector2<f64>) -> Option<f64> {
    let d2 = p.norm_squared();
    if d2.sqrt() < 1e-6 {
        return Some(0.0);
    }
    let closing = -p.dot(&v) / d2.sqrt();
    (closing > 1e-6).then(|| d2.sqrt() / closing)
}

/// Minimum PTTC and the distance at that instant, scanning `state` on a grid
/// of step `step` over `window`.
pub fn min_pttc_on_grid<F>(state: F, window: (f64, f64), step: f64) -> Option<(f64, f64)>
where
    F: Fn(f64) -> (Vector2<f64>, Vector2<f64>),
{
    let n = ((window.1 - window.0) / step + 1e-9).floor() as usize;
    let mut best: Option<(f64, f64)> = None;
    for i in 0..=n {
        let (p, v) = state(window.0 + i as f64 * step);
        if let Some(tp) = pttc(p, v) {
            if best.is_none_or(|(b, _)| tp < b) {
                best = Some((tp, p.norm()));
            }
        }
    }
    best
}

/// Minimum PTTC of constant-velocity relative motion from `p0`.
pub fn constant_velocity_min_pttc(
    p0: Vector2<f64>,
    v: Vector2<f64>,
    window: (f64, f64),
    step: f64,
) -> Option<(f64, f64)> {
    min_pttc_on_grid(|t| (p0 + v * t, v), window, step)
}

fn fine_step(config: &ScenarioConfig) -> f64 {
    config.dt / 100.0
}

/// Minimum robot-pedestrian distance over the scenario.
pub fn analytic_min_distance(config: &ScenarioConfig) -> Result<f64, SynthError> {
    config.validate()?;
    let window = (0.0, config.total_duration());
    if !config.has_swerve() {
        let (p0, v) = config.relative_state(0.0);
        return Ok(closest_approach(p0, v, window).1);
    }
    let step = fine_step(config);
    let n = (window.1 / step).round() as usize;
    Ok((0..=n)
        .map(|i| config.relative_state(i as f64 * step).0.norm())
        .fold(f64::INFINITY, f64::min))
}

/// `(t_p, d_tp)` of the scenario, or `None` if the agents never approach.
pub fn analytic_min_pttc(config: &ScenarioConfig) -> Result<Option<(f64, f64)>, SynthError> {
    config.validate()?;
    Ok(min_pttc_on_grid(
        |t| config.relative_state(t),
        (0.0, config.total_duration()),
        fine_step(config),
    ))
}

/// Lateral separation where the pedestrian first crosses from ahead of the
/// robot to behind it.
fn analytic_lateral(config: &ScenarioConfig) -> Option<f64> {
    let step = fine_step(config);
    let n = (config.total_duration() / step).round() as usize;
    let frame = |t: f64| {
        let (p, _) = config.relative_state(t);
        let (_, v) = config.robot_state(t);
        let (sin, cos) = if v.norm() > 0.0 {
            (v.y / v.norm(), v.x / v.norm())
        } else {
            (0.0, 1.0)
        };
        (p.x * cos + p.y * sin, -p.x * sin + p.y * cos)
    };
    let mut prev = frame(0.0);
    for i in 1..=n {
        let cur = frame(i as f64 * step);
        if prev.0 > 0.0 && cur.0 <= 0.0 {
            let w = prev.0 / (prev.0 - cur.0);
            return Some((prev.1 + w * (cur.1 - prev.1)).abs());
        }
        prev = cur;
    }
    None
}

pub fn ground_truth(config: &ScenarioConfig) -> Result<GroundTruth, SynthError> {
    config.validate()?;
    let o = config.lateral_offset.abs();
    let c = config.robot_speed + config.ped_speed;
    let straight = !config.has_swerve();
    // Head-on on parallel lanes: PTTC(τ) = |τ| + o²/(c²|τ|), minimal at |τ| = o/c.
    let closed_form_pttc = straight && config.meeting_time() >= o / c;
    let (t_p, d_tp) = if closed_form_pttc {
        (Some(2.0 * o / c), Some(o * std::f64::consts::SQRT_2))
    } else {
        match analytic_min_pttc(config)? {
            Some((t, d)) => (Some(t), Some(d)),
            None => (None, None),
        }
    };
    Ok(GroundTruth {
        v: config.robot_speed,
        d_min: analytic_min_distance(config)?,
        d_lat: if straight && config.robot_speed > 0.0 {
            Some(o)
        } else {
            analytic_lateral(config)
        },
        rho: if straight {
            0.0
        } else {
            1.0 / config.avoidance_radius
        },
        t_p,
        d_tp,
    })
}

/// A generated encounter: both tracks plus their noise-free ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticEncounter {
    pub robot: Trajectory,
    pub pedestrian: Trajectory,
    pub speed_group: SpeedGroup,
    pub ground_truth: GroundTruth,
}

impl SyntheticEncounter {
    pub fn into_trial(
        self,
        trial_id: impl Into<String>,
        participant_id: impl Into<String>,
        trial_index: u8,
        reported_comfort: u8,
    ) -> TrialRecord {
        TrialRecord {
            trial_id: trial_id.into(),
            participant_id: participant_id.into(),
            trial_index,
            speed_group: self.speed_group,
            robot: self.robot,
            pedestrian: self.pedestrian,
            reported_comfort,
            lateral_valid: true,
        }
    }
}

/// Samples the scenario on its `dt` grid and adds seeded position noise.
pub fn generate_encounter(config: &ScenarioConfig) -> Result<SyntheticEncounter, SynthError> {
    let ground_truth = ground_truth(config)?;
    let n = (config.total_duration() / config.dt + 1e-9).floor() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let noise = Normal::new(0.0, config.noise_sigma)
        .map_err(|e| SynthError::InvalidConfig(e.to_string()))?;
    let mut sample = |t: f64, (p, v): (Vector2<f64>, Vector2<f64>)| {
        let (dx, dy) = if config.noise_sigma > 0.0 {
            (noise.sample(&mut rng), noise.sample(&mut rng))
        } else {
            (0.0, 0.0)
        };
        let s = TrajectorySample::new(t, p.x + dx, p.y + dy);
        if config.record_velocity {
            s.with_velocity(v.x, v.y).with_heading(v.y.atan2(v.x))
        } else {
            s
        }
    };
    let mut robot = Vec::with_capacity(n + 1);
    let mut pedestrian = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let t = i as f64 * config.dt;
        robot.push(sample(t, config.robot_state(t)));
        pedestrian.push(sample(t, config.pedestrian_state(t)));
    }
    Ok(SyntheticEncounter {
        robot: Trajectory::new(robot),
        pedestrian: Trajectory::new(pedestrian),
        speed_group: SpeedGroup::nearest(config.robot_speed),
        ground_truth,
    })
}

/// Grid of scenarios: every combination of the listed values applied to `base`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSweep {
    pub base: ScenarioConfig,
    pub robot_speeds: Vec<f64>,
    pub lateral_offsets: Vec<f64>,
    /// 0 means no swerve.
    pub avoidance_radii: Vec<f64>,
}

impl Default for ScenarioSweep {
    fn default() -> Self {
        Self {
            base: ScenarioConfig::default(),
            robot_speeds: vec![1.4, 2.8],
            lateral_offsets: vec![0.5, 0.9, 1.5],
            avoidance_radii: vec![0.0, 2.5, 1.25],
        }
    }
}

impl ScenarioSweep {
    /// All scenarios, speeds varying slowest and radii fastest.
    pub fn scenarios(&self) -> Vec<ScenarioConfig> {
        let one = |v: &[f64], d: f64| if v.is_empty() { vec![d] } else { v.to_vec() };
        let mut out = Vec::new();
        for &robot_speed in &one(&self.robot_speeds, self.base.robot_speed) {
            for &lateral_offset in &one(&self.lateral_offsets, self.base.lateral_offset) {
                for &avoidance_radius in &one(&self.avoidance_radii, self.base.avoidance_radius) {
                    out.push(ScenarioConfig {
                        robot_speed,
                        lateral_offset,
                        avoidance_radius,
                        ..self.base.clone()
                    });
                }
            }
        }
        out
    }
}

/// Logistic label rule: `P(comfortable) = 1 / (1 + exp(-(E - 3.5)))`.
pub fn comfortable_probability(score: u32) -> f64 {
    1.0 / (1.0 + (-(f64::from(score) - 3.5)).exp())
}

/// Generates `n_trials` encounters cycling through the sweep's scenarios.
///
/// Trial `i` draws its noise seed and label from stream `i` of a generator
/// seeded with `seed`. Comfort labels follow [`comfortable_probability`] of
/// the composite score of the ground truth (4 or 5 when comfortable, 1 to 3
/// otherwise) and are tagged `synthetic-label` in the provenance.
pub fn generate_dataset(
    sweep: &ScenarioSweep,
    n_trials: usize,
    seed: u64,
) -> Result<(EncounterDataset, Vec<GroundTruth>), SynthError> {
    let scenarios = sweep.scenarios();
    for s in &scenarios {
        s.validate()?;
    }
    let predictors = PredictorConfig::default();
    let mut trials = Vec::with_capacity(n_trials);
    let mut truths = Vec::with_capacity(n_trials);
    for i in 0..n_trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let config = ScenarioConfig {
            seed: rng.next_u64(),
            ..scenarios[i % scenarios.len()].clone()
        };
        let enc = generate_encounter(&config)?;
        let per = usize::from(TRIALS_PER_PARTICIPANT);
        let participant = format!("P{:03}", i / per + 1);
        let index = (i % per + 1) as u8;
        let trial_id = format!("{participant}-T{index}");
        let score = composite_score(&enc.ground_truth.to_features(&trial_id), &predictors).score;
        let comfortable = rng.random::<f64>() < comfortable_probability(score);
        let comfort = if comfortable {
            rng.random_range(4..=5)
        } else {
            rng.random_range(1..=3)
        };
        truths.push(enc.ground_truth);
        trials.push(enc.into_trial(trial_id, participant, index, comfort));
    }
    let provenance = BTreeMap::from([
        ("generator".to_string(), "synthgen".to_string()),
        ("labels".to_string(), "synthetic-label".to_string()),
        (
            "label_rule".to_string(),
            "P(S>=4) = 1/(1+exp(-(E-3.5))) on the ground-truth composite score".to_string(),
        ),
        ("seed".to_string(), seed.to_string()),
        ("n_trials".to_string(), n_trials.to_string()),
    ]);
    Ok((EncounterDataset::new(trials, provenance)?, truths))
}
