use nalgebra::Vector2;
use pedcomfort::encounter::{Trajectory, TrajectorySample, TrialRecord};
use pedcomfort::kinematics::{
    extract_features, max_curvature, mean_speed, min_distance, min_pttc_and_distance, pttc_at,
    pttc_series, relative_series, resample_and_derive, FeatureFlag, KinematicFeatures,
    KinematicParams, PttcStatus, RelativeState,
};
use pedcomfort::synthgen::{generate_encounter, ScenarioConfig};
use proptest::prelude::*;

fn scenario(offset: f64, radius: f64) -> ScenarioConfig {
    ScenarioConfig {
        lateral_offset: offset,
        avoidance_radius: radius,
        ..ScenarioConfig::default()
    }
}

fn trial(config: &ScenarioConfig) -> TrialRecord {
    generate_encounter(config)
        .unwrap()
        .into_trial("t", "p", 1, 3)
}

fn values(f: &KinematicFeatures) -> [Option<f64>; 6] {
    [f.v, f.d_min, f.d_lat, f.rho, f.t_p, f.d_tp]
}

fn assert_same(a: &KinematicFeatures, b: &KinematicFeatures, rel: f64) {
    for (x, y) in values(a).into_iter().zip(values(b)) {
        match (x, y) {
            (Some(x), Some(y)) => assert!(
                (x - y).abs() <= rel * x.abs().max(y.abs()).max(1.0),
                "{x} vs {y}"
            ),
            (x, y) => assert_eq!(x, y),
        }
    }
    assert_eq!(a.flags, b.flags);
}

fn map_trajectory(
    traj: &Trajectory,
    f: impl Fn(&TrajectorySample) -> TrajectorySample,
) -> Trajectory {
    Trajectory::new(traj.samples.iter().map(f).collect())
}

fn rigid(traj: &Trajectory, angle: f64, shift: Vector2<f64>) -> Trajectory {
    let (s, c) = angle.sin_cos();
    map_trajectory(traj, |p| {
        let mut q = TrajectorySample::new(
            p.t,
            c * p.x - s * p.y + shift.x,
            s * p.x + c * p.y + shift.y,
        );
        if let Some((vx, vy)) = p.velocity() {
            q = q.with_velocity(c * vx - s * vy, s * vx + c * vy);
        }
        if let Some(h) = p.heading {
            q = q.with_heading(h + angle);
        }
        q
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn features_are_invariant_to_rigid_motion(
        angle in -3.1..3.1f64,
        dx in -50.0..50.0f64,
        dy in -50.0..50.0f64,
        offset in -1.5..1.5f64,
        radius in prop::sample::select(vec![0.0, 2.5, 1.25, 0.8]),
        record in any::<bool>(),
    ) {
        let config = ScenarioConfig { record_velocity: record, ..scenario(offset, radius) };
        let t = trial(&config);
        let moved = TrialRecord {
            robot: rigid(&t.robot, angle, Vector2::new(dx, dy)),
            pedestrian: rigid(&t.pedestrian, angle, Vector2::new(dx, dy)),
            ..t.clone()
        };
        let params = KinematicParams::default();
        assert_same(&extract_features(&t, &params).unwrap(), &extract_features(&moved, &params).unwrap(), 1e-6);
    }

    #[test]
    fn features_are_invariant_to_time_shift(shift in -100.0..100.0f64, offset in -1.5..1.5f64) {
        let t = trial(&scenario(offset, 1.25));
        let shifted = |traj: &Trajectory| map_trajectory(traj, |p| TrajectorySample { t: p.t + shift, ..*p });
        let moved = TrialRecord { robot: shifted(&t.robot), pedestrian: shifted(&t.pedestrian), ..t.clone() };
        let params = KinematicParams::default();
        assert_same(&extract_features(&t, &params).unwrap(), &extract_features(&moved, &params).unwrap(), 1e-6);
    }

    #[test]
    fn finite_pttc_is_positive(px in -20.0..20.0f64, py in -20.0..20.0f64, vx in -5.0..5.0f64, vy in -5.0..5.0f64) {
        let s = RelativeState::new(0.0, Vector2::new(px, py), Vector2::new(vx, vy));
        let e = pttc_at(&s, &KinematicParams::default());
        match e.status {
            PttcStatus::Approaching => prop_assert!(e.pttc > 0.0 && e.pttc.is_finite()),
            PttcStatus::NonApproaching => prop_assert!(e.pttc.is_infinite()),
            PttcStatus::Collision => prop_assert_eq!(e.pttc, 0.0),
        }
    }

    #[test]
    fn anti_parallel_pttc_is_distance_over_speed(px in -20.0..20.0f64, py in -20.0..20.0f64, k in 0.1..5.0f64) {
        let p = Vector2::new(px, py);
        prop_assume!(p.norm() > 1e-3);
        let v = -k * p.normalize();
        let e = pttc_at(&RelativeState::new(0.0, p, v), &KinematicParams::default());
        prop_assert!((e.pttc - p.norm() / k).abs() <= 1e-9 * (p.norm() / k));
    }
}

#[test]
fn offset_pass_pttc_matches_radial_closure_oracle() {
    let p = Vector2::new(10.0, 1.0);
    let v = Vector2::new(-2.0, 0.0);
    let e = pttc_at(&RelativeState::new(0.0, p, v), &KinematicParams::default());
    assert!((e.pttc - 5.05).abs() < 1e-12);
    // Advance the distance at the current radial closing speed until it reaches zero.
    let closing = -p.dot(&v) / p.norm();
    let step = 1e-4;
    let mut k = 0u32;
    while p.norm() - closing * f64::from(k) * step > 0.0 {
        k += 1;
    }
    let t = f64::from(k) * step;
    assert!((e.pttc - t).abs() <= 2.0 * step, "{} vs {t}", e.pttc);
}

#[test]
fn min_distance_and_d_tp_are_index_consistent() {
    for offset in [0.3, 0.9, -1.2] {
        let t = trial(&scenario(offset, 1.25));
        let params = KinematicParams::default();
        let rel = relative_series(&t, &params).unwrap();
        let m = min_distance(&rel).unwrap();
        assert!(rel.iter().all(|s| m.distance <= s.dist));
        let brute = rel.iter().map(|s| s.dist).fold(f64::INFINITY, f64::min);
        assert_eq!(m.distance, brute);
        for s in &rel {
            assert!((s.dist - s.p_rel.norm()).abs() < 1e-9);
        }
        let series = pttc_series(&rel, &params).unwrap();
        let mp = min_pttc_and_distance(&rel, &series).unwrap();
        assert_eq!(mp.d_tp, rel[mp.index].dist);
        let f = extract_features(&t, &params).unwrap();
        assert_eq!(
            (f.t_p, f.d_tp, f.d_min),
            (Some(mp.t_p), Some(mp.d_tp), Some(m.distance))
        );
    }
}

#[test]
fn circle_curvature_improves_with_finer_sampling() {
    let radius = 2.0;
    let errors: Vec<f64> = [0.1, 0.05, 0.025]
        .into_iter()
        .map(|dt| {
            let n = (20.0 / dt) as usize;
            let traj = Trajectory::new(
                (0..=n)
                    .map(|i| {
                        let t = i as f64 * dt;
                        TrajectorySample::new(
                            t,
                            radius * (t / radius).cos(),
                            radius * (t / radius).sin(),
                        )
                    })
                    .collect(),
            );
            let params = KinematicParams {
                dt,
                ..KinematicParams::default()
            };
            let r = resample_and_derive(&traj, dt, params.smoothing_window).unwrap();
            let inner = Trajectory::new(r.samples[2..r.samples.len() - 2].to_vec());
            (max_curvature(&inner, params.v_floor).unwrap() - 1.0 / radius).abs()
        })
        .collect();
    assert!(errors[0] < 0.01 * 0.5, "{errors:?}");
    assert!(errors[1] < errors[0] && errors[2] < errors[1], "{errors:?}");
}

#[test]
fn noisy_straight_line_speed_within_five_percent() {
    let config = ScenarioConfig {
        noise_sigma: 0.01,
        seed: 11,
        ..scenario(0.9, 0.0)
    };
    let t = trial(&config);
    let params = KinematicParams::default();
    let r = resample_and_derive(&t.robot, params.dt, params.smoothing_window).unwrap();
    let s = mean_speed(&r, params.speed_group_tolerance).unwrap();
    assert!((s.mean - 1.4).abs() < 0.05 * 1.4, "{}", s.mean);
}

#[test]
fn nominal_encounter_matches_ground_truth() {
    let config = scenario(0.9, 1.25);
    let enc = generate_encounter(&config).unwrap();
    let gt = enc.ground_truth;
    let f = extract_features(&enc.into_trial("t", "p", 1, 3), &KinematicParams::default()).unwrap();
    let pairs = [
        (f.v, Some(gt.v)),
        (f.d_min, Some(gt.d_min)),
        (f.d_lat, gt.d_lat),
        (f.rho, Some(gt.rho)),
        (f.t_p, gt.t_p),
        (f.d_tp, gt.d_tp),
    ];
    for (got, want) in pairs {
        let (got, want) = (got.unwrap(), want.unwrap());
        assert!((got - want).abs() <= 0.05 * want, "{got} vs {want}");
    }
    assert!(f.flags.is_empty(), "{:?}", f.flags);
}

#[test]
fn lateral_invalid_trial_keeps_other_features() {
    let mut t = trial(&scenario(0.9, 1.25));
    t.lateral_valid = false;
    let f = extract_features(&t, &KinematicParams::default()).unwrap();
    assert_eq!(f.d_lat, None);
    assert!(f.has(FeatureFlag::LateralInvalid));
    assert!([f.v, f.d_min, f.rho, f.t_p, f.d_tp]
        .iter()
        .all(Option::is_some));
}

#[test]
fn receding_encounter_never_approaches() {
    let robot = Trajectory::new(
        (0..40)
            .map(|i| TrajectorySample::new(f64::from(i) * 0.05, f64::from(i) * 0.07, 0.0))
            .collect(),
    );
    let pedestrian = Trajectory::new(
        (0..40)
            .map(|i| TrajectorySample::new(f64::from(i) * 0.05, -1.0 - f64::from(i) * 0.07, 0.5))
            .collect(),
    );
    let t = TrialRecord {
        robot,
        pedestrian,
        ..trial(&scenario(0.9, 0.0))
    };
    let f = extract_features(&t, &KinematicParams::default()).unwrap();
    assert!(f.has(FeatureFlag::NeverApproaching));
    assert_eq!((f.t_p, f.d_tp), (None, None));
    assert_eq!(f.effective_t_p(), Some(f64::INFINITY));
}
