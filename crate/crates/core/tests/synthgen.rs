use pedcomfort::encounter::{load_dataset, write_dataset, DatasetFormat};
use pedcomfort::kinematics::{extract_features, KinematicParams};
use pedcomfort::synthgen::{generate_dataset, generate_encounter, ScenarioConfig, ScenarioSweep};

/// Allowed error per feature: a relative bound with an absolute floor of one
/// grid step in time (or the distance closed in one step).
fn tolerance(relative: f64, truth: f64, floor: f64) -> f64 {
    (relative * truth.abs()).max(floor)
}

#[test]
fn noise_free_sweep_matches_ground_truth() {
    let dt = 0.01;
    let params = KinematicParams {
        dt,
        ..KinematicParams::default()
    };
    for robot_speed in [1.4, 2.8] {
        for lateral_offset in [0.0, 0.5, 0.9, 1.5] {
            for avoidance_radius in [0.0, 2.5, 1.25, 0.8] {
                let config = ScenarioConfig {
                    robot_speed,
                    lateral_offset,
                    avoidance_radius,
                    dt,
                    ..ScenarioConfig::default()
                };
                let enc = generate_encounter(&config).unwrap();
                let gt = enc.ground_truth;
                let f = extract_features(&enc.into_trial("t", "p", 1, 3), &params).unwrap();
                let closing = robot_speed + config.ped_speed;
                let checks = [
                    ("v", f.v, Some(gt.v), 0.02, 1e-9),
                    ("d_min", f.d_min, Some(gt.d_min), 0.02, closing * dt),
                    ("d_lat", f.d_lat, gt.d_lat, 0.02, closing * dt),
                    ("rho", f.rho, Some(gt.rho), 0.05, 1e-3),
                    ("t_p", f.t_p, gt.t_p, 0.05, dt),
                    ("d_tp", f.d_tp, gt.d_tp, 0.05, closing * dt),
                ];
                for (name, got, want, rel, floor) in checks {
                    let (got, want) = (got.unwrap(), want.unwrap());
                    assert!(
                        (got - want).abs() <= tolerance(rel, want, floor),
                        "{name} {config:?}: {got} vs {want}"
                    );
                }
            }
        }
    }
}

#[test]
fn swerve_of_radius_one_point_two_five_gives_curvature_point_eight() {
    let config = ScenarioConfig {
        avoidance_radius: 1.25,
        ..ScenarioConfig::default()
    };
    let enc = generate_encounter(&config).unwrap();
    let f = extract_features(&enc.into_trial("t", "p", 1, 3), &KinematicParams::default()).unwrap();
    assert!((f.rho.unwrap() - 0.8).abs() <= 0.05 * 0.8, "{:?}", f.rho);
}

#[test]
fn generated_dataset_round_trips_through_both_formats() {
    let (ds, _) = generate_dataset(&ScenarioSweep::default(), 7, 5).unwrap();
    for format in [DatasetFormat::TrialsDir, DatasetFormat::TrialsCsv] {
        let dir = tempfile::tempdir().unwrap();
        write_dataset(&ds, dir.path(), format).unwrap();
        assert_eq!(load_dataset(dir.path(), format).unwrap(), ds);
    }
}

#[test]
fn generated_datasets_are_seed_deterministic() {
    let sweep = ScenarioSweep {
        base: ScenarioConfig {
            noise_sigma: 0.02,
            ..ScenarioConfig::default()
        },
        ..ScenarioSweep::default()
    };
    let (a, _) = generate_dataset(&sweep, 5, 9).unwrap();
    let (b, _) = generate_dataset(&sweep, 5, 9).unwrap();
    let (c, _) = generate_dataset(&sweep, 5, 10).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}
