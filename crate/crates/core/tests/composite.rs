use std::collections::BTreeMap;

use pedcomfort::kinematics::KinematicFeatures;
use pedcomfort::predictors::{
    composite_score, predict_composite, predict_min_distance, predict_min_pttc, score_from_bins,
    BinLabel, PredictorConfig, Thresholds, Variable, WeightTable,
};
use proptest::prelude::*;

const TABLE: [(Variable, &[u32]); 6] = [
    (Variable::Speed, &[2, 0]),
    (Variable::MinDistance, &[0, 1, 2, 2]),
    (Variable::LateralDistance, &[0, 0, 2, 1]),
    (Variable::MaxCurvature, &[1, 0, 2, 0]),
    (Variable::MinPttc, &[0, 0, 0, 2, 2]),
    (Variable::DistanceAtMinPttc, &[0, 1, 2, 2]),
];

/// A bin of every variable whose weight is zero.
fn zero_bins() -> BTreeMap<Variable, BinLabel> {
    TABLE
        .iter()
        .map(|(v, w)| (*v, BinLabel(w.iter().position(|&x| x == 0).unwrap() as u8)))
        .collect()
}

/// Representative value inside bin `k` of the default scheme.
fn value_in_bin(var: Variable, k: usize) -> f64 {
    let edges = &PredictorConfig::default().bins.edges[&var];
    match edges.get(k + 1) {
        Some(hi) => 0.5 * (edges[k] + hi),
        None => edges[k] + 0.3,
    }
}

fn features(bins: &BTreeMap<Variable, BinLabel>) -> KinematicFeatures {
    let mut f = KinematicFeatures::empty("t");
    let v = |var: Variable| Some(value_in_bin(var, bins[&var].index()));
    f.v = v(Variable::Speed);
    f.d_min = v(Variable::MinDistance);
    f.d_lat = v(Variable::LateralDistance);
    f.rho = v(Variable::MaxCurvature);
    f.t_p = v(Variable::MinPttc);
    f.d_tp = v(Variable::DistanceAtMinPttc);
    f
}

#[test]
fn every_weight_lookup_is_reproduced() {
    let config = PredictorConfig::default();
    let mut checked = 0;
    for (var, weights) in TABLE {
        for (k, &w) in weights.iter().enumerate() {
            let mut bins = zero_bins();
            bins.insert(var, BinLabel(k as u8));
            assert_eq!(
                score_from_bins(&bins, &config.weights),
                Ok(w),
                "{var} bin {k}"
            );
            assert_eq!(
                composite_score(&features(&bins), &config).score,
                w,
                "{var} bin {k}"
            );
            checked += 1;
        }
    }
    assert_eq!(checked, 23);
}

fn all_bin_combinations() -> Vec<BTreeMap<Variable, BinLabel>> {
    let mut out = vec![BTreeMap::new()];
    for (var, weights) in TABLE {
        out = out
            .into_iter()
            .flat_map(|m| {
                (0..weights.len()).map(move |k| {
                    let mut m = m.clone();
                    m.insert(var, BinLabel(k as u8));
                    m
                })
            })
            .collect();
    }
    out
}

#[test]
fn score_range_is_zero_to_twelve() {
    let w = WeightTable::default();
    let scores: Vec<u32> = all_bin_combinations()
        .iter()
        .map(|b| score_from_bins(b, &w).unwrap())
        .collect();
    assert_eq!(scores.len(), 2 * 4 * 4 * 4 * 5 * 4);
    assert_eq!(scores.iter().min(), Some(&0));
    assert_eq!(scores.iter().max(), Some(&12));
}

#[test]
fn comfortable_composite_needs_two_contributing_variables() {
    let config = PredictorConfig::default();
    let mut few_weight_two = 0;
    for bins in all_bin_combinations() {
        let e = score_from_bins(&bins, &config.weights).unwrap();
        if predict_composite(e, &config.thresholds).value == 1 {
            let weights: Vec<u32> = bins
                .iter()
                .map(|(v, b)| config.weights.weight(*v, *b).unwrap())
                .collect();
            assert!(weights.iter().filter(|&&w| w > 0).count() >= 2, "{bins:?}");
            if weights.iter().filter(|&&w| w == 2).count() < 2 {
                few_weight_two += 1;
            }
        }
    }
    assert!(few_weight_two > 0);
}

#[test]
fn four_weight_one_bins_reach_the_threshold() {
    let mut bins = zero_bins();
    bins.insert(Variable::MinDistance, BinLabel(1));
    bins.insert(Variable::LateralDistance, BinLabel(3));
    bins.insert(Variable::MaxCurvature, BinLabel(0));
    bins.insert(Variable::DistanceAtMinPttc, BinLabel(1));
    let e = score_from_bins(&bins, &WeightTable::default()).unwrap();
    assert_eq!(e, 4);
    assert_eq!(predict_composite(e, &Thresholds::default()).value, 1);
}

fn bin_and_two_values(var: Variable) -> impl Strategy<Value = (f64, f64)> {
    let edges = PredictorConfig::default().bins.edges[&var].clone();
    (0..edges.len()).prop_flat_map(move |k| {
        let lo = edges[k];
        let hi = edges.get(k + 1).copied().unwrap_or(lo + 5.0);
        (lo..hi, lo..hi)
    })
}

proptest! {
    #[test]
    fn min_distance_prediction_is_monotone(a in 0.0..5.0f64, b in 0.0..5.0f64) {
        let t = Thresholds::default();
        let (lo, hi) = (a.min(b), a.max(b));
        prop_assert!(predict_min_distance(Some(lo), &t).unwrap().value <= predict_min_distance(Some(hi), &t).unwrap().value);
    }

    #[test]
    fn min_pttc_prediction_is_monotone(a in 0.0..5.0f64, b in 0.0..5.0f64) {
        let t = Thresholds::default();
        let (lo, hi) = (a.min(b), a.max(b));
        prop_assert!(predict_min_pttc(Some(lo), &t).unwrap().value <= predict_min_pttc(Some(hi), &t).unwrap().value);
    }

    #[test]
    fn score_only_depends_on_bins(
        v in bin_and_two_values(Variable::Speed),
        d in bin_and_two_values(Variable::MinDistance),
        l in bin_and_two_values(Variable::LateralDistance),
        r in bin_and_two_values(Variable::MaxCurvature),
        t in bin_and_two_values(Variable::MinPttc),
        p in bin_and_two_values(Variable::DistanceAtMinPttc),
    ) {
        let config = PredictorConfig::default();
        let make = |pick: fn((f64, f64)) -> f64| {
            let mut f = KinematicFeatures::empty("t");
            f.v = Some(pick(v));
            f.d_min = Some(pick(d));
            f.d_lat = Some(pick(l));
            f.rho = Some(pick(r));
            f.t_p = Some(pick(t));
            f.d_tp = Some(pick(p));
            f
        };
        let a = composite_score(&make(|x| x.0), &config);
        let b = composite_score(&make(|x| x.1), &config);
        prop_assert_eq!(a.score, b.score);
        prop_assert!(a.score <= 12);
    }
}
