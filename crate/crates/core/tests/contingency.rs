use pedcomfort::stats::{
    chi_square, classification_metrics, odds_ratio, ContingencyTable2x2, Orientation,
};
use proptest::prelude::*;

fn table() -> impl Strategy<Value = ContingencyTable2x2> {
    prop::array::uniform2(prop::array::uniform2(0u64..200)).prop_map(ContingencyTable2x2::new)
}

proptest! {
    #[test]
    fn chi_square_is_non_negative_and_yates_is_smaller(t in table()) {
        if let (Ok(p), Ok(y)) = (chi_square(&t, false), chi_square(&t, true)) {
            prop_assert!(p.statistic >= 0.0 && y.statistic >= 0.0);
            prop_assert!(p.statistic >= y.statistic - 1e-12);
            prop_assert!((0.0..=1.0).contains(&p.p_value));
        }
    }

    #[test]
    fn odds_ratio_is_transpose_invariant(t in table()) {
        let a = odds_ratio(&t);
        let b = odds_ratio(&t.transpose());
        prop_assert!((a.ratio - b.ratio).abs() <= 1e-12 * a.ratio.abs().max(1.0));
    }

    #[test]
    fn accuracy_is_orientation_invariant(t in table()) {
        let s = classification_metrics(&t, Orientation::Standard);
        let p = classification_metrics(&t, Orientation::Transposed);
        prop_assert_eq!(s.accuracy, p.accuracy);
    }

    #[test]
    fn f1_is_harmonic_mean(t in table()) {
        for o in [Orientation::Standard, Orientation::Transposed] {
            let m = classification_metrics(&t, o);
            if let (Some(p), Some(r), Some(f)) = (m.precision, m.recall, m.f1) {
                prop_assert!((f - 2.0 * p * r / (p + r)).abs() < 1e-12);
            }
            for v in [m.accuracy, m.precision, m.recall, m.specificity, m.f1].into_iter().flatten() {
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }
    }
}
