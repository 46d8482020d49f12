//! Statistics for evaluating comfort predictors: 2x2 contingency analysis,
//! classification metrics, distance correlation with a permutation test, and
//! an ordinary least-squares trend.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, StudentsT};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("empty input")]
    Empty,
    #[error("value {0} is not binary")]
    NotBinary(u8),
    #[error("a row or column of the table sums to zero")]
    ZeroMarginal,
    #[error("need at least {needed} observations, got {got}")]
    TooFewObservations { needed: usize, got: usize },
    #[error("non-finite input value")]
    NonFinite,
}

/// Counts `n[pred][truth]` of a binary predictor against binary ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContingencyTable2x2 {
    pub n: [[u64; 2]; 2],
}

impl ContingencyTable2x2 {
    /// Rows are the predicted value, columns the true value.
    pub fn new(n: [[u64; 2]; 2]) -> Self {
        Self { n }
    }

    pub fn total(&self) -> u64 {
        self.n.iter().flatten().sum()
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        Self {
            n: [[n[0][0], n[1][0]], [n[0][1], n[1][1]]],
        }
    }

    fn row(&self, i: usize) -> u64 {
        self.n[i][0] + self.n[i][1]
    }

    fn col(&self, j: usize) -> u64 {
        self.n[0][j] + self.n[1][j]
    }
}

/// Cross-tabulates binary predictions against binary truths.
pub fn contingency(preds: &[u8], truths: &[u8]) -> Result<ContingencyTable2x2, StatsError> {
    if preds.len() != truths.len() {
        return Err(StatsError::LengthMismatch {
            left: preds.len(),
            right: truths.len(),
        });
    }
    if preds.is_empty() {
        return Err(StatsError::Empty);
    }
    let mut n = [[0u64; 2]; 2];
    for (&p, &t) in preds.iter().zip(truths) {
        if p > 1 {
            return Err(StatsError::NotBinary(p));
        }
        if t > 1 {
            return Err(StatsError::NotBinary(t));
        }
        n[usize::from(p)][usize::from(t)] += 1;
    }
    Ok(ContingencyTable2x2 { n })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub p_value: f64,
    pub yates: bool,
}

/// Pearson chi-square test of independence with one degree of freedom,
/// optionally with the Yates continuity correction.
pub fn chi_square(table: &ContingencyTable2x2, yates: bool) -> Result<ChiSquareResult, StatsError> {
    let total = table.total() as f64;
    if (0..2).any(|i| table.row(i) == 0 || table.col(i) == 0) {
        return Err(StatsError::ZeroMarginal);
    }
    let mut statistic = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let expected = table.row(i) as f64 * table.col(j) as f64 / total;
            let mut diff = (table.n[i][j] as f64 - expected).abs();
            if yates {
                diff = (diff - 0.5).max(0.0);
            }
            statistic += diff * diff / expected;
        }
    }
    let dist = ChiSquared::new(1.0).expect("one degree of freedom is valid");
    Ok(ChiSquareResult {
        statistic,
        p_value: dist.sf(statistic),
        yates,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OddsRatio {
    pub ratio: f64,
    /// 0.5 was added to every cell because at least one was zero.
    pub haldane_corrected: bool,
}

/// `(n11 / n10) / (n01 / n00)`.
pub fn odds_ratio(table: &ContingencyTable2x2) -> OddsRatio {
    let corrected = table.n.iter().flatten().any(|&c| c == 0);
    let add = if corrected { 0.5 } else { 0.0 };
    let c = |i: usize, j: usize| table.n[i][j] as f64 + add;
    OddsRatio {
        ratio: (c(1, 1) * c(0, 0)) / (c(1, 0) * c(0, 1)),
        haldane_corrected: corrected,
    }
}

/// How predicted/true cells map to TP, FP, FN, TN.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// TP = n[1][1], FP = n[1][0], FN = n[0][1], TN = n[0][0].
    #[default]
    Standard,
    /// FP and FN exchanged, i.e. the standard metrics of the transposed table.
    Transposed,
}

/// Metrics with a zero denominator are `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassificationMetrics {
    pub orientation: Orientation,
    pub accuracy: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub specificity: Option<f64>,
    pub f1: Option<f64>,
}

pub fn classification_metrics(
    table: &ContingencyTable2x2,
    orientation: Orientation,
) -> ClassificationMetrics {
    let n = match orientation {
        Orientation::Standard => table.n,
        Orientation::Transposed => table.transpose().n,
    };
    let (tp, fp, fn_, tn) = (
        n[1][1] as f64,
        n[1][0] as f64,
        n[0][1] as f64,
        n[0][0] as f64,
    );
    let ratio = |num: f64, den: f64| (den > 0.0).then(|| num / den);
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = match (precision, recall) {
        (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
        _ => None,
    };
    ClassificationMetrics {
        orientation,
        accuracy: ratio(tp + tn, tp + tn + fp + fn_),
        precision,
        recall,
        specificity: ratio(tn, tn + fp),
        f1,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DcorValue {
    pub dcor: f64,
    /// One of the inputs had zero distance variance; `dcor` is then 0.
    pub constant_input: bool,
}

/// Row-major `n x n` double-centered distance matrix of a scalar sample.
fn centered_distances(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = (x[i] - x[j]).abs();
        }
    }
    let row_means: Vec<f64> = (0..n)
        .map(|i| a[i * n..(i + 1) * n].iter().sum::<f64>() / n as f64)
        .collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    // The distance matrix is symmetric, so column means equal row means.
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] += grand - row_means[i] - row_means[j];
        }
    }
    a
}

fn check_pair(x: &[f64], y: &[f64]) -> Result<(), StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(StatsError::TooFewObservations {
            needed: 2,
            got: x.len(),
        });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    Ok(())
}

struct DcorParts {
    a: Vec<f64>,
    b: Vec<f64>,
    n: usize,
    denom: f64,
}

impl DcorParts {
    fn new(x: &[f64], y: &[f64]) -> Self {
        let n = x.len();
        let a = centered_distances(x);
        let b = centered_distances(y);
        let nn = (n * n) as f64;
        let vx = a.iter().map(|v| v * v).sum::<f64>() / nn;
        let vy = b.iter().map(|v| v * v).sum::<f64>() / nn;
        Self {
            a,
            b,
            n,
            denom: (vx * vy).sqrt(),
        }
    }

    /// Squared distance covariance of `x` against `y` permuted by `perm`.
    fn dcov2(&self, perm: &[usize]) -> f64 {
        let n = self.n;
        let mut s = 0.0;
        for i in 0..n {
            let ai = &self.a[i * n..(i + 1) * n];
            let bi = &self.b[perm[i] * n..(perm[i] + 1) * n];
            for j in 0..n {
                s += ai[j] * bi[perm[j]];
            }
        }
        s / (n * n) as f64
    }

    fn dcor(&self, dcov2: f64) -> DcorValue {
        if self.denom <= 0.0 {
            return DcorValue {
                dcor: 0.0,
                constant_input: true,
            };
        }
        DcorValue {
            dcor: (dcov2.max(0.0) / self.denom).sqrt().min(1.0),
            constant_input: false,
        }
    }
}

/// Sample distance correlation (V-statistic) of two paired scalar sequences.
pub fn distance_correlation(x: &[f64], y: &[f64]) -> Result<DcorValue, StatsError> {
    check_pair(x, y)?;
    let parts = DcorParts::new(x, y);
    let identity: Vec<usize> = (0..x.len()).collect();
    Ok(parts.dcor(parts.dcov2(&identity)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DcorResult {
    pub dcor: f64,
    pub p_value: f64,
    pub n_permutations: usize,
    pub seed: u64,
    pub constant_input: bool,
}

/// Permutation `i` of `0..n`, drawn from its own ChaCha stream so any subset
/// of permutations can be generated independently.
fn permutation(n: usize, seed: u64, i: usize) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i as u64);
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(&mut rng);
    p
}

/// Distance correlation with a permutation p-value,
/// `(1 + #{permuted dCor >= observed}) / (1 + n_iter)`.
///
/// Permutations run in parallel; the result depends only on `(x, y, n_iter, seed)`.
pub fn permutation_pvalue(
    x: &[f64],
    y: &[f64],
    n_iter: usize,
    seed: u64,
) -> Result<DcorResult, StatsError> {
    check_pair(x, y)?;
    let n = x.len();
    let parts = DcorParts::new(x, y);
    let identity: Vec<usize> = (0..n).collect();
    let observed = parts.dcov2(&identity);
    // Guard against rounding differences between equal statistics.
    let cutoff = observed - 1e-12 * observed.abs().max(f64::MIN_POSITIVE);
    let exceed = (0..n_iter)
        .into_par_iter()
        .filter(|&i| parts.dcov2(&permutation(n, seed, i)) >= cutoff)
        .count();
    let value = parts.dcor(observed);
    Ok(DcorResult {
        dcor: value.dcor,
        p_value: (1 + exceed) as f64 / (1 + n_iter) as f64,
        n_permutations: n_iter,
        seed,
        constant_input: value.constant_input,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrendResult {
    pub slope: f64,
    pub intercept: f64,
    /// Two-sided t-test of zero slope; `None` with fewer than three points
    /// or a perfect fit.
    pub p_value: Option<f64>,
    pub n: usize,
}

/// Ordinary least squares of `y` on `x` over the given points.
pub fn linear_trend(points: &[(f64, f64)]) -> Result<TrendResult, StatsError> {
    let n = points.len();
    if n < 2 {
        return Err(StatsError::TooFewObservations { needed: 2, got: n });
    }
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let nf = n as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(StatsError::TooFewObservations { needed: 2, got: 1 });
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let p_value = (n > 2).then(|| {
        let sse: f64 = points
            .iter()
            .map(|p| (p.1 - intercept - slope * p.0).powi(2))
            .sum();
        let se = (sse / (nf - 2.0) / sxx).sqrt();
        (se > 0.0).then(|| {
            let t = StudentsT::new(0.0, 1.0, nf - 2.0).expect("positive degrees of freedom");
            2.0 * t.sf((slope / se).abs())
        })
    });
    Ok(TrendResult {
        slope,
        intercept,
        p_value: p_value.flatten(),
        n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const TABLE_V: [[u64; 2]; 2] = [[32, 31], [18, 64]];
    const TABLE_II: [[u64; 2]; 2] = [[35, 48], [15, 47]];

    #[test]
    fn contingency_counts_pairs() {
        let t = contingency(&[1, 1, 0], &[1, 0, 0]).unwrap();
        assert_eq!(t.n, [[1, 0], [1, 1]]);
        let t = contingency(&[0, 0], &[0, 0]).unwrap();
        assert_eq!(t.n, [[2, 0], [0, 0]]);
        assert_eq!(contingency(&[], &[]), Err(StatsError::Empty));
        assert!(matches!(
            contingency(&[1], &[1, 0]),
            Err(StatsError::LengthMismatch { .. })
        ));
        assert_eq!(contingency(&[2], &[1]), Err(StatsError::NotBinary(2)));
    }

    #[test]
    fn chi_square_examples() {
        let r = chi_square(&ContingencyTable2x2::new(TABLE_V), true).unwrap();
        assert!(
            (r.statistic - 11.873_154_685_494).abs() < 1e-9,
            "{}",
            r.statistic
        );
        assert!(
            (r.p_value - 0.000_569_488_670_988).abs() < 1e-9,
            "{}",
            r.p_value
        );
        let r = chi_square(&ContingencyTable2x2::new(TABLE_II), false).unwrap();
        assert!((r.statistic - 5.075).abs() < 0.005);
        let r = chi_square(&ContingencyTable2x2::new([[10, 10], [10, 10]]), false).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!((r.p_value - 1.0).abs() < 1e-12);
        assert_eq!(
            chi_square(&ContingencyTable2x2::new([[3, 4], [0, 0]]), true),
            Err(StatsError::ZeroMarginal)
        );
    }

    #[test]
    fn odds_ratio_with_and_without_correction() {
        let r = odds_ratio(&ContingencyTable2x2::new(TABLE_II));
        assert!((r.ratio - 47.0 * 35.0 / (15.0 * 48.0)).abs() < 1e-12);
        assert!(!r.haldane_corrected);
        let r = odds_ratio(&ContingencyTable2x2::new([[5, 0], [3, 2]]));
        assert!(r.haldane_corrected);
        assert!((r.ratio - (2.5 * 5.5) / (3.5 * 0.5)).abs() < 1e-12);
    }

    #[test]
    fn metrics_standard_orientation() {
        let m = classification_metrics(&ContingencyTable2x2::new(TABLE_V), Orientation::Standard);
        assert!((m.precision.unwrap() - 64.0 / 82.0).abs() < 1e-12);
        assert!((m.recall.unwrap() - 64.0 / 95.0).abs() < 1e-12);
        assert!((m.accuracy.unwrap() - 96.0 / 145.0).abs() < 1e-12);
    }

    #[test]
    fn undefined_metrics_are_missing() {
        let m = classification_metrics(
            &ContingencyTable2x2::new([[5, 3], [0, 0]]),
            Orientation::Standard,
        );
        assert_eq!(m.precision, None);
        assert_eq!(m.recall, Some(0.0));
        assert_eq!(m.f1, None);
    }

    #[test]
    fn dcor_of_affine_relation_is_one() {
        let x: Vec<f64> = (1..=20).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let d = distance_correlation(&x, &y).unwrap();
        assert!((d.dcor - 1.0).abs() < 1e-9);
    }

    #[test]
    fn dcor_of_constant_is_flagged_zero() {
        let d = distance_correlation(&[3.0; 5], &[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert_eq!(
            d,
            DcorValue {
                dcor: 0.0,
                constant_input: true
            }
        );
    }

    #[test]
    fn permutation_edge_cases() {
        let x: Vec<f64> = (0..50).map(f64::from).collect();
        let r = permutation_pvalue(&x, &x, 1000, 7).unwrap();
        assert!(r.p_value <= 0.001 + 1e-12, "{}", r.p_value);
        let r = permutation_pvalue(&x, &x, 0, 7).unwrap();
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn permutations_are_reproducible_and_distinct() {
        assert_eq!(permutation(10, 3, 4), permutation(10, 3, 4));
        assert_ne!(permutation(10, 3, 4), permutation(10, 3, 5));
    }

    #[test]
    fn trend_needs_two_points() {
        assert!(linear_trend(&[(1.0, 2.0)]).is_err());
        let r = linear_trend(&[(1.0, 2.0), (2.0, 4.0)]).unwrap();
        assert_eq!((r.slope, r.intercept, r.p_value), (2.0, 0.0, None));
    }

    #[test]
    fn trend_p_value_matches_reference() {
        // Reference values from scipy.stats.linregress.
        let r =
            linear_trend(&[(1.0, 1.0), (2.0, 3.0), (3.0, 2.0), (4.0, 4.0), (5.0, 4.0)]).unwrap();
        assert!((r.slope - 0.7).abs() < 1e-12);
        assert!((r.intercept - 0.7).abs() < 1e-12);
        assert!((r.p_value.unwrap() - 0.068_903_508_911_957).abs() < 1e-9);
    }
}
