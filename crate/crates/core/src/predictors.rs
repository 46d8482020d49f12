//! Binary comfort predictors.
//!
//! Three predictors map a trial's [`KinematicFeatures`] to a guess of whether
//! the pedestrian was comfortable (reported comfort of 4 or 5):
//!
//! - [`Predictor::MinDistance`]: `d_min >= 1.0 m`.
//! - [`Predictor::MinPttc`]: `t_p >= 0.7 s`.
//! - [`Predictor::Composite`]: each variable is binned, each bin carries an
//!   integer weight, and the summed score `E` must reach 4.
//!
//! Bins are left-closed and right-open with the last bin unbounded above.
//! Everything lives in [`PredictorConfig`], which round-trips through JSON.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::encounter::SpeedGroup;
use crate::kinematics::{FeatureFlag, KinematicFeatures};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PredictorError {
    #[error("missing value for {0}")]
    MissingValue(Variable),
    #[error("reported comfort {0} outside 1..=5")]
    OutOfRange(i64),
    #[error("invalid predictor config: {0}")]
    InvalidConfig(String),
}

/// The six kinematic variables, in reporting order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Variable {
    #[serde(rename = "v")]
    Speed,
    #[serde(rename = "d_min")]
    MinDistance,
    #[serde(rename = "d_lat")]
    LateralDistance,
    #[serde(rename = "rho")]
    MaxCurvature,
    #[serde(rename = "t_p")]
    MinPttc,
    #[serde(rename = "d_tp")]
    DistanceAtMinPttc,
}

impl Variable {
    pub const ALL: [Variable; 6] = [
        Variable::Speed,
        Variable::MinDistance,
        Variable::LateralDistance,
        Variable::MaxCurvature,
        Variable::MinPttc,
        Variable::DistanceAtMinPttc,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Variable::Speed => "v",
            Variable::MinDistance => "d_min",
            Variable::LateralDistance => "d_lat",
            Variable::MaxCurvature => "rho",
            Variable::MinPttc => "t_p",
            Variable::DistanceAtMinPttc => "d_tp",
        }
    }

    /// Raw feature value (no never-approaching substitution).
    pub fn value(self, f: &KinematicFeatures) -> Option<f64> {
        match self {
            Variable::Speed => f.v,
            Variable::MinDistance => f.d_min,
            Variable::LateralDistance => f.d_lat,
            Variable::MaxCurvature => f.rho,
            Variable::MinPttc => f.t_p,
            Variable::DistanceAtMinPttc => f.d_tp,
        }
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

/// Bin label `A`, `B`, ... stored as a zero-based index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BinLabel(pub u8);

impl BinLabel {
    pub fn index(self) -> usize {
        usize::from(self.0)
    }

    pub fn letter(self) -> char {
        char::from(b'A' + self.0)
    }
}

impl fmt::Display for BinLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

impl std::str::FromStr for BinLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.as_bytes() {
            [c @ b'A'..=b'Z'] => Ok(BinLabel(c - b'A')),
            _ => Err(format!("invalid bin label `{s}`")),
        }
    }
}

impl Serialize for BinLabel {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BinLabel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Lower bin edges per variable. Bin `k` covers `[edges[k], edges[k+1])`;
/// the last bin extends to +infinity (inclusive).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BinningScheme {
    pub edges: BTreeMap<Variable, Vec<f64>>,
}

impl Default for BinningScheme {
    fn default() -> Self {
        let edges = BTreeMap::from([
            // Two categories: nearer to 1.4 m/s (A) or to 2.8 m/s (B).
            (Variable::Speed, vec![0.0, 2.1]),
            (Variable::MinDistance, vec![0.0, 0.5, 1.0, 1.5]),
            (Variable::LateralDistance, vec![0.0, 0.5, 0.75, 1.0]),
            (Variable::MaxCurvature, vec![0.0, 0.4, 0.8, 1.2]),
            (Variable::MinPttc, vec![0.0, 0.35, 0.7, 1.05, 1.4]),
            (Variable::DistanceAtMinPttc, vec![0.0, 0.5, 1.0, 1.5]),
        ]);
        Self { edges }
    }
}

impl BinningScheme {
    pub fn validate(&self) -> Result<(), PredictorError> {
        for var in Variable::ALL {
            let edges = self
                .edges
                .get(&var)
                .ok_or_else(|| PredictorError::InvalidConfig(format!("no bin edges for {var}")))?;
            if edges.is_empty() || edges.len() > 26 {
                return Err(PredictorError::InvalidConfig(format!(
                    "{var}: need between 1 and 26 bins, got {}",
                    edges.len()
                )));
            }
            if edges.iter().any(|e| !e.is_finite()) || edges.windows(2).any(|w| w[1] <= w[0]) {
                return Err(PredictorError::InvalidConfig(format!(
                    "{var}: bin edges must be finite and strictly increasing"
                )));
            }
        }
        Ok(())
    }

    pub fn bin_count(&self, var: Variable) -> usize {
        self.edges.get(&var).map_or(0, Vec::len)
    }

    /// Bin of `value`, or `None` (unbinned) when missing, NaN or below the first edge.
    pub fn assign(&self, var: Variable, value: Option<f64>) -> Option<BinLabel> {
        let value = value?;
        let edges = self.edges.get(&var)?;
        if value.is_nan() || value < *edges.first()? {
            return None;
        }
        let k = edges.partition_point(|&e| e <= value) - 1;
        Some(BinLabel(k as u8))
    }
}

/// Bin of a variable under `scheme`; see [`BinningScheme::assign`].
pub fn assign_bin(var: Variable, value: Option<f64>, scheme: &BinningScheme) -> Option<BinLabel> {
    scheme.assign(var, value)
}

/// Categorical speed bin: R14 is `A`, R28 is `B`.
pub fn speed_group_bin(group: SpeedGroup) -> BinLabel {
    match group {
        SpeedGroup::R14 => BinLabel(0),
        SpeedGroup::R28 => BinLabel(1),
    }
}

/// Non-negative integer weight per (variable, bin).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WeightTable {
    pub weights: BTreeMap<Variable, Vec<u32>>,
}

impl Default for WeightTable {
    fn default() -> Self {
        let weights = BTreeMap::from([
            (Variable::Speed, vec![2, 0]),
            (Variable::MinDistance, vec![0, 1, 2, 2]),
            (Variable::LateralDistance, vec![0, 0, 2, 1]),
            (Variable::MaxCurvature, vec![1, 0, 2, 0]),
            (Variable::MinPttc, vec![0, 0, 0, 2, 2]),
            (Variable::DistanceAtMinPttc, vec![0, 1, 2, 2]),
        ]);
        Self { weights }
    }
}

impl WeightTable {
    pub fn weight(&self, var: Variable, bin: BinLabel) -> Option<u32> {
        self.weights.get(&var)?.get(bin.index()).copied()
    }

    /// Largest attainable composite score.
    pub fn max_score(&self) -> u32 {
        self.weights
            .values()
            .map(|w| w.iter().copied().max().unwrap_or(0))
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    /// Meters; comfortable iff `d_min >= min_distance`.
    pub min_distance: f64,
    /// Seconds; comfortable iff `t_p >= min_pttc`.
    pub min_pttc: f64,
    /// Comfortable iff `E >= composite`.
    pub composite: u32,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            min_distance: 1.0,
            min_pttc: 0.7,
            composite: 4,
        }
    }
}

/// How the composite predictor treats a missing feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum MissingPolicy {
    /// The variable contributes 0 and the prediction is flagged.
    #[default]
    #[serde(rename = "missing-weight-0")]
    WeightZero,
    /// The composite prediction is not made.
    #[serde(rename = "not-applicable")]
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PredictorConfig {
    pub bins: BinningScheme,
    pub weights: WeightTable,
    pub thresholds: Thresholds,
    pub missing_policy: MissingPolicy,
    /// Free-text status of the bin edges (e.g. whether they were read off plots).
    pub bin_edges_status: String,
}

impl Default for PredictorConfig {
    fn default() -> Self {
        Self {
            bins: BinningScheme::default(),
            weights: WeightTable::default(),
            thresholds: Thresholds::default(),
            missing_policy: MissingPolicy::default(),
            bin_edges_status: "reconstructed: only the anchor edges 0.5/0.75/1.0/1.5 m, 0.8/1.2 1/m and 0.7 s are fixed; the rest are estimates".to_string(),
        }
    }
}

impl PredictorConfig {
    pub fn validate(&self) -> Result<(), PredictorError> {
        self.bins.validate()?;
        for var in Variable::ALL {
            let n = self.bins.bin_count(var);
            let w = self.weights.weights.get(&var).map_or(0, Vec::len);
            if w != n {
                return Err(PredictorError::InvalidConfig(format!(
                    "{var}: {n} bins but {w} weights"
                )));
            }
        }
        let t = &self.thresholds;
        if !(t.min_distance.is_finite() && t.min_pttc.is_finite()) {
            return Err(PredictorError::InvalidConfig(
                "thresholds must be finite".to_string(),
            ));
        }
        Ok(())
    }
}

/// `S_E`: 1 when the reported comfort is 4 or 5, else 0.
pub fn binarize_comfort(s: i64) -> Result<u8, PredictorError> {
    match s {
        1..=3 => Ok(0),
        4 | 5 => Ok(1),
        other => Err(PredictorError::OutOfRange(other)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Predictor {
    MinDistance,
    MinPttc,
    Composite,
}

impl Predictor {
    pub const ALL: [Predictor; 3] = [
        Predictor::MinDistance,
        Predictor::MinPttc,
        Predictor::Composite,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Predictor::MinDistance => "min_distance",
            Predictor::MinPttc => "min_pttc",
            Predictor::Composite => "composite",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    pub predictor: Predictor,
    /// Predicted `S_E`, 0 or 1.
    pub value: u8,
    /// Composite score `E`; only set for the composite predictor.
    pub score: Option<u32>,
}

pub fn predict_min_distance(
    d_min: Option<f64>,
    thresholds: &Thresholds,
) -> Result<Prediction, PredictorError> {
    let d = d_min
        .filter(|d| !d.is_nan())
        .ok_or(PredictorError::MissingValue(Variable::MinDistance))?;
    Ok(Prediction {
        predictor: Predictor::MinDistance,
        value: u8::from(d >= thresholds.min_distance),
        score: None,
    })
}

/// `t_p` may be `+inf` for encounters that never approach.
pub fn predict_min_pttc(
    t_p: Option<f64>,
    thresholds: &Thresholds,
) -> Result<Prediction, PredictorError> {
    let t = t_p
        .filter(|t| !t.is_nan())
        .ok_or(PredictorError::MissingValue(Variable::MinPttc))?;
    Ok(Prediction {
        predictor: Predictor::MinPttc,
        value: u8::from(t >= thresholds.min_pttc),
        score: None,
    })
}

pub fn predict_composite(score: u32, thresholds: &Thresholds) -> Prediction {
    Prediction {
        predictor: Predictor::Composite,
        value: u8::from(score >= thresholds.composite),
        score: Some(score),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositeScore {
    /// `E`, the sum of the six bin weights.
    pub score: u32,
    /// Bin of each variable; `None` when the feature is missing.
    pub bins: BTreeMap<Variable, Option<BinLabel>>,
    pub missing: BTreeSet<Variable>,
}

/// Sums the bin weights of all six variables. Missing features contribute 0
/// and are listed in `missing`. A never-approaching encounter lands `t_p` in
/// the top bin.
pub fn composite_score(features: &KinematicFeatures, config: &PredictorConfig) -> CompositeScore {
    let mut bins = BTreeMap::new();
    let mut missing = BTreeSet::new();
    let mut score = 0;
    for var in Variable::ALL {
        let value = match var {
            Variable::MinPttc => features.effective_t_p(),
            _ => var.value(features),
        };
        let bin = config.bins.assign(var, value);
        match bin.and_then(|b| config.weights.weight(var, b)) {
            Some(w) => score += w,
            None => {
                missing.insert(var);
            }
        }
        bins.insert(var, bin);
    }
    CompositeScore {
        score,
        bins,
        missing,
    }
}

/// Composite score from explicit bin labels.
pub fn score_from_bins(
    bins: &BTreeMap<Variable, BinLabel>,
    weights: &WeightTable,
) -> Result<u32, PredictorError> {
    Variable::ALL.iter().try_fold(0u32, |acc, &var| {
        let bin = bins.get(&var).ok_or(PredictorError::MissingValue(var))?;
        let w = weights
            .weight(var, *bin)
            .ok_or_else(|| PredictorError::InvalidConfig(format!("{var} has no bin {bin}")))?;
        Ok(acc + w)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome {
    Predicted(Prediction),
    NotApplicable { reason: String },
}

impl Outcome {
    pub fn value(&self) -> Option<u8> {
        match self {
            Outcome::Predicted(p) => Some(p.value),
            Outcome::NotApplicable { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictionFlag {
    /// At least one composite variable was missing and contributed weight 0.
    CompositeMissingFeature,
    /// `t_p` was taken as +infinity because the agents never approached.
    NeverApproachingAsInfinite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionSet {
    pub trial_id: String,
    pub outcomes: BTreeMap<Predictor, Outcome>,
    pub composite: CompositeScore,
    pub flags: BTreeSet<PredictionFlag>,
}

impl PredictionSet {
    pub fn value(&self, predictor: Predictor) -> Option<u8> {
        self.outcomes.get(&predictor).and_then(Outcome::value)
    }
}

/// Runs all three predictors on one feature row.
pub fn predict_all(features: &KinematicFeatures, config: &PredictorConfig) -> PredictionSet {
    let mut flags = BTreeSet::new();
    let mut outcomes = BTreeMap::new();
    let not_applicable = |e: PredictorError| Outcome::NotApplicable {
        reason: e.to_string(),
    };

    outcomes.insert(
        Predictor::MinDistance,
        predict_min_distance(features.d_min, &config.thresholds)
            .map_or_else(not_applicable, Outcome::Predicted),
    );

    let t_p = features.effective_t_p();
    if features.t_p.is_none() && features.has(FeatureFlag::NeverApproaching) {
        flags.insert(PredictionFlag::NeverApproachingAsInfinite);
    }
    outcomes.insert(
        Predictor::MinPttc,
        predict_min_pttc(t_p, &config.thresholds).map_or_else(not_applicable, Outcome::Predicted),
    );

    let composite = composite_score(features, config);
    let outcome = if composite.missing.is_empty() {
        Outcome::Predicted(predict_composite(composite.score, &config.thresholds))
    } else {
        match config.missing_policy {
            MissingPolicy::WeightZero => {
                flags.insert(PredictionFlag::CompositeMissingFeature);
                Outcome::Predicted(predict_composite(composite.score, &config.thresholds))
            }
            MissingPolicy::NotApplicable => Outcome::NotApplicable {
                reason: format!(
                    "missing {}",
                    composite
                        .missing
                        .iter()
                        .map(|v| v.key())
                        .collect::<Vec<_>>()
                        .join(", ")
                ),
            },
        }
    };
    outcomes.insert(Predictor::Composite, outcome);

    PredictionSet {
        trial_id: features.trial_id.clone(),
        outcomes,
        composite,
        flags,
    }
}

/// CSV with columns `trial_id,score,min_distance,min_pttc,composite,flags`;
/// predictors that do not apply leave an empty cell.
pub fn write_predictions_csv<W: Write>(
    writer: W,
    sets: &[PredictionSet],
) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "trial_id",
        "score",
        "min_distance",
        "min_pttc",
        "composite",
        "flags",
    ])?;
    for s in sets {
        let cell = |p: Predictor| s.value(p).map(|v| v.to_string()).unwrap_or_default();
        let flags: Vec<String> = s
            .flags
            .iter()
            .map(|f| {
                serde_json::to_value(f)
                    .ok()
                    .and_then(|v| v.as_str().map(str::to_string))
                    .unwrap_or_default()
            })
            .collect();
        w.write_record([
            s.trial_id.clone(),
            s.composite.score.to_string(),
            cell(Predictor::MinDistance),
            cell(Predictor::MinPttc),
            cell(Predictor::Composite),
            flags.join(";"),
        ])?;
    }
    w.flush()?;
    Ok(())
}
