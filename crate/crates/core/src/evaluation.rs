//! Joins feature rows with comfort labels and computes the full evaluation:
//! distance correlation of every variable against reported comfort, and
//! contingency analysis of every predictor against the binary comfort index.

use std::collections::BTreeMap;
use std::io::Read;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::AnalysisConfig;
use crate::encounter::EncounterDataset;
use crate::kinematics::KinematicFeatures;
use crate::predictors::{binarize_comfort, predict_all, Predictor, Variable};
use crate::stats::{
    chi_square, classification_metrics, contingency, odds_ratio, permutation_pvalue,
    ChiSquareResult, ClassificationMetrics, ContingencyTable2x2, OddsRatio, Orientation,
    StatsError,
};

#[derive(Debug, Error)]
pub enum EvaluationError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("missing column `{0}`")]
    MissingColumn(&'static str),
    #[error("row {row}: {message}")]
    Parse { row: usize, message: String },
    #[error("duplicate label for trial `{0}`")]
    DuplicateLabel(String),
    #[error("no labels")]
    NoLabels,
    #[error("no feature row has a matching label")]
    NoOverlap,
    #[error(transparent)]
    Stats(#[from] StatsError),
}

/// Reads `trial_id,reported_comfort` rows (other columns are ignored).
pub fn read_labels_csv<R: Read>(reader: R) -> Result<BTreeMap<String, u8>, EvaluationError> {
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = r.headers()?.clone();
    let col = |name: &'static str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or(EvaluationError::MissingColumn(name))
    };
    let (id_col, s_col) = (col("trial_id")?, col("reported_comfort")?);
    let mut labels = BTreeMap::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = i + 2;
        let id = rec.get(id_col).unwrap_or("").to_string();
        let raw = rec.get(s_col).unwrap_or("");
        let s: u8 = raw
            .parse()
            .ok()
            .filter(|s| (1..=5).contains(s))
            .ok_or_else(|| EvaluationError::Parse {
                row,
                message: format!("reported_comfort `{raw}` is not an integer in 1..=5"),
            })?;
        if labels.insert(id.clone(), s).is_some() {
            return Err(EvaluationError::DuplicateLabel(id));
        }
    }
    if labels.is_empty() {
        return Err(EvaluationError::NoLabels);
    }
    Ok(labels)
}

pub fn labels_from_dataset(dataset: &EncounterDataset) -> BTreeMap<String, u8> {
    dataset
        .trials()
        .iter()
        .map(|t| (t.trial_id.clone(), t.reported_comfort))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DcorEntry {
    /// Trials with a finite value of the variable.
    pub n: usize,
    pub dcor: Option<f64>,
    pub p_value: Option<f64>,
    pub constant_input: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictorReport {
    /// Trials where the predictor applied.
    pub n: usize,
    pub not_applicable: usize,
    pub contingency: ContingencyTable2x2,
    /// `None` when a row or column of the table is empty.
    pub chi_square: Option<ChiSquareResult>,
    pub chi_square_yates: Option<ChiSquareResult>,
    pub odds_ratio: OddsRatio,
    pub metrics: ClassificationMetrics,
    pub metrics_transposed: ClassificationMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub n_features: usize,
    pub n_labeled: usize,
    /// Feature rows without a label, by trial id.
    pub unlabeled: Vec<String>,
    pub seed: u64,
    pub dcor: BTreeMap<Variable, DcorEntry>,
    pub predictors: BTreeMap<Predictor, PredictorReport>,
    pub config: AnalysisConfig,
}

impl EvaluationReport {
    /// Pretty JSON with a trailing newline; identical inputs give identical bytes.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

/// Contingency analysis of one predictor.
pub fn predictor_report(
    preds: &[u8],
    truths: &[u8],
    not_applicable: usize,
) -> Result<PredictorReport, StatsError> {
    let table = contingency(preds, truths)?;
    Ok(PredictorReport {
        n: preds.len(),
        not_applicable,
        contingency: table,
        chi_square: chi_square(&table, false).ok(),
        chi_square_yates: chi_square(&table, true).ok(),
        odds_ratio: odds_ratio(&table),
        metrics: classification_metrics(&table, Orientation::Standard),
        metrics_transposed: classification_metrics(&table, Orientation::Transposed),
    })
}

/// Evaluates feature rows against labels. Rows without a label are listed
/// in the report and otherwise skipped.
pub fn evaluate(
    features: &[KinematicFeatures],
    labels: &BTreeMap<String, u8>,
    config: &AnalysisConfig,
    seed: u64,
) -> Result<EvaluationReport, EvaluationError> {
    let mut unlabeled = Vec::new();
    let mut rows = Vec::new();
    for f in features {
        match labels.get(&f.trial_id) {
            Some(&s) => rows.push((f, s)),
            None => unlabeled.push(f.trial_id.clone()),
        }
    }
    if rows.is_empty() {
        return Err(EvaluationError::NoOverlap);
    }

    let mut dcor = BTreeMap::new();
    for var in Variable::ALL {
        let (x, y): (Vec<f64>, Vec<f64>) = rows
            .iter()
            .filter_map(|(f, s)| {
                var.value(f)
                    .filter(|v| v.is_finite())
                    .map(|v| (v, f64::from(*s)))
            })
            .unzip();
        let entry = if x.len() >= 2 {
            let r = permutation_pvalue(&x, &y, config.evaluation.n_permutations, seed)?;
            DcorEntry {
                n: x.len(),
                dcor: Some(r.dcor),
                p_value: Some(r.p_value),
                constant_input: r.constant_input,
            }
        } else {
            DcorEntry {
                n: x.len(),
                dcor: None,
                p_value: None,
                constant_input: false,
            }
        };
        dcor.insert(var, entry);
    }

    let sets: Vec<_> = rows
        .iter()
        .map(|(f, s)| {
            (
                predict_all(f, &config.predictors),
                binarize_comfort(i64::from(*s)),
            )
        })
        .collect();
    let mut predictors = BTreeMap::new();
    for p in Predictor::ALL {
        let mut preds = Vec::new();
        let mut truths = Vec::new();
        let mut skipped = 0;
        for (set, truth) in &sets {
            match (set.value(p), truth) {
                (Some(v), Ok(t)) => {
                    preds.push(v);
                    truths.push(*t);
                }
                _ => skipped += 1,
            }
        }
        if !preds.is_empty() {
            predictors.insert(p, predictor_report(&preds, &truths, skipped)?);
        }
    }

    Ok(EvaluationReport {
        n_features: features.len(),
        n_labeled: rows.len(),
        unlabeled,
        seed,
        dcor,
        predictors,
        config: config.clone(),
    })
}
