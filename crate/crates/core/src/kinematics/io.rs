use std::collections::BTreeSet;
use std::io::{Read, Write};

use thiserror::Error;

use crate::encounter::io::fmt_opt;

use super::{FeatureFlag, KinematicFeatures};

/// Header of the feature CSV. Missing values are empty cells; `flags` is a
/// `;`-separated list.
pub const FEATURE_COLUMNS: [&str; 8] = [
    "trial_id", "v", "d_min", "d_lat", "rho", "t_p", "d_tp", "flags",
];

#[derive(Debug, Error)]
pub enum FeatureIoError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("row {row}: {message}")]
    Parse { row: usize, message: String },
}

pub fn write_features_csv<W: Write>(
    writer: W,
    rows: &[KinematicFeatures],
) -> Result<(), FeatureIoError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(FEATURE_COLUMNS)?;
    for f in rows {
        let flags: Vec<&str> = f.flags.iter().map(|f| f.as_str()).collect();
        w.write_record([
            f.trial_id.clone(),
            fmt_opt(f.v),
            fmt_opt(f.d_min),
            fmt_opt(f.d_lat),
            fmt_opt(f.rho),
            fmt_opt(f.t_p),
            fmt_opt(f.d_tp),
            flags.join(";"),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_features_csv<R: Read>(reader: R) -> Result<Vec<KinematicFeatures>, FeatureIoError> {
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = r.headers()?.clone();
    let mut cols = [0usize; 8];
    for (slot, name) in cols.iter_mut().zip(FEATURE_COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| FeatureIoError::MissingColumn(name.to_string()))?;
    }
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = i + 2;
        let cell = |k: usize| rec.get(cols[k]).unwrap_or("");
        let num = |k: usize| -> Result<Option<f64>, FeatureIoError> {
            match cell(k) {
                "" => Ok(None),
                s => s.parse().map(Some).map_err(|e| FeatureIoError::Parse {
                    row,
                    message: format!("{}: `{s}`: {e}", FEATURE_COLUMNS[k]),
                }),
            }
        };
        let flags = cell(7)
            .split(';')
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<FeatureFlag>()
                    .map_err(|message| FeatureIoError::Parse { row, message })
            })
            .collect::<Result<BTreeSet<_>, _>>()?;
        out.push(KinematicFeatures {
            trial_id: cell(0).to_string(),
            v: num(1)?,
            d_min: num(2)?,
            d_lat: num(3)?,
            rho: num(4)?,
            t_p: num(5)?,
            d_tp: num(6)?,
            flags,
        });
    }
    Ok(out)
}
