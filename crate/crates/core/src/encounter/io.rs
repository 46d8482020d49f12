//! Reading and writing encounter datasets.
//!
//! Two on-disk layouts are supported:
//!
//! - `trials-csv`: a `trials.csv` index with header
//!   `trial_id,participant_id,trial_index,speed_group,reported_comfort,lateral_valid,robot_file,pedestrian_file`
//!   whose last two columns point (relative to the index) at trajectory files.
//! - `trials-dir`: one subdirectory per trial holding `meta.json`, `robot.csv`
//!   and `pedestrian.csv`.
//!
//! Trajectory files always have the header `t,x,y,vx,vy,heading`; the last
//! three cells may be empty. An optional `provenance.json` (string map) sits
//! next to the index or at the top of the directory.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{
    check_trial, EncounterDataset, EncounterError, SpeedGroup, Trajectory, TrajectorySample,
    TrialRecord,
};

pub const TRIALS_INDEX: &str = "trials.csv";
pub const PROVENANCE_FILE: &str = "provenance.json";
const TRIALS_HEADER: [&str; 8] = [
    "trial_id",
    "participant_id",
    "trial_index",
    "speed_group",
    "reported_comfort",
    "lateral_valid",
    "robot_file",
    "pedestrian_file",
];
const TRAJECTORY_HEADER: [&str; 6] = ["t", "x", "y", "vx", "vy", "heading"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DatasetFormat {
    TrialsCsv,
    TrialsDir,
}

impl DatasetFormat {
    /// `trials-csv` when `path` is (or directly contains) a `trials.csv`, else `trials-dir`.
    pub fn detect(path: &Path) -> DatasetFormat {
        if path.is_file() || path.join(TRIALS_INDEX).is_file() {
            DatasetFormat::TrialsCsv
        } else {
            DatasetFormat::TrialsDir
        }
    }
}

impl FromStr for DatasetFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "trials-csv" => Ok(DatasetFormat::TrialsCsv),
            "trials-dir" => Ok(DatasetFormat::TrialsDir),
            other => Err(format!(
                "unknown dataset format `{other}` (expected trials-csv or trials-dir)"
            )),
        }
    }
}

/// Frame in which a pedestrian trajectory file is expressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum PedestrianFrame {
    #[default]
    World,
    /// Position relative to the robot, in the robot body frame (x forward).
    Robot,
}

impl FromStr for PedestrianFrame {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "" | "world" => Ok(PedestrianFrame::World),
            "robot" => Ok(PedestrianFrame::Robot),
            other => Err(format!("unknown pedestrian frame `{other}`")),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct TrialMeta {
    trial_id: String,
    participant_id: String,
    trial_index: i64,
    speed_group: SpeedGroup,
    reported_comfort: i64,
    lateral_valid: bool,
    #[serde(default, skip_serializing_if = "is_world")]
    pedestrian_frame: PedestrianFrame,
}

fn is_world(frame: &PedestrianFrame) -> bool {
    *frame == PedestrianFrame::World
}

/// Loads and validates a dataset. Never writes to disk.
pub fn load_dataset(
    path: &Path,
    format: DatasetFormat,
) -> Result<EncounterDataset, EncounterError> {
    let (trials, provenance) = match format {
        DatasetFormat::TrialsCsv => load_trials_csv(path)?,
        DatasetFormat::TrialsDir => load_trials_dir(path)?,
    };
    if trials.is_empty() {
        return Err(EncounterError::EmptyDataset(path.to_path_buf()));
    }
    EncounterDataset::new(trials, provenance)
}

fn load_trials_csv(
    path: &Path,
) -> Result<(Vec<TrialRecord>, BTreeMap<String, String>), EncounterError> {
    let index = if path.is_dir() {
        path.join(TRIALS_INDEX)
    } else {
        path.to_path_buf()
    };
    let base = index.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut provenance = read_provenance(&base.join(PROVENANCE_FILE))?;

    let mut reader = open_csv(&index)?;
    let headers = reader
        .headers()
        .map_err(|source| csv_err(&index, source))?
        .clone();
    let mut cols = [0usize; 8];
    for (slot, name) in cols.iter_mut().zip(TRIALS_HEADER) {
        *slot = column(&headers, name, &index)?;
    }
    let frame_col = headers.iter().position(|h| h == "pedestrian_frame");

    let mut trials = Vec::new();
    let mut converted = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2;
        let record = record.map_err(|source| csv_err(&index, source))?;
        let cell = |k: usize| record.get(cols[k]).unwrap_or("").trim();
        let parse_err = |message: String| EncounterError::Parse {
            path: index.clone(),
            row,
            message,
        };
        let meta = TrialMeta {
            trial_id: cell(0).to_string(),
            participant_id: cell(1).to_string(),
            trial_index: cell(2)
                .parse()
                .map_err(|e| parse_err(format!("trial_index: {e}")))?,
            speed_group: cell(3).parse().map_err(parse_err)?,
            reported_comfort: cell(4)
                .parse()
                .map_err(|e| parse_err(format!("reported_comfort: {e}")))?,
            lateral_valid: parse_bool(cell(5)).map_err(parse_err)?,
            pedestrian_frame: match frame_col {
                Some(c) => record.get(c).unwrap_or("").parse().map_err(parse_err)?,
                None => PedestrianFrame::World,
            },
        };
        let robot = read_trajectory(&base.join(cell(6)))?;
        let pedestrian = read_trajectory(&base.join(cell(7)))?;
        if meta.pedestrian_frame == PedestrianFrame::Robot {
            converted.push(meta.trial_id.clone());
        }
        trials.push(build_trial(meta, robot, pedestrian, &index, row)?);
    }
    tag_conversion(&mut provenance, &converted);
    Ok((trials, provenance))
}

fn load_trials_dir(
    path: &Path,
) -> Result<(Vec<TrialRecord>, BTreeMap<String, String>), EncounterError> {
    let mut provenance = read_provenance(&path.join(PROVENANCE_FILE))?;
    let mut dirs = Vec::new();
    for entry in fs::read_dir(path).map_err(|source| io_err(path, source))? {
        let entry = entry.map_err(|source| io_err(path, source))?;
        if entry.path().is_dir() {
            dirs.push(entry.path());
        }
    }
    dirs.sort();

    let mut trials = Vec::new();
    let mut converted = Vec::new();
    for (i, dir) in dirs.iter().enumerate() {
        let meta_path = dir.join("meta.json");
        let text = fs::read_to_string(&meta_path).map_err(|source| io_err(&meta_path, source))?;
        let meta: TrialMeta =
            serde_json::from_str(&text).map_err(|source| EncounterError::Json {
                path: meta_path.clone(),
                source,
            })?;
        let robot = read_trajectory(&dir.join("robot.csv"))?;
        let pedestrian = read_trajectory(&dir.join("pedestrian.csv"))?;
        if meta.pedestrian_frame == PedestrianFrame::Robot {
            converted.push(meta.trial_id.clone());
        }
        trials.push(build_trial(meta, robot, pedestrian, &meta_path, i + 1)?);
    }
    tag_conversion(&mut provenance, &converted);
    Ok((trials, provenance))
}

fn build_trial(
    meta: TrialMeta,
    robot: Trajectory,
    pedestrian: Trajectory,
    source: &Path,
    row: usize,
) -> Result<TrialRecord, EncounterError> {
    if !(1..=5).contains(&meta.reported_comfort) {
        return Err(EncounterError::ComfortOutOfRange {
            trial_id: meta.trial_id,
            value: meta.reported_comfort,
        });
    }
    let trial_index = u8::try_from(meta.trial_index).map_err(|_| EncounterError::Parse {
        path: source.to_path_buf(),
        row,
        message: format!("trial_index {} outside 1..=5", meta.trial_index),
    })?;
    let mut trial = TrialRecord {
        trial_id: meta.trial_id,
        participant_id: meta.participant_id,
        trial_index,
        speed_group: meta.speed_group,
        robot,
        pedestrian,
        reported_comfort: meta.reported_comfort as u8,
        lateral_valid: meta.lateral_valid,
    };
    check_trial(&trial)?;
    if meta.pedestrian_frame == PedestrianFrame::Robot {
        trial.pedestrian = robot_frame_to_world(&trial)?;
    }
    Ok(trial)
}

fn tag_conversion(provenance: &mut BTreeMap<String, String>, converted: &[String]) {
    if !converted.is_empty() {
        provenance.insert(
            "pedestrian_frame_conversion".to_string(),
            format!("robot->world: {}", converted.join(",")),
        );
    }
}

/// Heading of each robot sample: recorded heading, else velocity direction,
/// else direction of the neighbouring position difference.
fn robot_headings(robot: &Trajectory) -> Vec<f64> {
    let s = &robot.samples;
    (0..s.len())
        .map(|i| {
            if let Some(h) = s[i].heading {
                return h;
            }
            if let Some((vx, vy)) = s[i].velocity() {
                if vx.hypot(vy) > 0.0 {
                    return vy.atan2(vx);
                }
            }
            let (a, b) = if i + 1 < s.len() {
                (i, i + 1)
            } else {
                (i - 1, i)
            };
            (s[b].y - s[a].y).atan2(s[b].x - s[a].x)
        })
        .collect()
}

fn robot_frame_to_world(trial: &TrialRecord) -> Result<Trajectory, EncounterError> {
    let robot = &trial.robot;
    let headings = robot_headings(robot);
    let (t0, t1) = (robot.samples[0].t, robot.samples[robot.len() - 1].t);
    let mut samples = Vec::with_capacity(trial.pedestrian.len());
    for p in &trial.pedestrian.samples {
        if p.t < t0 || p.t > t1 {
            return Err(EncounterError::FrameConversion {
                trial_id: trial.trial_id.clone(),
                message: format!("pedestrian sample at t={} outside robot time range", p.t),
            });
        }
        let j = robot
            .samples
            .partition_point(|s| s.t <= p.t)
            .clamp(1, robot.len() - 1);
        let (a, b) = (&robot.samples[j - 1], &robot.samples[j]);
        let w = (p.t - a.t) / (b.t - a.t);
        let x = a.x + w * (b.x - a.x);
        let y = a.y + w * (b.y - a.y);
        let mut dh = headings[j] - headings[j - 1];
        dh = (dh + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU) - std::f64::consts::PI;
        let h = headings[j - 1] + w * dh;
        let (sin, cos) = h.sin_cos();
        // Relative velocities are dropped: they would need the robot's yaw
        // rate; downstream differencing recovers world velocities.
        samples.push(TrajectorySample::new(
            p.t,
            x + cos * p.x - sin * p.y,
            y + sin * p.x + cos * p.y,
        ));
    }
    Ok(Trajectory::new(samples))
}

/// Reads a `t,x,y,vx,vy,heading` trajectory file. Only `t`, `x`, `y` are required columns.
pub fn read_trajectory(path: &Path) -> Result<Trajectory, EncounterError> {
    let mut reader = open_csv(path)?;
    let headers = reader
        .headers()
        .map_err(|source| csv_err(path, source))?
        .clone();
    let ct = column(&headers, "t", path)?;
    let cx = column(&headers, "x", path)?;
    let cy = column(&headers, "y", path)?;
    let optional = |name: &str| headers.iter().position(|h| h == name);
    let (cvx, cvy, ch) = (optional("vx"), optional("vy"), optional("heading"));

    let mut samples = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|source| csv_err(path, source))?;
        let row = i + 2;
        let num = |c: usize, name: &str| -> Result<f64, EncounterError> {
            parse_f64(record.get(c).unwrap_or("")).map_err(|m| EncounterError::Parse {
                path: path.to_path_buf(),
                row,
                message: format!("{name}: {m}"),
            })
        };
        let opt = |c: Option<usize>, name: &str| -> Result<Option<f64>, EncounterError> {
            match c.and_then(|c| record.get(c)).map(str::trim) {
                None | Some("") => Ok(None),
                Some(_) => num(c.unwrap(), name).map(Some),
            }
        };
        samples.push(TrajectorySample {
            t: num(ct, "t")?,
            x: num(cx, "x")?,
            y: num(cy, "y")?,
            vx: opt(cvx, "vx")?,
            vy: opt(cvy, "vy")?,
            heading: opt(ch, "heading")?,
        });
    }
    Ok(Trajectory::new(samples))
}

pub fn write_trajectory(path: &Path, trajectory: &Trajectory) -> Result<(), EncounterError> {
    let mut writer = csv::Writer::from_path(path).map_err(|source| csv_err(path, source))?;
    writer
        .write_record(TRAJECTORY_HEADER)
        .map_err(|source| csv_err(path, source))?;
    for s in &trajectory.samples {
        writer
            .write_record([
                fmt_f64(s.t),
                fmt_f64(s.x),
                fmt_f64(s.y),
                fmt_opt(s.vx),
                fmt_opt(s.vy),
                fmt_opt(s.heading),
            ])
            .map_err(|source| csv_err(path, source))?;
    }
    writer.flush().map_err(|source| io_err(path, source))
}

/// Writes `dataset` under the directory `dir` (created if needed).
pub fn write_dataset(
    dataset: &EncounterDataset,
    dir: &Path,
    format: DatasetFormat,
) -> Result<(), EncounterError> {
    fs::create_dir_all(dir).map_err(|source| io_err(dir, source))?;
    match format {
        DatasetFormat::TrialsCsv => write_trials_csv(dataset, dir)?,
        DatasetFormat::TrialsDir => write_trials_dir(dataset, dir)?,
    }
    let prov_path = dir.join(PROVENANCE_FILE);
    let text = serde_json::to_string_pretty(&dataset.provenance).map_err(|source| {
        EncounterError::Json {
            path: prov_path.clone(),
            source,
        }
    })?;
    fs::write(&prov_path, text + "\n").map_err(|source| io_err(&prov_path, source))
}

fn write_trials_csv(dataset: &EncounterDataset, dir: &Path) -> Result<(), EncounterError> {
    let traj_dir = dir.join("trajectories");
    fs::create_dir_all(&traj_dir).map_err(|source| io_err(&traj_dir, source))?;
    let index = dir.join(TRIALS_INDEX);
    let mut writer = csv::Writer::from_path(&index).map_err(|source| csv_err(&index, source))?;
    writer
        .write_record(TRIALS_HEADER)
        .map_err(|source| csv_err(&index, source))?;
    for (i, trial) in dataset.trials().iter().enumerate() {
        let stem = file_stem(i, &trial.trial_id);
        let robot_file = format!("trajectories/{stem}_robot.csv");
        let ped_file = format!("trajectories/{stem}_pedestrian.csv");
        write_trajectory(&dir.join(&robot_file), &trial.robot)?;
        write_trajectory(&dir.join(&ped_file), &trial.pedestrian)?;
        writer
            .write_record([
                trial.trial_id.as_str(),
                trial.participant_id.as_str(),
                &trial.trial_index.to_string(),
                trial.speed_group.as_str(),
                &trial.reported_comfort.to_string(),
                if trial.lateral_valid { "true" } else { "false" },
                &robot_file,
                &ped_file,
            ])
            .map_err(|source| csv_err(&index, source))?;
    }
    writer.flush().map_err(|source| io_err(&index, source))
}

fn write_trials_dir(dataset: &EncounterDataset, dir: &Path) -> Result<(), EncounterError> {
    for (i, trial) in dataset.trials().iter().enumerate() {
        let sub = dir.join(file_stem(i, &trial.trial_id));
        fs::create_dir_all(&sub).map_err(|source| io_err(&sub, source))?;
        let meta = TrialMeta {
            trial_id: trial.trial_id.clone(),
            participant_id: trial.participant_id.clone(),
            trial_index: i64::from(trial.trial_index),
            speed_group: trial.speed_group,
            reported_comfort: i64::from(trial.reported_comfort),
            lateral_valid: trial.lateral_valid,
            pedestrian_frame: PedestrianFrame::World,
        };
        let meta_path = sub.join("meta.json");
        let text = serde_json::to_string_pretty(&meta).map_err(|source| EncounterError::Json {
            path: meta_path.clone(),
            source,
        })?;
        fs::write(&meta_path, text + "\n").map_err(|source| io_err(&meta_path, source))?;
        write_trajectory(&sub.join("robot.csv"), &trial.robot)?;
        write_trajectory(&sub.join("pedestrian.csv"), &trial.pedestrian)?;
    }
    Ok(())
}

/// Directory-safe name that also preserves dataset order when sorted.
fn file_stem(index: usize, trial_id: &str) -> String {
    let safe: String = trial_id
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect();
    format!("{index:05}_{safe}")
}

fn read_provenance(path: &Path) -> Result<BTreeMap<String, String>, EncounterError> {
    if !path.is_file() {
        return Ok(BTreeMap::new());
    }
    let text = fs::read_to_string(path).map_err(|source| io_err(path, source))?;
    serde_json::from_str(&text).map_err(|source| EncounterError::Json {
        path: path.to_path_buf(),
        source,
    })
}

fn open_csv(path: &Path) -> Result<csv::Reader<fs::File>, EncounterError> {
    let file = fs::File::open(path).map_err(|source| io_err(path, source))?;
    Ok(csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file))
}

fn column(headers: &csv::StringRecord, name: &str, path: &Path) -> Result<usize, EncounterError> {
    headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| EncounterError::MissingColumn {
            path: path.to_path_buf(),
            column: name.to_string(),
        })
}

fn parse_f64(cell: &str) -> Result<f64, String> {
    let cell = cell.trim();
    if cell.is_empty() {
        return Err("empty cell".to_string());
    }
    cell.parse::<f64>().map_err(|e| format!("`{cell}`: {e}"))
}

fn parse_bool(cell: &str) -> Result<bool, String> {
    match cell.trim().to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        other => Err(format!("lateral_valid: `{other}` is not a boolean")),
    }
}

/// Shortest decimal representation that parses back to the same value.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn io_err(path: &Path, source: std::io::Error) -> EncounterError {
    EncounterError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path, source: csv::Error) -> EncounterError {
    EncounterError::Csv {
        path: PathBuf::from(path),
        source,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encounter::Role;

    fn sample_dataset() -> EncounterDataset {
        let robot = Trajectory::new(
            (0..20)
                .map(|i| {
                    let t = i as f64 * 0.05;
                    TrajectorySample::new(t, 1.4 * t - 2.0, 0.0)
                        .with_velocity(1.4, 0.0)
                        .with_heading(0.0)
                })
                .collect(),
        );
        let pedestrian = Trajectory::new(
            (0..20)
                .map(|i| {
                    let t = i as f64 * 0.05 + 0.01;
                    TrajectorySample::new(t, 2.0 - 1.3 * t, 0.9 + 1e-3 * t)
                })
                .collect(),
        );
        let mk = |id: &str, comfort: u8, lateral_valid: bool| TrialRecord {
            trial_id: id.to_string(),
            participant_id: "p 1".to_string(),
            trial_index: 2,
            speed_group: SpeedGroup::R28,
            robot: robot.clone(),
            pedestrian: pedestrian.clone(),
            reported_comfort: comfort,
            lateral_valid,
        };
        let mut provenance = BTreeMap::new();
        provenance.insert("source".to_string(), "unit-test".to_string());
        EncounterDataset::new(vec![mk("t/1", 4, true), mk("t2", 2, false)], provenance).unwrap()
    }

    #[test]
    fn round_trip_both_formats() {
        let ds = sample_dataset();
        for format in [DatasetFormat::TrialsCsv, DatasetFormat::TrialsDir] {
            let dir = tempfile::tempdir().unwrap();
            write_dataset(&ds, dir.path(), format).unwrap();
            assert_eq!(DatasetFormat::detect(dir.path()), format);
            let back = load_dataset(dir.path(), format).unwrap();
            assert_eq!(back, ds);
        }
    }

    fn write_index(dir: &Path, rows: &[&str]) {
        let mut text = TRIALS_HEADER.join(",");
        text.push('\n');
        for r in rows {
            text.push_str(r);
            text.push('\n');
        }
        fs::write(dir.join(TRIALS_INDEX), text).unwrap();
    }

    fn write_line(path: &Path, times: &[f64]) {
        let mut text = String::from("t,x,y,vx,vy,heading\n");
        for t in times {
            text.push_str(&format!("{t},{},0,,,\n", t * 1.4));
        }
        fs::write(path, text).unwrap();
    }

    #[test]
    fn comfort_six_is_rejected_with_trial_id() {
        let dir = tempfile::tempdir().unwrap();
        write_line(&dir.path().join("r.csv"), &[0.0, 0.1, 0.2]);
        write_index(dir.path(), &["bad,p1,1,R14,6,true,r.csv,r.csv"]);
        let err = load_dataset(dir.path(), DatasetFormat::TrialsCsv).unwrap_err();
        assert!(
            matches!(&err, EncounterError::ComfortOutOfRange { trial_id, value: 6 } if trial_id == "bad"),
            "{err}"
        );
    }

    #[test]
    fn decreasing_timestamps_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        write_line(&dir.path().join("r.csv"), &[0.0, 0.1, 0.2]);
        write_line(&dir.path().join("p.csv"), &[0.0, 0.2, 0.1]);
        write_index(dir.path(), &["x,p1,1,R14,3,true,r.csv,p.csv"]);
        let err = load_dataset(dir.path(), DatasetFormat::TrialsCsv).unwrap_err();
        assert!(matches!(
            err,
            EncounterError::NonMonotoneTime {
                role: Role::Pedestrian,
                index: 2,
                ..
            }
        ));
    }

    #[test]
    fn missing_column_is_named() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("r.csv"), "t,y\n0,0\n1,0\n").unwrap();
        write_index(dir.path(), &["x,p1,1,R14,3,true,r.csv,r.csv"]);
        let err = load_dataset(dir.path(), DatasetFormat::TrialsCsv).unwrap_err();
        assert!(matches!(err, EncounterError::MissingColumn { column, .. } if column == "x"));
    }

    #[test]
    fn unparseable_trajectory_row_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("r.csv"), "t,x,y\n0,0,0\n0.1,abc,0\n").unwrap();
        write_index(dir.path(), &["x,p1,1,R14,3,true,r.csv,r.csv"]);
        let err = load_dataset(dir.path(), DatasetFormat::TrialsCsv).unwrap_err();
        assert!(matches!(err, EncounterError::Parse { row: 3, .. }), "{err}");
    }

    #[test]
    fn robot_frame_pedestrian_is_converted_and_tagged() {
        let dir = tempfile::tempdir().unwrap();
        // Robot at (1, 1) facing +y; pedestrian 2 m straight ahead.
        fs::write(
            dir.path().join("r.csv"),
            "t,x,y,vx,vy,heading\n0,1,1,,,1.5707963267948966\n1,1,1,,,1.5707963267948966\n",
        )
        .unwrap();
        fs::write(dir.path().join("p.csv"), "t,x,y\n0,2,0\n1,2,0.5\n").unwrap();
        let mut text = TRIALS_HEADER.join(",");
        text.push_str(",pedestrian_frame\nx,p1,1,R14,3,true,r.csv,p.csv,robot\n");
        fs::write(dir.path().join(TRIALS_INDEX), text).unwrap();
        let ds = load_dataset(dir.path(), DatasetFormat::TrialsCsv).unwrap();
        let p = &ds.trials()[0].pedestrian.samples;
        assert!((p[0].x - 1.0).abs() < 1e-12 && (p[0].y - 3.0).abs() < 1e-12);
        assert!((p[1].x - 0.5).abs() < 1e-12 && (p[1].y - 3.0).abs() < 1e-12);
        assert_eq!(
            ds.provenance
                .get("pedestrian_frame_conversion")
                .map(String::as_str),
            Some("robot->world: x")
        );
    }

    #[test]
    fn loading_does_not_touch_files() {
        let ds = sample_dataset();
        let dir = tempfile::tempdir().unwrap();
        write_dataset(&ds, dir.path(), DatasetFormat::TrialsDir).unwrap();
        let snapshot = |p: &Path| {
            let mut v: Vec<(PathBuf, Vec<u8>)> = walk(p)
                .into_iter()
                .map(|f| {
                    let bytes = fs::read(&f).unwrap();
                    (f, bytes)
                })
                .collect();
            v.sort();
            v
        };
        let before = snapshot(dir.path());
        load_dataset(dir.path(), DatasetFormat::TrialsDir).unwrap();
        assert_eq!(before, snapshot(dir.path()));
    }

    fn walk(dir: &Path) -> Vec<PathBuf> {
        let mut out = Vec::new();
        for entry in fs::read_dir(dir).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                out.extend(walk(&p));
            } else {
                out.push(p);
            }
        }
        out
    }
}
