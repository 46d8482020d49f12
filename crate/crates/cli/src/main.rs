//! `pedcomfort`: feature extraction, comfort prediction, evaluation and
//! synthetic data generation for robot-pedestrian encounters.
//!
//! Exit codes: 0 success, 2 input error, 3 computation error.

mod output;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use pedcomfort::encounter::{load_dataset, write_dataset, DatasetFormat};
use pedcomfort::evaluation::{evaluate, labels_from_dataset, read_labels_csv, EvaluationReport};
use pedcomfort::kinematics::{
    extract_all, read_features_csv, write_features_csv, KinematicFeatures,
};
use pedcomfort::predictors::{predict_all, write_predictions_csv};
use pedcomfort::synthgen::{generate_dataset, ScenarioConfig, ScenarioSweep};
use pedcomfort::AnalysisConfig;

use output::{manifest_path, write_atomic, write_dir_atomic, RunManifest};

#[derive(Parser)]
#[command(name = "pedcomfort", version, about)]
struct Cli {
    /// Analysis configuration (JSON); defaults are used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every random choice made by the command.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file (directory for `simulate`); stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Layout {
    TrialsCsv,
    TrialsDir,
}

impl From<Layout> for DatasetFormat {
    fn from(l: Layout) -> Self {
        match l {
            Layout::TrialsCsv => DatasetFormat::TrialsCsv,
            Layout::TrialsDir => DatasetFormat::TrialsDir,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Extract the six kinematic variables of every trial in a dataset.
    Features {
        dataset: PathBuf,
        /// Dataset layout; detected from the directory contents by default.
        #[arg(long, value_enum)]
        dataset_format: Option<Layout>,
    },
    /// Run the three comfort predictors on a feature CSV.
    Predict { features: PathBuf },
    /// Evaluate features against comfort labels (a CSV or a dataset directory).
    Evaluate { features: PathBuf, labels: PathBuf },
    /// Generate a synthetic dataset from a scenario or sweep JSON.
    Simulate {
        scenario: Option<PathBuf>,
        /// Number of trials; one per sweep scenario by default.
        #[arg(long)]
        n_trials: Option<usize>,
        #[arg(long, value_enum, default_value = "trials-dir")]
        dataset_format: Layout,
    },
    /// Render an evaluation report as a table (or CSV/JSON).
    Report { report: PathBuf },
}

enum Failure {
    Input(anyhow::Error),
    Compute(anyhow::Error),
}

type Outcome<T> = Result<T, Failure>;

fn input<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Input(e.into())
}

fn compute<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Compute(e.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Compute(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: &Cli) -> Outcome<()> {
    let config = match &cli.config {
        Some(path) => AnalysisConfig::load(path).map_err(input)?,
        None => AnalysisConfig::default(),
    };
    match &cli.command {
        Command::Features {
            dataset,
            dataset_format,
        } => cmd_features(cli, &config, dataset, *dataset_format),
        Command::Predict { features } => cmd_predict(cli, &config, features),
        Command::Evaluate { features, labels } => cmd_evaluate(cli, &config, features, labels),
        Command::Simulate {
            scenario,
            n_trials,
            dataset_format,
        } => cmd_simulate(cli, scenario.as_deref(), *n_trials, *dataset_format),
        Command::Report { report } => cmd_report(cli, report),
    }
}

fn start(cli: &Cli, name: &str, config: &AnalysisConfig) -> Outcome<RunManifest> {
    let mut m = RunManifest::start(name, cli.seed);
    m.config("analysis", config).map_err(compute)?;
    if let Some(path) = &cli.config {
        m.input(path).map_err(input)?;
    }
    Ok(m)
}

/// Writes `bytes` to `--out` (with its manifest) or to stdout.
fn emit(cli: &Cli, bytes: &[u8], mut manifest: RunManifest) -> Outcome<()> {
    match &cli.out {
        Some(path) => {
            write_atomic(path, bytes).map_err(compute)?;
            manifest.output(path).map_err(compute)?;
            manifest.finish(&manifest_path(path)).map_err(compute)
        }
        None => {
            use std::io::Write;
            std::io::stdout().write_all(bytes).map_err(compute)
        }
    }
}

fn read_features(path: &Path) -> Outcome<Vec<KinematicFeatures>> {
    let file = std::fs::File::open(path)
        .with_context(|| format!("opening features {}", path.display()))
        .map_err(input)?;
    read_features_csv(file)
        .with_context(|| format!("reading features {}", path.display()))
        .map_err(input)
}

fn cmd_features(
    cli: &Cli,
    config: &AnalysisConfig,
    dataset: &Path,
    layout: Option<Layout>,
) -> Outcome<()> {
    let mut manifest = start(cli, "features", config)?;
    if !dataset.exists() {
        return Err(input(anyhow!(
            "dataset {} does not exist",
            dataset.display()
        )));
    }
    let format = layout.map_or_else(|| DatasetFormat::detect(dataset), DatasetFormat::from);
    let ds = load_dataset(dataset, format)
        .with_context(|| format!("loading dataset {}", dataset.display()))
        .map_err(input)?;
    manifest.input(dataset).map_err(input)?;

    let results = extract_all(ds.trials(), &config.kinematics);
    let mut rows = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for (trial, r) in ds.trials().iter().zip(results) {
        match r {
            Ok(f) => rows.push(f),
            Err(e) => failures.push(format!("{}: {e}", trial.trial_id)),
        }
    }
    if !failures.is_empty() {
        for f in &failures {
            eprintln!("trial {f}");
        }
        return Err(compute(anyhow!(
            "{} of {} trials failed",
            failures.len(),
            ds.len()
        )));
    }

    let bytes = match cli.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut buf = Vec::new();
            write_features_csv(&mut buf, &rows).map_err(compute)?;
            buf
        }
        Format::Json => (serde_json::to_string_pretty(&rows).map_err(compute)? + "\n").into_bytes(),
    };
    emit(cli, &bytes, manifest)
}

fn cmd_predict(cli: &Cli, config: &AnalysisConfig, features: &Path) -> Outcome<()> {
    let mut manifest = start(cli, "predict", config)?;
    let rows = read_features(features)?;
    manifest.input(features).map_err(input)?;
    let sets: Vec<_> = rows
        .iter()
        .map(|f| predict_all(f, &config.predictors))
        .collect();
    let bytes = match cli.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut buf = Vec::new();
            write_predictions_csv(&mut buf, &sets).map_err(compute)?;
            buf
        }
        Format::Json => (serde_json::to_string_pretty(&sets).map_err(compute)? + "\n").into_bytes(),
    };
    emit(cli, &bytes, manifest)
}

fn cmd_evaluate(cli: &Cli, config: &AnalysisConfig, features: &Path, labels: &Path) -> Outcome<()> {
    let mut manifest = start(cli, "evaluate", config)?;
    let rows = read_features(features)?;
    manifest.input(features).map_err(input)?;
    let label_map = if labels.is_dir() {
        let ds = load_dataset(labels, DatasetFormat::detect(labels))
            .with_context(|| format!("loading labels from dataset {}", labels.display()))
            .map_err(input)?;
        labels_from_dataset(&ds)
    } else {
        let file = std::fs::File::open(labels)
            .with_context(|| format!("opening labels {}", labels.display()))
            .map_err(input)?;
        read_labels_csv(file)
            .with_context(|| format!("reading labels {}", labels.display()))
            .map_err(input)?
    };
    manifest.input(labels).map_err(input)?;
    let report = evaluate(&rows, &label_map, config, cli.seed).map_err(compute)?;
    let bytes = match cli.format.unwrap_or(Format::Json) {
        Format::Json => report.to_json(),
        Format::Csv => report_csv(&report),
    };
    emit(cli, bytes.as_bytes(), manifest)
}

fn load_sweep(path: &Path) -> Outcome<ScenarioSweep> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading scenario {}", path.display()))
        .map_err(input)?;
    match serde_json::from_str::<ScenarioSweep>(&text) {
        Ok(s) => Ok(s),
        Err(sweep_err) => match serde_json::from_str::<ScenarioConfig>(&text) {
            Ok(base) => Ok(ScenarioSweep {
                base,
                robot_speeds: Vec::new(),
                lateral_offsets: Vec::new(),
                avoidance_radii: Vec::new(),
            }),
            Err(_) => Err(input(
                anyhow!(sweep_err).context(format!("parsing scenario {}", path.display())),
            )),
        },
    }
}

fn cmd_simulate(
    cli: &Cli,
    scenario: Option<&Path>,
    n_trials: Option<usize>,
    layout: Layout,
) -> Outcome<()> {
    let out = cli
        .out
        .as_deref()
        .ok_or_else(|| input(anyhow!("simulate needs --out <directory>")))?;
    let sweep = match scenario {
        Some(p) => load_sweep(p)?,
        None => ScenarioSweep::default(),
    };
    for s in sweep.scenarios() {
        s.validate().map_err(input)?;
    }
    let mut manifest = RunManifest::start("simulate", cli.seed);
    manifest.config("scenario", &sweep).map_err(compute)?;
    if let Some(p) = scenario {
        manifest.input(p).map_err(input)?;
    }
    let n = n_trials.unwrap_or_else(|| sweep.scenarios().len());
    let (ds, truths) = generate_dataset(&sweep, n, cli.seed).map_err(compute)?;
    let truth_rows: Vec<_> = ds
        .trials()
        .iter()
        .zip(&truths)
        .map(|(t, g)| g.to_features(&t.trial_id))
        .collect();
    write_dir_atomic(out, |dir| {
        write_dataset(&ds, dir, layout.into())?;
        let mut buf = Vec::new();
        write_features_csv(&mut buf, &truth_rows)?;
        std::fs::write(dir.join("ground_truth.csv"), buf)?;
        Ok(())
    })
    .map_err(compute)?;
    manifest.output(out).map_err(compute)?;
    manifest.finish(&out.join("manifest.json")).map_err(compute)
}

fn cmd_report(cli: &Cli, path: &Path) -> Outcome<()> {
    let manifest = RunManifest::start("report", cli.seed);
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading report {}", path.display()))
        .map_err(input)?;
    let report: EvaluationReport = serde_json::from_str(&text)
        .with_context(|| format!("parsing report {}", path.display()))
        .map_err(input)?;
    let mut manifest = manifest;
    manifest
        .config("analysis", &report.config)
        .map_err(compute)?;
    manifest.input(path).map_err(input)?;
    let rendered = match cli.format {
        None => report_text(&report),
        Some(Format::Csv) => report_csv(&report),
        Some(Format::Json) => report.to_json(),
    };
    emit(cli, rendered.as_bytes(), manifest)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn opt3(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.3}"))
}

/// Long-format CSV: `section,name,key,value`.
fn report_csv(r: &EvaluationReport) -> String {
    let mut s = String::from("section,name,key,value\n");
    let mut row = |section: &str, name: &str, key: &str, value: String| {
        let _ = writeln!(s, "{section},{name},{key},{value}");
    };
    row("summary", "", "n_features", r.n_features.to_string());
    row("summary", "", "n_labeled", r.n_labeled.to_string());
    row("summary", "", "seed", r.seed.to_string());
    for (var, d) in &r.dcor {
        row("dcor", var.key(), "n", d.n.to_string());
        row("dcor", var.key(), "dcor", opt(d.dcor));
        row("dcor", var.key(), "p_value", opt(d.p_value));
    }
    for (p, rep) in &r.predictors {
        let name = p.key();
        let n = rep.contingency.n;
        row("predictor", name, "n", rep.n.to_string());
        row(
            "predictor",
            name,
            "not_applicable",
            rep.not_applicable.to_string(),
        );
        for (key, v) in [
            ("n00", n[0][0]),
            ("n01", n[0][1]),
            ("n10", n[1][0]),
            ("n11", n[1][1]),
        ] {
            row("predictor", name, key, v.to_string());
        }
        row(
            "predictor",
            name,
            "chi_square",
            opt(rep.chi_square.map(|c| c.statistic)),
        );
        row(
            "predictor",
            name,
            "chi_square_p",
            opt(rep.chi_square.map(|c| c.p_value)),
        );
        row(
            "predictor",
            name,
            "chi_square_yates",
            opt(rep.chi_square_yates.map(|c| c.statistic)),
        );
        row(
            "predictor",
            name,
            "chi_square_yates_p",
            opt(rep.chi_square_yates.map(|c| c.p_value)),
        );
        row(
            "predictor",
            name,
            "odds_ratio",
            rep.odds_ratio.ratio.to_string(),
        );
        for (suffix, m) in [("", &rep.metrics), ("_transposed", &rep.metrics_transposed)] {
            for (key, v) in [
                ("accuracy", m.accuracy),
                ("precision", m.precision),
                ("recall", m.recall),
                ("specificity", m.specificity),
                ("f1", m.f1),
            ] {
                row("predictor", name, &format!("{key}{suffix}"), opt(v));
            }
        }
    }
    s
}

fn report_text(r: &EvaluationReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{} labeled trials of {} feature rows (seed {}, {} permutations)\n",
        r.n_labeled, r.n_features, r.seed, r.config.evaluation.n_permutations
    );
    let _ = writeln!(s, "{:<8} {:>5} {:>8} {:>8}", "variable", "n", "dCor", "p");
    for (var, d) in &r.dcor {
        let _ = writeln!(
            s,
            "{:<8} {:>5} {:>8} {:>8}",
            var.key(),
            d.n,
            opt3(d.dcor),
            opt3(d.p_value)
        );
    }
    let _ = writeln!(
        s,
        "\n{:<13} {:>4} {:>4} {:>4} {:>4} {:>4} {:>8} {:>8} {:>7} {:>6} {:>6} {:>6} {:>6} {:>6}",
        "predictor",
        "n",
        "TP",
        "FP",
        "FN",
        "TN",
        "chi2",
        "chi2(Y)",
        "OR",
        "acc",
        "prec",
        "rec",
        "specif",
        "F1"
    );
    for (p, rep) in &r.predictors {
        let n = rep.contingency.n;
        let m = &rep.metrics;
        let _ = writeln!(
            s,
            "{:<13} {:>4} {:>4} {:>4} {:>4} {:>4} {:>8} {:>8} {:>7.3} {:>6} {:>6} {:>6} {:>6} {:>6}",
            p.key(),
            rep.n,
            n[1][1],
            n[1][0],
            n[0][1],
            n[0][0],
            opt3(rep.chi_square.map(|c| c.statistic)),
            opt3(rep.chi_square_yates.map(|c| c.statistic)),
            rep.odds_ratio.ratio,
            opt3(m.accuracy),
            opt3(m.precision),
            opt3(m.recall),
            opt3(m.specificity),
            opt3(m.f1),
        );
    }
    s
}
