//! Subcommand implementations and the plumbing they share.

pub mod grid;
pub mod reproduce;
pub mod train;
pub mod wundt;

use std::fmt;
use std::path::Path;
use std::time::Instant;

use celm_core::celm::{fit, predict_dataset, CelmConfig};
use celm_core::data::{load_csv, normalize_apply, normalize_fit, split, Dataset, SplitSpec};
use celm_core::network::NetworkState;

use crate::metrics::{average_accuracy, overall_accuracy, per_class_accuracy};
use crate::report::RunReport;

/// Command failure carrying its exit code class: usage problems exit 2,
/// data problems 3, numerical failures 4.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Numeric(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }

    pub fn usage(e: impl fmt::Display) -> Self {
        CliError::Usage(e.to_string())
    }

    pub fn data(e: impl fmt::Display) -> Self {
        CliError::Data(e.to_string())
    }

    pub fn numeric(e: impl fmt::Display) -> Self {
        CliError::Numeric(e.to_string())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Data(msg) => write!(f, "{msg}"),
            CliError::Numeric(msg) => write!(f, "{msg}"),
        }
    }
}

impl std::error::Error for CliError {}

/// True when the first non-empty line looks like column names rather than
/// data, judged by whether every non-label field parses as a number.
pub fn sniff_header(path: &Path, label_column: Option<usize>) -> Result<bool, CliError> {
    let content = std::fs::read_to_string(path)
        .map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))?;
    let Some(line) = content.lines().find(|l| !l.trim().is_empty()) else {
        return Err(CliError::data(format!(
            "{} contains no data rows",
            path.display()
        )));
    };
    let fields: Vec<&str> = line.split(',').map(str::trim).collect();
    let label_idx = label_column.unwrap_or(fields.len().saturating_sub(1));
    Ok(fields
        .iter()
        .enumerate()
        .any(|(i, f)| i != label_idx && f.parse::<f64>().is_err()))
}

/// Loads a dataset, detecting an optional header line.
pub fn load_dataset(path: &Path) -> Result<Dataset, CliError> {
    let header = sniff_header(path, None)?;
    load_csv(path, None, header).map_err(CliError::data)
}

pub fn dataset_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Splits, normalizes on the training half, and returns both halves with
/// the stats that mapped them.
pub fn split_and_normalize(
    ds: &Dataset,
    spec: &SplitSpec,
) -> Result<(Dataset, Dataset), CliError> {
    let (train_raw, test_raw) = split(ds, spec).map_err(CliError::data)?;
    let stats = normalize_fit(&train_raw);
    Ok((
        normalize_apply(&train_raw, &stats),
        normalize_apply(&test_raw, &stats),
    ))
}

pub struct Evaluation {
    pub eta_o: f64,
    pub eta_a: f64,
    pub per_class: Vec<Option<f64>>,
    pub warnings: Vec<String>,
}

pub fn evaluate(net: &NetworkState, ds: &Dataset) -> Result<Evaluation, CliError> {
    let preds = predict_dataset(net, ds).map_err(CliError::numeric)?;
    let eta_o = overall_accuracy(&preds, &ds.labels).map_err(CliError::numeric)?;
    let (eta_a, warnings) =
        average_accuracy(&preds, &ds.labels, ds.n_classes).map_err(CliError::numeric)?;
    let per_class = per_class_accuracy(&preds, &ds.labels, ds.n_classes).map_err(CliError::numeric)?;
    Ok(Evaluation {
        eta_o,
        eta_a,
        per_class,
        warnings,
    })
}

/// One full train/evaluate run: split, normalize, fit, score both halves.
pub fn run_once(
    name: &str,
    ds: &Dataset,
    split_spec: &SplitSpec,
    celm: &CelmConfig,
) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let (train, test) = split_and_normalize(ds, split_spec)?;
    let (net, train_report) = fit(&train, celm).map_err(CliError::numeric)?;
    let test_eval = evaluate(&net, &test)?;
    let train_preds = predict_dataset(&net, &train).map_err(CliError::numeric)?;
    let train_eta_o = overall_accuracy(&train_preds, &train.labels).map_err(CliError::numeric)?;

    let mut warnings = train_report.warnings.clone();
    warnings.extend(test_eval.warnings);
    Ok(RunReport {
        dataset: name.to_string(),
        config: celm.clone(),
        split: *split_spec,
        seed: celm.seed,
        final_k: train_report.final_k,
        additions: train_report.additions,
        deletions: train_report.deletions,
        eta_o: test_eval.eta_o,
        eta_a: test_eval.eta_a,
        per_class: test_eval.per_class,
        train_eta_o,
        label_names: ds.label_names.clone(),
        norm_stats: train.norm_stats.clone().expect("train half was normalized"),
        warnings,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Writes a file, mapping failures to data errors naming the path.
pub fn write_file(path: &Path, content: &str) -> Result<(), CliError> {
    std::fs::write(path, content)
        .map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display())))
}

/// Reads and parses a JSON config-like file; parse problems are usage
/// errors, missing files are data errors.
pub fn read_config<T: serde::de::DeserializeOwned>(path: &Path, what: &str) -> Result<T, CliError> {
    let content = std::fs::read_to_string(path)
        .map_err(|e| CliError::data(format!("cannot read {what} {}: {e}", path.display())))?;
    serde_json::from_str(&content)
        .map_err(|e| CliError::usage(format!("invalid {what} {}: {e}", path.display())))
}
