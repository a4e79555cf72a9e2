//! `celm train`: one train/evaluate run from a config file.

use std::path::Path;

use celm_core::celm::fit;

use super::{dataset_name, load_dataset, run_once, split_and_normalize, write_file, CliError};
use crate::jsonfmt::to_json;
use crate::report::{RunReport, RunSpec};

pub fn cmd_train(
    data: &Path,
    config: &Path,
    out: &Path,
    seed: Option<u64>,
    steps_out: Option<&Path>,
) -> Result<RunReport, CliError> {
    let mut spec: RunSpec = super::read_config(config, "config")?;
    if let Some(s) = seed {
        spec.split.seed = s;
        spec.celm.seed = s;
    }
    spec.celm.validate().map_err(CliError::usage)?;

    let ds = load_dataset(data)?;
    let name = dataset_name(data);
    let report = run_once(&name, &ds, &spec.split, &spec.celm)?;

    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    write_file(out, &to_json(&report).map_err(CliError::numeric)?)?;

    if let Some(steps_path) = steps_out {
        // Refit to capture the per-step log; same seed, same stream, so the
        // steps are exactly those of the reported run.
        let (train, _) = split_and_normalize(&ds, &spec.split)?;
        let (_, train_report) = fit(&train, &spec.celm).map_err(CliError::numeric)?;
        write_file(steps_path, &to_json(&train_report).map_err(CliError::numeric)?)?;
    }

    println!(
        "{} eta_o={:.2} eta_a={:.2} K={} additions={} deletions={} seed={}",
        out.display(),
        report.eta_o,
        report.eta_a,
        report.final_k,
        report.additions,
        report.deletions,
        report.seed
    );
    Ok(report)
}
