//! `celm reproduce`: rerun the benchmark table from a manifest and compare
//! against the reference numbers.

use std::path::Path;
use std::time::Instant;

use celm_core::celm::{fit_elm_baseline, CelmConfig};

use super::grid::{run_grid, GridJob};
use super::{evaluate, load_dataset, write_file, CliError};
use crate::jsonfmt::to_json;
use crate::report::{
    mean_sd, BaselineSummary, Manifest, ManifestEntry, ReproduceReport, ReproduceRow,
};

/// Accuracy half-width of the acceptance band, in percentage points.
const ETA_BAND: f64 = 5.0;
/// Network size must land within this factor of the reference, either way.
const K_BAND_FACTOR: f64 = 2.0;
/// The gap is called split-induced when the fixed-structure baseline drifts
/// by at least this fraction of the observed deviation, or by a full band.
const CAVEAT_FRACTION: f64 = 0.8;

fn skipped_row(entry: &ManifestEntry, reason: String) -> ReproduceRow {
    ReproduceRow {
        dataset: entry.name.clone(),
        status: format!("skipped: {reason}"),
        mean_k: 0.0,
        mean_deletions: 0.0,
        eta_o_mean: 0.0,
        eta_o_sd: 0.0,
        eta_a_mean: 0.0,
        eta_a_sd: 0.0,
        reference: entry.reference.celm,
        delta_eta_o: 0.0,
        in_band: false,
        baseline: None,
        notes: entry.notes.clone(),
        wall_time_ms: 0.0,
    }
}

/// Fixed-structure runs on the same split, sized `min(reference K, n_train)`.
fn run_baseline(
    ds: &celm_core::data::Dataset,
    entry: &ManifestEntry,
    seeds: &[u64],
) -> Result<BaselineSummary, CliError> {
    let k_eff = entry.reference.elm.k.min(entry.split.n_train);
    let (train, test) = super::split_and_normalize(ds, &entry.split)?;
    let mut etas = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let config = CelmConfig {
            seed,
            ..entry.config.clone()
        };
        let (net, _) = fit_elm_baseline(&train, k_eff, &config).map_err(CliError::numeric)?;
        etas.push(evaluate(&net, &test)?.eta_o);
    }
    let (mean_eta_o, sd_eta_o) = mean_sd(&etas);
    Ok(BaselineSummary {
        k: k_eff,
        mean_eta_o,
        sd_eta_o,
        ref_eta_o: entry.reference.elm.eta_o,
        deviation: mean_eta_o - entry.reference.elm.eta_o,
    })
}

fn run_entry(
    manifest_dir: &Path,
    entry: &ManifestEntry,
    seeds: &[u64],
) -> Result<ReproduceRow, CliError> {
    let start = Instant::now();
    let data_path = manifest_dir.join(&entry.file);
    if !data_path.exists() {
        return Ok(skipped_row(
            entry,
            format!("missing file {}", data_path.display()),
        ));
    }
    let ds = load_dataset(&data_path)?;

    let mut notes = entry.notes.clone();
    let mut add_note = |s: String| {
        if !notes.is_empty() {
            notes.push_str("; ");
        }
        notes.push_str(&s);
    };
    if ds.len() != entry.rows {
        add_note(format!("rows {} != manifest {}", ds.len(), entry.rows));
    }
    if ds.n_features() != entry.features {
        add_note(format!(
            "features {} != manifest {}",
            ds.n_features(),
            entry.features
        ));
    }
    if ds.n_classes != entry.classes {
        add_note(format!(
            "classes {} != manifest {}",
            ds.n_classes, entry.classes
        ));
    }
    entry.config.validate().map_err(CliError::data)?;

    let job = GridJob {
        name: entry.name.clone(),
        ds: &ds,
        split: entry.split,
        base: entry.config.clone(),
        grid: &entry.grid,
        seeds: seeds.to_vec(),
        oracle: false,
    };
    let grid_report = run_grid(&job)?;
    let baseline = run_baseline(&ds, entry, seeds)?;

    let reference = entry.reference.celm;
    let delta_eta_o = grid_report.mean_eta_o - reference.eta_o;
    let k_ok = grid_report.mean_k >= reference.k / K_BAND_FACTOR
        && grid_report.mean_k <= reference.k * K_BAND_FACTOR;
    let in_band = delta_eta_o.abs() <= ETA_BAND && k_ok;
    let split_induced = baseline.deviation.abs() >= CAVEAT_FRACTION * delta_eta_o.abs()
        || baseline.deviation.abs() >= ETA_BAND;
    let status = if in_band {
        "ok".to_string()
    } else if split_induced {
        format!(
            "caveat: split-induced; fixed-K baseline deviates {:+.2} from its reference {:.2}",
            baseline.deviation, baseline.ref_eta_o
        )
    } else {
        "out-of-band".to_string()
    };

    Ok(ReproduceRow {
        dataset: entry.name.clone(),
        status,
        mean_k: grid_report.mean_k,
        mean_deletions: grid_report.mean_deletions,
        eta_o_mean: grid_report.mean_eta_o,
        eta_o_sd: grid_report.sd_eta_o,
        eta_a_mean: grid_report.mean_eta_a,
        eta_a_sd: grid_report.sd_eta_a,
        reference,
        delta_eta_o,
        in_band,
        baseline: Some(baseline),
        notes,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

fn markdown_table(report: &ReproduceReport) -> String {
    let mut md = String::new();
    md.push_str("# Benchmark reproduction\n\n");
    md.push_str(&format!(
        "{} seeds per dataset; thresholds selected per dataset by grid search on an inner validation split.\n\n",
        report.seeds.len()
    ));
    md.push_str(
        "| Dataset | K | Deletions | eta_o (%) | eta_a (%) | Ref K | Ref eta_o | Delta | Baseline dev | Status |\n",
    );
    md.push_str(
        "|---|---|---|---|---|---|---|---|---|---|\n",
    );
    for row in &report.rows {
        let baseline_dev = row
            .baseline
            .as_ref()
            .map(|b| format!("{:+.2}", b.deviation))
            .unwrap_or_else(|| "-".to_string());
        md.push_str(&format!(
            "| {} | {:.1} | {:.1} | {:.2} ± {:.2} | {:.2} ± {:.2} | {:.0} | {:.2} | {:+.2} | {} | {} |\n",
            row.dataset,
            row.mean_k,
            row.mean_deletions,
            row.eta_o_mean,
            row.eta_o_sd,
            row.eta_a_mean,
            row.eta_a_sd,
            row.reference.k,
            row.reference.eta_o,
            row.delta_eta_o,
            baseline_dev,
            row.status,
        ));
    }
    let noted: Vec<&ReproduceRow> = report.rows.iter().filter(|r| !r.notes.is_empty()).collect();
    if !noted.is_empty() {
        md.push('\n');
        for row in noted {
            md.push_str(&format!("- {}: {}\n", row.dataset, row.notes));
        }
    }
    md
}

pub fn cmd_reproduce(manifest_path: &Path, out_dir: &Path) -> Result<ReproduceReport, CliError> {
    let start = Instant::now();
    let content = std::fs::read_to_string(manifest_path).map_err(|e| {
        CliError::data(format!("cannot read manifest {}: {e}", manifest_path.display()))
    })?;
    let manifest: Manifest = serde_json::from_str(&content).map_err(|e| {
        CliError::data(format!(
            "invalid manifest {}: {e}",
            manifest_path.display()
        ))
    })?;
    if manifest.seeds.is_empty() {
        return Err(CliError::data("manifest lists no seeds"));
    }
    if manifest.datasets.is_empty() {
        return Err(CliError::data("manifest lists no datasets"));
    }
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::data(format!("cannot create {}: {e}", out_dir.display())))?;
    let manifest_dir = manifest_path.parent().unwrap_or(Path::new("."));

    let mut rows = Vec::with_capacity(manifest.datasets.len());
    for entry in &manifest.datasets {
        eprintln!(
            "reproduce: {} ({} tuples x {} seeds)",
            entry.name,
            entry.grid.tuples().len(),
            manifest.seeds.len()
        );
        let row = run_entry(manifest_dir, entry, &manifest.seeds)?;
        println!(
            "{} eta_o={:.2}±{:.2} K={:.1} deletions={:.1} delta={:+.2} status={}",
            row.dataset,
            row.eta_o_mean,
            row.eta_o_sd,
            row.mean_k,
            row.mean_deletions,
            row.delta_eta_o,
            row.status
        );
        rows.push(row);
    }

    let report = ReproduceReport {
        seeds: manifest.seeds,
        rows,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    write_file(
        &out_dir.join("reproduction.json"),
        &to_json(&report).map_err(CliError::numeric)?,
    )?;
    write_file(&out_dir.join("reproduction.md"), &markdown_table(&report))?;
    println!("wrote {}", out_dir.join("reproduction.md").display());
    Ok(report)
}
