//! Run configuration and report schemas shared by the subcommands.

use celm_core::celm::CelmConfig;
use celm_core::curiosity::CelmThresholds;
use celm_core::data::{NormStats, SplitSpec};
use serde::{Deserialize, Serialize};

/// Contents of a run config file: how to split the data and how to train.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    pub split: SplitSpec,
    #[serde(default)]
    pub celm: CelmConfig,
}

/// Outcome of one train/evaluate run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub dataset: String,
    pub config: CelmConfig,
    pub split: SplitSpec,
    pub seed: u64,
    pub final_k: usize,
    pub additions: usize,
    pub deletions: usize,
    pub eta_o: f64,
    pub eta_a: f64,
    /// Per-class test accuracy, `null` for classes absent from the test
    /// half; order follows `label_names`.
    pub per_class: Vec<Option<f64>>,
    pub train_eta_o: f64,
    pub label_names: Vec<String>,
    pub norm_stats: NormStats,
    pub warnings: Vec<String>,
    pub wall_time_ms: f64,
}

/// Threshold values to enumerate, one axis per trigger threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSpec {
    pub theta_n_add: Vec<f64>,
    pub theta_u: Vec<f64>,
    pub theta_s: Vec<f64>,
    pub theta_f: Vec<f64>,
    pub theta_n_del: Vec<f64>,
}

fn steps(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|i| lo + i as f64 * step).collect()
}

impl Default for GridSpec {
    /// The recommended threshold ranges, discretized at 0.1.
    fn default() -> Self {
        GridSpec {
            theta_n_add: steps(0.1, 0.5, 0.1),
            theta_u: steps(0.1, 0.3, 0.1),
            theta_s: steps(0.2, 0.9, 0.1),
            theta_f: steps(0.1, 0.3, 0.1),
            theta_n_del: steps(0.1, 0.8, 0.1),
        }
    }
}

impl GridSpec {
    /// Cartesian product of the axes, in axis-major order.
    pub fn tuples(&self) -> Vec<CelmThresholds> {
        let mut out = Vec::new();
        for &na in &self.theta_n_add {
            for &u in &self.theta_u {
                for &s in &self.theta_s {
                    for &f in &self.theta_f {
                        for &nd in &self.theta_n_del {
                            out.push(CelmThresholds {
                                theta_n_add: na,
                                theta_u: u,
                                theta_s: s,
                                theta_f: f,
                                theta_n_del: nd,
                                theta_s_del: None,
                            });
                        }
                    }
                }
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        let axes = [
            &self.theta_n_add,
            &self.theta_u,
            &self.theta_s,
            &self.theta_f,
            &self.theta_n_del,
        ];
        axes.iter().all(|axis| {
            !axis.is_empty() && axis.iter().all(|v| (0.0..=1.0).contains(v))
        })
    }
}

/// Validation score of one threshold tuple across seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub thresholds: CelmThresholds,
    pub mean_score: f64,
    pub sd_score: f64,
}

/// Outcome of a grid search plus the final per-seed runs of the winner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    pub dataset: String,
    /// "inner_validation" for the default protocol, "oracle_test" when the
    /// tuple was selected on test accuracy.
    pub selection: String,
    pub n_tuples: usize,
    pub seeds: Vec<u64>,
    pub best_thresholds: CelmThresholds,
    pub tuples: Vec<GridPoint>,
    pub runs: Vec<RunReport>,
    pub mean_eta_o: f64,
    pub sd_eta_o: f64,
    pub mean_eta_a: f64,
    pub sd_eta_a: f64,
    pub mean_k: f64,
    pub mean_deletions: f64,
    pub wall_time_ms: f64,
}

/// Reference numbers a reproduction row is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CelmReference {
    pub k: f64,
    pub eta_o: f64,
    pub eta_a: f64,
    pub deletions: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElmReference {
    pub k: usize,
    pub eta_o: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    pub celm: CelmReference,
    pub elm: ElmReference,
}

/// One dataset entry in the reproduction manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    /// Dataset path relative to the manifest file.
    pub file: String,
    pub rows: usize,
    pub features: usize,
    pub classes: usize,
    pub split: SplitSpec,
    pub grid: GridSpec,
    #[serde(default)]
    pub config: CelmConfig,
    pub reference: Reference,
    #[serde(default)]
    pub notes: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub seeds: Vec<u64>,
    pub datasets: Vec<ManifestEntry>,
}

/// Fixed-structure ELM run on the same splits, for judging whether an
/// accuracy gap is split-induced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineSummary {
    pub k: usize,
    pub mean_eta_o: f64,
    pub sd_eta_o: f64,
    pub ref_eta_o: f64,
    pub deviation: f64,
}

/// One row of the reproduction table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReproduceRow {
    pub dataset: String,
    pub status: String,
    pub mean_k: f64,
    pub mean_deletions: f64,
    pub eta_o_mean: f64,
    pub eta_o_sd: f64,
    pub eta_a_mean: f64,
    pub eta_a_sd: f64,
    pub reference: CelmReference,
    pub delta_eta_o: f64,
    pub in_band: bool,
    pub baseline: Option<BaselineSummary>,
    pub notes: String,
    pub wall_time_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReproduceReport {
    pub seeds: Vec<u64>,
    pub rows: Vec<ReproduceRow>,
    pub wall_time_ms: f64,
}

/// Mean and (sample) standard deviation of a value list.
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn default_grid_enumerates_the_recommended_ranges() {
        let grid = GridSpec::default();
        assert_eq!(grid.theta_n_add.len(), 5);
        assert_eq!(grid.theta_u.len(), 3);
        assert_eq!(grid.theta_s.len(), 8);
        assert_eq!(grid.theta_f.len(), 3);
        assert_eq!(grid.theta_n_del.len(), 8);
        assert_eq!(grid.tuples().len(), 5 * 3 * 8 * 3 * 8);
        assert!(grid.is_valid());
    }

    #[test]
    fn grid_validity_rejects_empty_or_out_of_range_axes() {
        let mut grid = GridSpec::default();
        grid.theta_u.clear();
        assert!(!grid.is_valid());
        let mut grid = GridSpec::default();
        grid.theta_s = vec![1.5];
        assert!(!grid.is_valid());
    }

    #[test]
    fn mean_sd_basics() {
        let (m, s) = mean_sd(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]);
        assert_relative_eq!(m, 5.0);
        assert_relative_eq!(s * s, 32.0 / 7.0, epsilon = 1e-12);
        let (m, s) = mean_sd(&[3.5]);
        assert_relative_eq!(m, 3.5);
        assert_relative_eq!(s, 0.0);
    }

    #[test]
    fn run_spec_accepts_partial_celm_config() {
        let json = r#"{
            "split": {"n_train": 45, "n_test": 105, "seed": 1, "stratified": true},
            "celm": {"impact_min": 0.3, "impact_max": 0.3}
        }"#;
        let spec: RunSpec = serde_json::from_str(json).unwrap();
        assert_relative_eq!(spec.celm.impact_min, 0.3);
        assert_relative_eq!(spec.celm.ridge, 1e-8);
        assert_eq!(spec.split.n_train, 45);
    }
}
