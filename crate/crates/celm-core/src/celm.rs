//! The sequential C-ELM training loop.
//!
//! Training starts from zero hidden neurons and folds one sample at a time.
//! Each sample is appraised (see `curiosity`) and dispatched to one of
//! three strategies: neuron addition takes the sample itself as a new
//! center with a randomly drawn impact factor and rebuilds the output
//! weights over the full history by a batch solve; neuron deletion removes
//! the most fired neuron of the offending class and rebuilds likewise;
//! otherwise the weights absorb the sample through one RLS step. The full
//! sample history is retained because every structural change recomputes
//! the t×K hidden matrix; the benchmark datasets keep this cheap.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::curiosity::{
    appraise, select_strategy, CelmThresholds, CollativeSnapshot, StrategyChoice, UncertaintyMode,
};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::network::{
    hidden_row, predict_class, predict_raw, rbf_activation, CodedLabel, HiddenNeuron, NetworkState,
};
use crate::solver::{pinv_solve, rls_init, rls_step, RlsState, DEFAULT_RIDGE, DEFAULT_SV_TOL};

/// Everything that parameterizes a training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CelmConfig {
    pub thresholds: CelmThresholds,
    /// Range the random impact factor b_k is drawn from at neuron addition.
    pub impact_min: f64,
    pub impact_max: f64,
    pub ridge: f64,
    pub sv_tol: f64,
    pub seed: u64,
    /// Deletion targets the predicted class (prose reading); false targets
    /// the true class (formula reading).
    pub delete_by_predicted: bool,
    /// Present the training stream in seeded-shuffled order instead of
    /// file order.
    pub shuffle: bool,
    pub max_neurons: Option<usize>,
    pub uncertainty_mode: UncertaintyMode,
}

impl Default for CelmConfig {
    fn default() -> Self {
        CelmConfig {
            thresholds: CelmThresholds::default(),
            impact_min: 0.5,
            impact_max: 3.0,
            ridge: DEFAULT_RIDGE,
            sv_tol: DEFAULT_SV_TOL,
            seed: 0,
            delete_by_predicted: true,
            shuffle: false,
            max_neurons: None,
            uncertainty_mode: UncertaintyMode::default(),
        }
    }
}

impl CelmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.impact_min > 0.0 && self.impact_max >= self.impact_min) {
            return Err(Error::domain(
                "impact range needs 0 < impact_min <= impact_max",
            ));
        }
        if !(self.ridge >= 0.0 && self.ridge.is_finite()) {
            return Err(Error::domain("ridge must be finite and non-negative"));
        }
        if !(self.sv_tol > 0.0 && self.sv_tol.is_finite()) {
            return Err(Error::domain("sv_tol must be finite and positive"));
        }
        if self.max_neurons == Some(0) {
            return Err(Error::domain("max_neurons must be at least 1 when set"));
        }
        Ok(())
    }
}

/// What happened on one training step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepLog {
    pub index: usize,
    pub snapshot: CollativeSnapshot,
    /// The strategy that actually executed; a blocked addition or deletion
    /// is logged as the parameter update it fell back to.
    pub strategy: StrategyChoice,
    pub k_before: usize,
    pub k_after: usize,
}

/// Aggregate outcome of a training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub config: CelmConfig,
    pub additions: usize,
    pub deletions: usize,
    pub final_k: usize,
    pub steps: Vec<StepLog>,
    pub warnings: Vec<String>,
    pub wall_time_ms: f64,
}

/// Incremental trainer state. Use [`fit`] for the whole-stream convenience
/// path; drive `train_step` directly for per-step control.
pub struct Trainer {
    net: NetworkState,
    rls: Option<RlsState>,
    history_x: Vec<DVector<f64>>,
    history_y: Vec<CodedLabel>,
    /// Hidden-layer rows of every history sample at the current structure.
    h_rows: Vec<Vec<f64>>,
    rng: ChaCha8Rng,
    config: CelmConfig,
    additions: usize,
    deletions: usize,
    preseeded: usize,
    warnings: Vec<String>,
    capped_warned: bool,
    check_residuals: bool,
}

/// Index of the most fired neuron among those labeled `target`, by the
/// current sample's activations; ties go to the lowest index.
fn deletion_candidate(neurons: &[HiddenNeuron], h_row: &[f64], target: usize) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (k, neuron) in neurons.iter().enumerate() {
        if neuron.label != target {
            continue;
        }
        if best.is_none_or(|b| h_row[k] > h_row[b]) {
            best = Some(k);
        }
    }
    best
}

impl Trainer {
    pub fn new(input_dim: usize, n_classes: usize, config: CelmConfig) -> Result<Self> {
        config.validate()?;
        if n_classes < 2 {
            return Err(Error::domain("training needs at least two classes"));
        }
        if input_dim == 0 {
            return Err(Error::domain("training needs at least one feature"));
        }
        let warnings = config.thresholds.range_warnings();
        Ok(Trainer {
            net: NetworkState::empty(input_dim, n_classes),
            rls: None,
            history_x: Vec::new(),
            history_y: Vec::new(),
            h_rows: Vec::new(),
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            config,
            additions: 0,
            deletions: 0,
            preseeded: 0,
            warnings,
            capped_warned: false,
            check_residuals: false,
        })
    }

    pub fn net(&self) -> &NetworkState {
        &self.net
    }

    pub fn history_len(&self) -> usize {
        self.history_x.len()
    }

    pub fn additions(&self) -> usize {
        self.additions
    }

    pub fn deletions(&self) -> usize {
        self.deletions
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Verify the normal equations over the stored history after every
    /// structural change, failing the step on violation. Off by default;
    /// meant for tests.
    pub fn set_residual_check(&mut self, on: bool) {
        self.check_residuals = on;
    }

    fn history_matrices(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        let t = self.history_x.len();
        let k = self.net.k();
        let h = DMatrix::from_fn(t, k, |i, j| self.h_rows[i][j]);
        let y = DMatrix::from_fn(t, self.net.n_classes, |i, j| self.history_y[i].values()[j]);
        (h, y)
    }

    /// Relative normal-equations residual ‖Hᵀ(HW − Y)‖_F / (1 + ‖HᵀY‖_F)
    /// of the current weights over the stored history.
    pub fn normal_equations_residual(&self) -> f64 {
        let (h, y) = self.history_matrices();
        let hty = h.tr_mul(&y);
        let residual = h.tr_mul(&(&h * &self.net.weights - &y));
        residual.norm() / (1.0 + hty.norm())
    }

    fn warn(&mut self, msg: String) {
        self.warnings.push(msg);
    }

    /// Batch-recompute W and re-initialize the RLS state over the full
    /// history; used after every structural change.
    fn rebuild(&mut self) -> Result<()> {
        let (h, y) = self.history_matrices();
        self.net.weights = pinv_solve(&h, &y, self.config.sv_tol)?;
        let rls = match rls_init(&h, &y, self.config.ridge) {
            Ok(state) => state,
            Err(Error::Singular(_)) => {
                let raised = (self.config.ridge.max(1e-12)) * 1e6;
                self.warn(format!(
                    "covariance init singular at ridge {}; retrying with {raised}",
                    self.config.ridge
                ));
                rls_init(&h, &y, raised)?
            }
            Err(e) => return Err(e),
        };
        self.rls = Some(rls);
        if self.check_residuals {
            let ratio = self.normal_equations_residual();
            if ratio > 1e-6 {
                return Err(Error::domain(format!(
                    "normal-equations residual {ratio:.3e} after structural change"
                )));
            }
        }
        Ok(())
    }

    fn apply_add(&mut self, x: &DVector<f64>, c: usize) -> Result<()> {
        let neuron = HiddenNeuron {
            center: x.clone(),
            impact: self
                .rng
                .random_range(self.config.impact_min..=self.config.impact_max),
            label: c,
        };
        for (row, hx) in self.h_rows.iter_mut().zip(&self.history_x) {
            row.push(rbf_activation(hx, &neuron));
        }
        self.net.neurons.push(neuron);
        self.additions += 1;
        self.rebuild()
    }

    /// Removes the most fired neuron of `target` for the current (last
    /// appended) sample. Returns false when no such neuron exists or the
    /// network would empty out, in which case nothing changes.
    fn apply_delete(&mut self, target: usize) -> Result<bool> {
        if self.net.k() <= 1 {
            self.warn("deletion skipped: network would become empty".into());
            return Ok(false);
        }
        let h_last = self.h_rows.last().expect("sample appended before dispatch");
        let Some(kill) = deletion_candidate(&self.net.neurons, h_last, target) else {
            return Ok(false);
        };
        self.net.neurons.remove(kill);
        for row in &mut self.h_rows {
            row.remove(kill);
        }
        self.deletions += 1;
        self.rebuild()?;
        Ok(true)
    }

    fn apply_update(&mut self, y: &CodedLabel) -> Result<()> {
        let h = DVector::from_row_slice(self.h_rows.last().expect("sample appended"));
        let state = self.rls.as_ref().expect("rls initialized for K >= 1");
        let next = match rls_step(state, &h, y) {
            Ok(next) => next,
            Err(Error::Breakdown(msg)) => {
                self.warn(format!("rls breakdown ({msg}); re-initializing from history"));
                let (h_full, y_full) = self.history_matrices();
                let fresh = rls_init(&h_full, &y_full, self.config.ridge)?;
                rls_step(&fresh, &h, y)?
            }
            Err(e) => return Err(e),
        };
        self.net.weights = next.weights.clone();
        self.rls = Some(next);
        Ok(())
    }

    /// Appraise one sample, pick a strategy, and apply it.
    pub fn train_step(&mut self, x: &DVector<f64>, c: usize) -> Result<StepLog> {
        if x.len() != self.net.input_dim {
            return Err(Error::domain(format!(
                "sample has {} features, network expects {}",
                x.len(),
                self.net.input_dim
            )));
        }
        let y = CodedLabel::new(c, self.net.n_classes)?;
        let snapshot = appraise(x, &y, &self.net, self.config.uncertainty_mode)?;
        let k_before = self.net.k();

        self.history_x.push(x.clone());
        self.history_y.push(y.clone());
        let row = if k_before > 0 {
            hidden_row(x, &self.net)?.iter().copied().collect()
        } else {
            Vec::new()
        };
        self.h_rows.push(row);

        // An empty network cannot predict or update, so the first sample
        // always becomes the first neuron regardless of its appraisal.
        let mut choice = if k_before == 0 {
            StrategyChoice::AddNeuron
        } else {
            select_strategy(&snapshot, &self.config.thresholds)
        };

        if choice == StrategyChoice::AddNeuron && k_before > 0 {
            if let Some(cap) = self.config.max_neurons {
                if k_before >= cap {
                    if !self.capped_warned {
                        self.warn(format!("additions capped at max_neurons = {cap}"));
                        self.capped_warned = true;
                    }
                    choice = StrategyChoice::UpdateParams;
                }
            }
        }

        let executed = match choice {
            StrategyChoice::AddNeuron => {
                self.apply_add(x, c)?;
                StrategyChoice::AddNeuron
            }
            StrategyChoice::DeleteNeuron => {
                let target = if self.config.delete_by_predicted {
                    snapshot.predicted_class
                } else {
                    snapshot.true_class
                };
                if self.apply_delete(target)? {
                    StrategyChoice::DeleteNeuron
                } else {
                    self.apply_update(&y)?;
                    StrategyChoice::UpdateParams
                }
            }
            StrategyChoice::UpdateParams => {
                self.apply_update(&y)?;
                StrategyChoice::UpdateParams
            }
        };

        Ok(StepLog {
            index: self.history_x.len() - 1,
            snapshot,
            strategy: executed,
            k_before,
            k_after: self.net.k(),
        })
    }

    /// Installs one neuron per given sample (center = features, label =
    /// class, random impact) and solves the weights over exactly those
    /// samples. Used to seed a fixed-structure baseline before streaming.
    pub fn preseed(&mut self, samples: &[(DVector<f64>, usize)]) -> Result<()> {
        if self.history_len() > 0 || self.net.k() > 0 {
            return Err(Error::domain("preseed must run on a fresh trainer"));
        }
        if samples.is_empty() {
            return Err(Error::domain("preseed needs at least one sample"));
        }
        for (x, c) in samples {
            let y = CodedLabel::new(*c, self.net.n_classes)?;
            self.history_x.push(x.clone());
            self.history_y.push(y);
            self.net.neurons.push(HiddenNeuron {
                center: x.clone(),
                impact: self
                    .rng
                    .random_range(self.config.impact_min..=self.config.impact_max),
                label: *c,
            });
        }
        self.h_rows = self
            .history_x
            .iter()
            .map(|x| {
                self.net
                    .neurons
                    .iter()
                    .map(|n| rbf_activation(x, n))
                    .collect()
            })
            .collect();
        self.preseeded = samples.len();
        self.rebuild()
    }

    fn into_report(self, wall_time_ms: f64, steps: Vec<StepLog>) -> (NetworkState, TrainReport) {
        let report = TrainReport {
            config: self.config,
            additions: self.additions,
            deletions: self.deletions,
            final_k: self.net.k(),
            steps,
            warnings: self.warnings,
            wall_time_ms,
        };
        (self.net, report)
    }
}

fn stream_order(t: usize, config: &CelmConfig) -> Vec<usize> {
    let mut order: Vec<usize> = (0..t).collect();
    if config.shuffle {
        use rand::seq::SliceRandom;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x9e3779b97f4a7c15);
        order.shuffle(&mut rng);
    }
    order
}

/// Trains a fresh network over the dataset and reports what happened.
pub fn fit(train: &Dataset, config: &CelmConfig) -> Result<(NetworkState, TrainReport)> {
    if train.is_empty() {
        return Err(Error::domain("training stream is empty"));
    }
    let start = Instant::now();
    let mut trainer = Trainer::new(train.n_features(), train.n_classes, config.clone())?;
    let mut steps = Vec::with_capacity(train.len());
    for i in stream_order(train.len(), config) {
        steps.push(trainer.train_step(&train.sample(i), train.labels[i])?);
    }
    Ok(trainer.into_report(start.elapsed().as_secs_f64() * 1e3, steps))
}

/// Fixed-structure ELM reference: seeds `k` random training samples as
/// neurons, then absorbs the remaining stream through pure RLS updates by
/// raising the surprise threshold past its maximum so neither structural
/// trigger can fire.
pub fn fit_elm_baseline(
    train: &Dataset,
    k: usize,
    config: &CelmConfig,
) -> Result<(NetworkState, TrainReport)> {
    if train.is_empty() {
        return Err(Error::domain("training stream is empty"));
    }
    if k == 0 || k > train.len() {
        return Err(Error::domain(format!(
            "baseline needs 1 <= k <= {}, got {k}",
            train.len()
        )));
    }
    let start = Instant::now();
    let mut config = config.clone();
    config.thresholds.theta_s = 1.0;
    config.thresholds.theta_s_del = None;
    config.max_neurons = Some(k);

    let mut trainer = Trainer::new(train.n_features(), train.n_classes, config)?;
    trainer.warnings.clear();

    let order = stream_order(train.len(), &trainer.config);
    let mut seed_idx = rand::seq::index::sample(&mut trainer.rng, train.len(), k).into_vec();
    seed_idx.sort_unstable();
    let seeds: Vec<(DVector<f64>, usize)> = seed_idx
        .iter()
        .map(|&i| (train.sample(i), train.labels[i]))
        .collect();
    trainer.preseed(&seeds)?;

    let mut steps = Vec::with_capacity(train.len() - k);
    for i in order {
        if seed_idx.binary_search(&i).is_ok() {
            continue;
        }
        steps.push(trainer.train_step(&train.sample(i), train.labels[i])?);
    }
    Ok(trainer.into_report(start.elapsed().as_secs_f64() * 1e3, steps))
}

/// Predicted class for every sample in the dataset.
pub fn predict_dataset(net: &NetworkState, ds: &Dataset) -> Result<Vec<usize>> {
    (0..ds.len())
        .map(|i| Ok(predict_class(&predict_raw(&ds.sample(i), net)?)))
        .collect()
}
