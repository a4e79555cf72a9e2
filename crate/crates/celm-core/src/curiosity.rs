//! Collative variables and strategy selection.
//!
//! Per training sample the classifier appraises four collative variables,
//! each in [0, 1]: novelty (one minus mean kernel activation), uncertainty
//! (one minus the posterior of the predicted class), conflict (relative
//! closeness of the two strongest outputs when they compete with the same
//! sign), and surprise (product of error magnitudes at the true and
//! predicted classes when they disagree). The snapshot then picks one of
//! three learning strategies by thresholding: addition when the sample is
//! novel, uncertain and surprising; deletion when surprise and conflict are
//! high but novelty is low; parameter update otherwise.
//!
//! Uncertainty has two readings. The printed posterior p = (e_ĉ + 1)/2 over
//! the hinge error makes a confidently wrong prediction (e_ĉ = 1) come out
//! as certainty 1, hence uncertainty 0, which starves the addition trigger
//! on exactly the samples that need new neurons. `UncertaintyMode` keeps
//! both: `HingeError` is the printed formula, `OutputPosterior` reads the
//! posterior off the raw output, p = clamp((ŷ_ĉ + 1)/2), which is 0 only
//! for predictions past the margin and is the default for training.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::network::{hidden_row, hinge_error, posterior, predict_class, CodedLabel, NetworkState};

/// The four collative variables for one sample, plus the class pair they
/// were computed from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollativeSnapshot {
    pub novelty: f64,
    pub uncertainty: f64,
    pub conflict: f64,
    pub surprise: f64,
    pub predicted_class: usize,
    pub true_class: usize,
}

/// Learning strategy chosen for one sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StrategyChoice {
    AddNeuron,
    DeleteNeuron,
    UpdateParams,
}

/// Trigger thresholds for neuron addition and deletion.
///
/// `theta_s` is shared between the two conditions as printed; setting
/// `theta_s_del` splits the deletion side off.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CelmThresholds {
    pub theta_n_add: f64,
    pub theta_u: f64,
    pub theta_s: f64,
    pub theta_f: f64,
    pub theta_n_del: f64,
    pub theta_s_del: Option<f64>,
}

impl Default for CelmThresholds {
    fn default() -> Self {
        CelmThresholds {
            theta_n_add: 0.1,
            theta_u: 0.1,
            theta_s: 0.2,
            theta_f: 0.2,
            theta_n_del: 0.3,
            theta_s_del: None,
        }
    }
}

impl CelmThresholds {
    /// Warnings for thresholds outside their recommended ranges. Values
    /// outside [0, 1] are still rejected nowhere; the trigger conditions
    /// simply never fire, so this stays advisory.
    pub fn range_warnings(&self) -> Vec<String> {
        let mut warnings = Vec::new();
        let mut check = |name: &str, value: f64, lo: f64, hi: f64| {
            if !(lo..=hi).contains(&value) {
                warnings.push(format!(
                    "{name} = {value} outside the recommended range [{lo}, {hi}]"
                ));
            }
        };
        check("theta_n_add", self.theta_n_add, 0.1, 0.5);
        check("theta_u", self.theta_u, 0.1, 0.3);
        check("theta_s", self.theta_s, 0.2, 0.9);
        check("theta_f", self.theta_f, 0.1, 0.3);
        check("theta_n_del", self.theta_n_del, 0.1, 0.8);
        if let Some(v) = self.theta_s_del {
            check("theta_s_del", v, 0.2, 0.9);
        }
        warnings
    }
}

/// Which posterior feeds the uncertainty variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum UncertaintyMode {
    /// Literal printed formula: p = (e_ĉ + 1)/2 over the hinge error.
    HingeError,
    /// Posterior from the raw output: p = clamp((ŷ_ĉ + 1)/2, 0, 1).
    #[default]
    OutputPosterior,
}

fn novelty_from_row(h: &DVector<f64>) -> f64 {
    1.0 - h.mean()
}

/// Novelty of a sample: one minus its mean kernel activation, 1.0 for an
/// empty network.
pub fn novelty(x: &DVector<f64>, net: &NetworkState) -> f64 {
    if net.k() == 0 {
        return 1.0;
    }
    let h = hidden_row(x, net).expect("non-empty network");
    novelty_from_row(&h)
}

/// Uncertainty from the hinge error at the predicted class: (1 − e_ĉ)/2.
pub fn uncertainty(e: &DVector<f64>, c_hat: usize) -> f64 {
    1.0 - posterior(e[c_hat - 1])
}

/// Uncertainty from the raw output at the predicted class:
/// 1 − clamp((ŷ_ĉ + 1)/2, 0, 1).
pub fn uncertainty_from_output(y_hat: &DVector<f64>, c_hat: usize) -> f64 {
    1.0 - ((y_hat[c_hat - 1] + 1.0) / 2.0).clamp(0.0, 1.0)
}

/// Conflict between the two strongest outputs: 1 − |ŷ₁−ŷ₂|/|ŷ₁+ŷ₂| when
/// they share a sign, 0 otherwise (including when both are exactly zero).
pub fn conflict(y_hat: &DVector<f64>) -> f64 {
    assert!(y_hat.len() >= 2, "conflict needs at least two outputs");
    let first = predict_class(y_hat) - 1;
    let mut second = usize::MAX;
    for j in 0..y_hat.len() {
        if j == first {
            continue;
        }
        if second == usize::MAX || y_hat[j] > y_hat[second] {
            second = j;
        }
    }
    let (y1, y2) = (y_hat[first], y_hat[second]);
    if y1 * y2 > 0.0 {
        1.0 - (y1 - y2).abs() / (y1 + y2).abs()
    } else {
        0.0
    }
}

/// Surprise on a misclassification: |e_c · e_ĉ|, and 0 when the prediction
/// is correct.
pub fn surprise(e: &DVector<f64>, c: usize, c_hat: usize) -> f64 {
    if c == c_hat {
        0.0
    } else {
        (e[c - 1] * e[c_hat - 1]).abs()
    }
}

/// Computes all four collative variables for one sample with a single
/// forward pass. An empty network appraises to (1, 1, 0, 0) with the
/// prediction pinned to the true class, forcing addition on the first
/// sample.
pub fn appraise(
    x: &DVector<f64>,
    y: &CodedLabel,
    net: &NetworkState,
    mode: UncertaintyMode,
) -> Result<CollativeSnapshot> {
    if net.k() == 0 {
        return Ok(CollativeSnapshot {
            novelty: 1.0,
            uncertainty: 1.0,
            conflict: 0.0,
            surprise: 0.0,
            predicted_class: y.class(),
            true_class: y.class(),
        });
    }
    let h = hidden_row(x, net)?;
    let y_hat = net.weights.tr_mul(&h);
    let c_hat = predict_class(&y_hat);
    let e = hinge_error(&y_hat, y);
    let uncertainty_value = match mode {
        UncertaintyMode::HingeError => uncertainty(&e, c_hat),
        UncertaintyMode::OutputPosterior => uncertainty_from_output(&y_hat, c_hat),
    };
    Ok(CollativeSnapshot {
        novelty: novelty_from_row(&h),
        uncertainty: uncertainty_value,
        conflict: conflict(&y_hat),
        surprise: surprise(&e, y.class(), c_hat),
        predicted_class: c_hat,
        true_class: y.class(),
    })
}

/// Thresholds the snapshot into a strategy: addition first, then deletion,
/// otherwise parameter update. All comparisons are strict.
pub fn select_strategy(s: &CollativeSnapshot, th: &CelmThresholds) -> StrategyChoice {
    if s.novelty > th.theta_n_add && s.uncertainty > th.theta_u && s.surprise > th.theta_s {
        return StrategyChoice::AddNeuron;
    }
    let theta_s_del = th.theta_s_del.unwrap_or(th.theta_s);
    if s.surprise > theta_s_del && s.conflict > th.theta_f && s.novelty < th.theta_n_del {
        return StrategyChoice::DeleteNeuron;
    }
    StrategyChoice::UpdateParams
}
