//! Single-hidden-layer RBF network: state, forward pass, hinge error.
//!
//! Hidden neurons are Gaussian RBF units exp(−b‖x − a‖²) carrying the class
//! label they were created for. Outputs use a ±1 coding with one +1 per
//! sample; the per-output error is a truncated hinge loss, and a linear map
//! turns an error entry into a posterior class probability. The network may
//! be empty (K = 0); forward-pass operations reject that state and leave
//! bootstrap to the training loop.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One RBF hidden unit: center a_k, impact factor b_k, and the class label
/// it was recruited for.
#[derive(Debug, Clone, PartialEq)]
pub struct HiddenNeuron {
    pub center: DVector<f64>,
    pub impact: f64,
    pub label: usize,
}

/// Full model state: K hidden neurons plus the K×N output weight matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "NetworkStateRepr", try_from = "NetworkStateRepr")]
pub struct NetworkState {
    pub input_dim: usize,
    pub n_classes: usize,
    pub neurons: Vec<HiddenNeuron>,
    pub weights: DMatrix<f64>,
}

impl NetworkState {
    pub fn empty(input_dim: usize, n_classes: usize) -> Self {
        NetworkState {
            input_dim,
            n_classes,
            neurons: Vec::new(),
            weights: DMatrix::zeros(0, n_classes),
        }
    }

    /// Number of hidden neurons K.
    pub fn k(&self) -> usize {
        self.neurons.len()
    }
}

/// Target coding for one sample: +1 at the true class, −1 elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct CodedLabel {
    values: DVector<f64>,
    class: usize,
}

impl CodedLabel {
    pub fn new(class: usize, n_classes: usize) -> Result<Self> {
        if class < 1 || class > n_classes {
            return Err(Error::domain(format!(
                "class {class} outside 1..{n_classes}"
            )));
        }
        let values = DVector::from_fn(n_classes, |j, _| if j + 1 == class { 1.0 } else { -1.0 });
        Ok(CodedLabel { values, class })
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn class(&self) -> usize {
        self.class
    }

    pub fn n_classes(&self) -> usize {
        self.values.len()
    }
}

/// Gaussian RBF activation exp(−b_k‖x − a_k‖²).
pub fn rbf_activation(x: &DVector<f64>, neuron: &HiddenNeuron) -> f64 {
    assert_eq!(
        x.len(),
        neuron.center.len(),
        "input dimension must match neuron center"
    );
    let dist_sq = (x - &neuron.center).norm_squared();
    (-neuron.impact * dist_sq).exp()
}

/// Hidden-layer response h = [G(x,a_1,b_1), …, G(x,a_K,b_K)].
pub fn hidden_row(x: &DVector<f64>, net: &NetworkState) -> Result<DVector<f64>> {
    if net.k() == 0 {
        return Err(Error::EmptyNetwork("hidden_row needs at least one neuron"));
    }
    Ok(DVector::from_iterator(
        net.k(),
        net.neurons.iter().map(|n| rbf_activation(x, n)),
    ))
}

/// Raw network output ŷ = hᵀW.
pub fn predict_raw(x: &DVector<f64>, net: &NetworkState) -> Result<DVector<f64>> {
    if net.k() == 0 {
        return Err(Error::EmptyNetwork("predict_raw needs at least one neuron"));
    }
    let h = hidden_row(x, net)?;
    Ok(net.weights.tr_mul(&h))
}

/// Decoded class: 1-based index of the maximum output, ties to the lowest
/// index.
pub fn predict_class(y_hat: &DVector<f64>) -> usize {
    let mut best = 0;
    for j in 1..y_hat.len() {
        if y_hat[j] > y_hat[best] {
            best = j;
        }
    }
    best + 1
}

/// Truncated hinge loss per output: 0 if ŷ_j·y_j > 1, otherwise ŷ_j − y_j
/// clamped to [−1, 1].
pub fn hinge_error(y_hat: &DVector<f64>, y: &CodedLabel) -> DVector<f64> {
    assert_eq!(y_hat.len(), y.n_classes(), "output lengths must match");
    DVector::from_fn(y_hat.len(), |j, _| {
        let target = y.values()[j];
        if y_hat[j] * target > 1.0 {
            0.0
        } else {
            (y_hat[j] - target).clamp(-1.0, 1.0)
        }
    })
}

/// Posterior class probability from a hinge-error entry: (e_j + 1)/2.
pub fn posterior(e_j: f64) -> f64 {
    (e_j + 1.0) / 2.0
}

#[derive(Serialize, Deserialize)]
struct NeuronRepr {
    center: Vec<f64>,
    impact: f64,
    label: usize,
}

#[derive(Serialize, Deserialize)]
struct NetworkStateRepr {
    input_dim: usize,
    n_classes: usize,
    neurons: Vec<NeuronRepr>,
    weights: Vec<Vec<f64>>,
}

impl From<NetworkState> for NetworkStateRepr {
    fn from(net: NetworkState) -> Self {
        NetworkStateRepr {
            input_dim: net.input_dim,
            n_classes: net.n_classes,
            neurons: net
                .neurons
                .iter()
                .map(|n| NeuronRepr {
                    center: n.center.iter().copied().collect(),
                    impact: n.impact,
                    label: n.label,
                })
                .collect(),
            weights: (0..net.weights.nrows())
                .map(|k| net.weights.row(k).iter().copied().collect())
                .collect(),
        }
    }
}

impl TryFrom<NetworkStateRepr> for NetworkState {
    type Error = Error;

    fn try_from(repr: NetworkStateRepr) -> Result<Self> {
        let k = repr.neurons.len();
        if repr.weights.len() != k {
            return Err(Error::domain(format!(
                "weight rows ({}) must match neuron count ({k})",
                repr.weights.len()
            )));
        }
        let mut neurons = Vec::with_capacity(k);
        for n in &repr.neurons {
            if n.center.len() != repr.input_dim {
                return Err(Error::domain("neuron center length must match input_dim"));
            }
            if !(n.impact > 0.0) {
                return Err(Error::domain("neuron impact must be positive"));
            }
            if n.label < 1 || n.label > repr.n_classes {
                return Err(Error::domain("neuron label outside 1..n_classes"));
            }
            neurons.push(HiddenNeuron {
                center: DVector::from_vec(n.center.clone()),
                impact: n.impact,
                label: n.label,
            });
        }
        let mut weights = DMatrix::zeros(k, repr.n_classes);
        for (i, row) in repr.weights.iter().enumerate() {
            if row.len() != repr.n_classes {
                return Err(Error::domain("weight row length must match n_classes"));
            }
            for (j, &v) in row.iter().enumerate() {
                weights[(i, j)] = v;
            }
        }
        Ok(NetworkState {
            input_dim: repr.input_dim,
            n_classes: repr.n_classes,
            neurons,
            weights,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn neuron(center: &[f64], impact: f64, label: usize) -> HiddenNeuron {
        HiddenNeuron {
            center: DVector::from_row_slice(center),
            impact,
            label,
        }
    }

    #[test]
    fn activation_is_one_at_center() {
        let n = neuron(&[0.3, -0.7], 2.5, 1);
        let x = DVector::from_row_slice(&[0.3, -0.7]);
        assert_relative_eq!(rbf_activation(&x, &n), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn activation_unit_distance() {
        let n = neuron(&[0.0], 1.0, 1);
        let x = DVector::from_row_slice(&[1.0]);
        assert_relative_eq!(rbf_activation(&x, &n), (-1.0f64).exp(), epsilon = 1e-15);
    }

    #[test]
    fn activation_scaled_distance() {
        let n = neuron(&[0.0, 0.0, 0.0], 2.0, 1);
        let x = DVector::from_row_slice(&[1.0, 1.0, 1.0]);
        assert_relative_eq!(
            rbf_activation(&x, &n),
            0.0024787521766663585,
            epsilon = 1e-18
        );
    }

    #[test]
    fn hidden_row_preserves_order_and_symmetry() {
        let mut net = NetworkState::empty(1, 2);
        net.neurons.push(neuron(&[0.0], 1.0, 1));
        net.neurons.push(neuron(&[0.0], 1.0, 2));
        net.neurons.push(neuron(&[2.0], 0.5, 1));
        net.weights = DMatrix::zeros(3, 2);
        let x = DVector::from_row_slice(&[1.0]);
        let h = hidden_row(&x, &net).unwrap();
        assert_relative_eq!(h[0], h[1], epsilon = 1e-15);
        assert_relative_eq!(h[0], (-1.0f64).exp(), epsilon = 1e-15);
        assert_relative_eq!(h[2], (-0.5f64).exp(), epsilon = 1e-15);
    }

    #[test]
    fn hidden_row_rejects_empty_network() {
        let net = NetworkState::empty(2, 2);
        let x = DVector::from_row_slice(&[0.0, 0.0]);
        assert!(matches!(
            hidden_row(&x, &net),
            Err(Error::EmptyNetwork(_))
        ));
    }

    #[test]
    fn predict_raw_single_neuron_passes_weights_through() {
        let mut net = NetworkState::empty(1, 2);
        net.neurons.push(neuron(&[0.5], 1.0, 1));
        net.weights = DMatrix::from_row_slice(1, 2, &[0.3, -0.3]);
        let x = DVector::from_row_slice(&[0.5]);
        let y = predict_raw(&x, &net).unwrap();
        assert_relative_eq!(y[0], 0.3, epsilon = 1e-15);
        assert_relative_eq!(y[1], -0.3, epsilon = 1e-15);
    }

    #[test]
    fn predict_raw_matches_naive_dot_products() {
        let mut net = NetworkState::empty(2, 3);
        net.neurons.push(neuron(&[0.0, 0.0], 1.5, 1));
        net.neurons.push(neuron(&[1.0, -1.0], 0.7, 2));
        net.weights =
            DMatrix::from_row_slice(2, 3, &[0.4, -0.9, 0.2, -0.3, 0.8, 0.6]);
        let x = DVector::from_row_slice(&[0.2, 0.4]);
        let y = predict_raw(&x, &net).unwrap();
        let h = hidden_row(&x, &net).unwrap();
        for j in 0..3 {
            let mut acc = 0.0;
            for k in 0..2 {
                acc += h[k] * net.weights[(k, j)];
            }
            assert_relative_eq!(y[j], acc, epsilon = 1e-12);
        }
    }

    #[test]
    fn predict_class_examples() {
        assert_eq!(predict_class(&DVector::from_row_slice(&[0.9, -0.2])), 1);
        assert_eq!(predict_class(&DVector::from_row_slice(&[0.5, 0.5])), 1);
        assert_eq!(
            predict_class(&DVector::from_row_slice(&[-0.1, 0.0, -0.5])),
            2
        );
    }

    #[test]
    fn hinge_error_branches() {
        let y = CodedLabel::new(1, 2).unwrap();
        let e = hinge_error(&DVector::from_row_slice(&[2.0, 0.5]), &y);
        assert_relative_eq!(e[0], 0.0, epsilon = 1e-15);
        assert_relative_eq!(e[1], 1.0, epsilon = 1e-15);
        let e = hinge_error(&DVector::from_row_slice(&[-0.2, 0.5]), &y);
        assert_relative_eq!(e[0], -1.0, epsilon = 1e-15);
        let e = hinge_error(&DVector::from_row_slice(&[0.5, -2.0]), &y);
        assert_relative_eq!(e[0], -0.5, epsilon = 1e-15);
        assert_relative_eq!(e[1], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn posterior_endpoints_and_midpoint() {
        assert_relative_eq!(posterior(1.0), 1.0, epsilon = 1e-15);
        assert_relative_eq!(posterior(-1.0), 0.0, epsilon = 1e-15);
        assert_relative_eq!(posterior(0.0), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn coded_label_round_trip() {
        for n in 2..6 {
            for c in 1..=n {
                let y = CodedLabel::new(c, n).unwrap();
                assert_eq!(predict_class(y.values()), c);
                let plus: usize = y.values().iter().filter(|&&v| v == 1.0).count();
                assert_eq!(plus, 1);
            }
        }
        assert!(CodedLabel::new(0, 3).is_err());
        assert!(CodedLabel::new(4, 3).is_err());
    }

    #[test]
    fn network_state_json_round_trip() {
        let mut net = NetworkState::empty(2, 3);
        net.neurons.push(neuron(&[0.25, -1.5], 0.8, 2));
        net.neurons.push(neuron(&[1.0, 0.0], 1.2, 3));
        net.weights =
            DMatrix::from_row_slice(2, 3, &[0.1, -0.2, 0.3, 0.4, -0.5, 0.6]);
        let json = serde_json::to_string(&net).unwrap();
        let back: NetworkState = serde_json::from_str(&json).unwrap();
        assert_eq!(net, back);
    }

    #[test]
    fn network_state_json_rejects_shape_mismatch() {
        let json = r#"{"input_dim":1,"n_classes":2,
            "neurons":[{"center":[0.0],"impact":1.0,"label":1}],
            "weights":[]}"#;
        assert!(serde_json::from_str::<NetworkState>(json).is_err());
    }

    proptest! {
        #[test]
        fn activation_in_unit_interval_and_radial(
            cx in -5.0f64..5.0, cy in -5.0f64..5.0,
            dx in -5.0f64..5.0, dy in -5.0f64..5.0,
            impact in 0.01f64..10.0,
        ) {
            let n = neuron(&[cx, cy], impact, 1);
            let near = DVector::from_row_slice(&[cx + dx * 0.5, cy + dy * 0.5]);
            let far = DVector::from_row_slice(&[cx + dx, cy + dy]);
            let g_near = rbf_activation(&near, &n);
            let g_far = rbf_activation(&far, &n);
            prop_assert!(g_near > 0.0 && g_near <= 1.0);
            prop_assert!(g_far > 0.0 && g_far <= 1.0);
            if dx.abs() + dy.abs() > 1e-6 {
                prop_assert!(g_near > g_far);
            }
        }

        #[test]
        fn hinge_error_bounded_and_zero_past_margin(
            y_hat in prop::collection::vec(-3.0f64..3.0, 3),
            class in 1usize..=3,
        ) {
            let y = CodedLabel::new(class, 3).unwrap();
            let e = hinge_error(&DVector::from_vec(y_hat.clone()), &y);
            for j in 0..3 {
                prop_assert!((-1.0..=1.0).contains(&e[j]));
                if y_hat[j] * y.values()[j] > 1.0 {
                    prop_assert_eq!(e[j], 0.0);
                }
            }
        }
    }
}
