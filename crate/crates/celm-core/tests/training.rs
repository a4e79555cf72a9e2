//! End-to-end checks of the public training pipeline on synthetic data.

use celm_core::celm::{fit, fit_elm_baseline, predict_dataset, CelmConfig, Trainer};
use celm_core::data::{normalize_apply, normalize_fit, split, Dataset, SplitSpec};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Three well-separated 2-D blobs, 50 samples each, classes interleaved.
fn blobs(seed: u64) -> Dataset {
    let centers = [(-1.0, -1.0), (1.0, -1.0), (0.0, 1.0)];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = 150;
    let mut features = DMatrix::zeros(t, 2);
    let mut labels = Vec::with_capacity(t);
    for i in 0..t {
        let class = i % 3;
        let (cx, cy) = centers[class];
        features[(i, 0)] = cx + rng.random_range(-0.3..0.3);
        features[(i, 1)] = cy + rng.random_range(-0.3..0.3);
        labels.push(class + 1);
    }
    Dataset {
        features,
        labels,
        n_classes: 3,
        feature_names: None,
        label_names: vec!["a".into(), "b".into(), "c".into()],
        norm_stats: None,
    }
}

fn accuracy(predicted: &[usize], labels: &[usize]) -> f64 {
    let hits = predicted.iter().zip(labels).filter(|(p, l)| p == l).count();
    100.0 * hits as f64 / labels.len() as f64
}

#[test]
fn grows_a_network_that_separates_blobs() {
    let ds = blobs(5);
    let spec = SplitSpec {
        n_train: 90,
        n_test: 60,
        seed: 1,
        stratified: true,
    };
    let (train, test) = split(&ds, &spec).unwrap();
    let stats = normalize_fit(&train);
    let train = normalize_apply(&train, &stats);
    let test = normalize_apply(&test, &stats);

    let mut config = CelmConfig::default();
    config.seed = 9;
    config.impact_min = 0.5;
    config.impact_max = 2.0;
    let (net, report) = fit(&train, &config).unwrap();

    assert!(report.additions >= 3, "needs at least one neuron per class");
    assert_eq!(report.final_k, report.additions - report.deletions);
    let predicted = predict_dataset(&net, &test).unwrap();
    let acc = accuracy(&predicted, &test.labels);
    assert!(acc >= 95.0, "test accuracy {acc}");
}

#[test]
fn identical_configs_give_identical_models() {
    let ds = blobs(7);
    let mut config = CelmConfig::default();
    config.seed = 4;
    config.shuffle = true;
    let (net_a, report_a) = fit(&ds, &config).unwrap();
    let (net_b, report_b) = fit(&ds, &config).unwrap();
    assert_eq!(report_a.final_k, report_b.final_k);
    assert_eq!(
        serde_json::to_string(&net_a).unwrap(),
        serde_json::to_string(&net_b).unwrap()
    );
    assert_eq!(
        predict_dataset(&net_a, &ds).unwrap(),
        predict_dataset(&net_b, &ds).unwrap()
    );
}

#[test]
fn baseline_keeps_its_seeded_structure() {
    let ds = blobs(11);
    let config = CelmConfig {
        seed: 2,
        ..CelmConfig::default()
    };
    let (net, report) = fit_elm_baseline(&ds, 12, &config).unwrap();
    assert_eq!(report.final_k, 12);
    assert_eq!(report.deletions, 0);
    let predicted = predict_dataset(&net, &ds).unwrap();
    assert!(accuracy(&predicted, &ds.labels) >= 90.0);
}

#[test]
fn stratified_split_respects_class_proportions() {
    let ds = blobs(13);
    let spec = SplitSpec {
        n_train: 45,
        n_test: 105,
        seed: 3,
        stratified: true,
    };
    let (train, test) = split(&ds, &spec).unwrap();
    assert_eq!(train.class_counts(), vec![15, 15, 15]);
    assert_eq!(test.len(), 105);

    let stats = normalize_fit(&train);
    let train_n = normalize_apply(&train, &stats);
    for v in train_n.features.iter() {
        assert!(*v >= -1.0 - 1e-12 && *v <= 1.0 + 1e-12);
    }
}

#[test]
fn trainer_stream_keeps_residual_small() {
    let ds = blobs(17);
    let mut config = CelmConfig::default();
    config.seed = 21;
    let mut trainer = Trainer::new(2, 3, config).unwrap();
    trainer.set_residual_check(true);
    for i in 0..ds.len() {
        trainer.train_step(&ds.sample(i), ds.labels[i]).unwrap();
    }
    assert_eq!(trainer.history_len(), ds.len());
    assert!(trainer.normal_equations_residual() <= 1e-6);
    assert!(trainer.warnings().is_empty());
}

#[test]
fn trainer_rejects_mismatched_input() {
    let mut trainer = Trainer::new(2, 3, CelmConfig::default()).unwrap();
    assert!(trainer
        .train_step(&DVector::from_row_slice(&[0.1]), 1)
        .is_err());
    assert!(trainer
        .train_step(&DVector::from_row_slice(&[0.1, 0.2]), 4)
        .is_err());
}
