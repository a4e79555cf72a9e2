//! Dataset loading, label coding, normalization, and splitting.
//!
//! CSV files carry numeric features with the class label in one column
//! (last by default). Label strings map to ids 1..N in first-appearance
//! order and the mapping stays on the dataset. Features normalize by an
//! affine map of the training min/max onto [−1, 1], fit on the training
//! split only. Splits are seeded and, when stratified, allocate per class
//! proportionally with remainders going to the largest classes; both halves
//! keep their rows in original file order, which is also the default
//! training stream order.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::CodedLabel;

/// Per-feature (min, max) of the split the stats were fit on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NormStats(pub Vec<(f64, f64)>);

/// A labeled dataset: t samples of M features with class ids in 1..N.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: DMatrix<f64>,
    pub labels: Vec<usize>,
    pub n_classes: usize,
    pub feature_names: Option<Vec<String>>,
    /// Distinct label strings in first-appearance order; index i names
    /// class i+1.
    pub label_names: Vec<String>,
    pub norm_stats: Option<NormStats>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.features.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    /// Feature vector of sample i as a column vector.
    pub fn sample(&self, i: usize) -> DVector<f64> {
        self.features.row(i).transpose()
    }

    /// Number of samples per class, indexed by class id − 1.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.n_classes];
        for &c in &self.labels {
            counts[c - 1] += 1;
        }
        counts
    }

    /// New dataset holding the given rows, in the given order.
    pub fn take_rows(&self, indices: &[usize]) -> Dataset {
        let features = DMatrix::from_fn(indices.len(), self.n_features(), |i, j| {
            self.features[(indices[i], j)]
        });
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        Dataset {
            features,
            labels,
            n_classes: self.n_classes,
            feature_names: self.feature_names.clone(),
            label_names: self.label_names.clone(),
            norm_stats: self.norm_stats.clone(),
        }
    }
}

/// Requested train/test sizes and how to draw them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub n_train: usize,
    pub n_test: usize,
    pub seed: u64,
    #[serde(default = "default_stratified")]
    pub stratified: bool,
}

fn default_stratified() -> bool {
    true
}

/// Parses a CSV file into a dataset. `label_column` is 0-based and defaults
/// to the last column; `header` consumes one name row.
pub fn load_csv(path: &Path, label_column: Option<usize>, header: bool) -> Result<Dataset> {
    load_csv_inner(path, label_column, header, None)
}

/// As `load_csv`, but labels must come from a known set (class ids follow
/// that set's order); an unseen label is a parse error.
pub fn load_csv_with_labels(
    path: &Path,
    label_column: Option<usize>,
    header: bool,
    labels: &[String],
) -> Result<Dataset> {
    load_csv_inner(path, label_column, header, Some(labels))
}

fn load_csv_inner(
    path: &Path,
    label_column: Option<usize>,
    header: bool,
    known_labels: Option<&[String]>,
) -> Result<Dataset> {
    let io_err = |source| Error::Io {
        path: path.display().to_string(),
        source,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(source) => io_err(source),
            other => Error::domain(format!("csv reader: {other:?}")),
        })?;

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut raw_labels: Vec<usize> = Vec::new();
    let mut label_names: Vec<String> = known_labels.map(|l| l.to_vec()).unwrap_or_default();
    let mut feature_names: Option<Vec<String>> = None;
    let mut width: Option<usize> = None;
    let mut label_idx = 0usize;

    for (record_no, record) in reader.records().enumerate() {
        let row_no = record_no + 1;
        let record = record.map_err(|e| Error::Parse {
            row: row_no,
            col: 0,
            msg: e.to_string(),
        })?;
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        match width {
            None => {
                let w = record.len();
                if w < 2 {
                    return Err(Error::Parse {
                        row: row_no,
                        col: 1,
                        msg: "need at least one feature and one label column".into(),
                    });
                }
                label_idx = match label_column {
                    Some(i) if i < w => i,
                    Some(i) => {
                        return Err(Error::domain(format!(
                            "label column {i} outside the {w} columns of {}",
                            path.display()
                        )))
                    }
                    None => w - 1,
                };
                width = Some(w);
            }
            Some(w) if record.len() != w => {
                return Err(Error::Parse {
                    row: row_no,
                    col: record.len().min(w) + 1,
                    msg: format!("ragged row: expected {w} fields, found {}", record.len()),
                });
            }
            Some(_) => {}
        }

        if header && record_no == 0 {
            let mut names: Vec<String> = record.iter().map(str::to_string).collect();
            names.remove(label_idx);
            feature_names = Some(names);
            continue;
        }

        let mut row = Vec::with_capacity(record.len() - 1);
        for (col_no, field) in record.iter().enumerate() {
            if col_no == label_idx {
                let class = match label_names.iter().position(|l| l == field) {
                    Some(pos) => pos + 1,
                    None if known_labels.is_some() => {
                        return Err(Error::Parse {
                            row: row_no,
                            col: col_no + 1,
                            msg: format!("unknown label {field:?}"),
                        });
                    }
                    None => {
                        label_names.push(field.to_string());
                        label_names.len()
                    }
                };
                raw_labels.push(class);
            } else {
                let value: f64 = field.parse().map_err(|_| Error::Parse {
                    row: row_no,
                    col: col_no + 1,
                    msg: format!("not a number: {field:?}"),
                })?;
                row.push(value);
            }
        }
        rows.push(row);
    }

    if rows.is_empty() {
        return Err(Error::domain(format!(
            "{} contains no data rows",
            path.display()
        )));
    }
    let m = rows[0].len();
    let features = DMatrix::from_fn(rows.len(), m, |i, j| rows[i][j]);
    Ok(Dataset {
        features,
        labels: raw_labels,
        n_classes: label_names.len(),
        feature_names,
        label_names,
        norm_stats: None,
    })
}

/// ±1 coding of a class id: +1 at position c, −1 elsewhere.
pub fn code_labels(c: usize, n: usize) -> Result<CodedLabel> {
    CodedLabel::new(c, n)
}

/// Per-feature min/max of a training split.
pub fn normalize_fit(train: &Dataset) -> NormStats {
    let stats = (0..train.n_features())
        .map(|j| {
            let col = train.features.column(j);
            let min = col.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            (min, max)
        })
        .collect();
    NormStats(stats)
}

/// Affine map of each feature onto [−1, 1] by the given stats; constant
/// features go to 0, out-of-range values extrapolate past ±1.
pub fn normalize_apply(ds: &Dataset, stats: &NormStats) -> Dataset {
    assert_eq!(
        ds.n_features(),
        stats.0.len(),
        "norm stats must cover every feature"
    );
    let features = DMatrix::from_fn(ds.len(), ds.n_features(), |i, j| {
        let (min, max) = stats.0[j];
        if max > min {
            2.0 * (ds.features[(i, j)] - min) / (max - min) - 1.0
        } else {
            0.0
        }
    });
    Dataset {
        features,
        labels: ds.labels.clone(),
        n_classes: ds.n_classes,
        feature_names: ds.feature_names.clone(),
        label_names: ds.label_names.clone(),
        norm_stats: Some(stats.clone()),
    }
}

/// Proportional per-class allocation of `total` samples, remainders to the
/// largest classes, capped by per-class capacity.
fn allocate(counts: &[usize], capacity: &[usize], total: usize, t: usize) -> Vec<usize> {
    let n = counts.len();
    let mut alloc: Vec<usize> = (0..n)
        .map(|c| ((total * counts[c]) / t).min(capacity[c]))
        .collect();
    let mut assigned: usize = alloc.iter().sum();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&c| std::cmp::Reverse(counts[c]));
    while assigned < total {
        let mut progressed = false;
        for &c in &order {
            if assigned == total {
                break;
            }
            if alloc[c] < capacity[c] {
                alloc[c] += 1;
                assigned += 1;
                progressed = true;
            }
        }
        assert!(progressed, "split allocation exceeded capacity");
    }
    alloc
}

/// Draws disjoint train/test subsets of the requested sizes. Row order
/// within each half follows the original file.
pub fn split(ds: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
    let t = ds.len();
    if spec.n_train + spec.n_test > t {
        return Err(Error::domain(format!(
            "split sizes {}+{} exceed {t} samples",
            spec.n_train, spec.n_test
        )));
    }
    if spec.n_train == 0 {
        return Err(Error::domain("split needs a non-empty training half"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut train_idx: Vec<usize> = Vec::with_capacity(spec.n_train);
    let mut test_idx: Vec<usize> = Vec::with_capacity(spec.n_test);

    if spec.stratified {
        let counts = ds.class_counts();
        let train_alloc = allocate(&counts, &counts, spec.n_train, t);
        let capacity: Vec<usize> = (0..ds.n_classes)
            .map(|c| counts[c] - train_alloc[c])
            .collect();
        let test_alloc = allocate(&counts, &capacity, spec.n_test, t);
        for c in 0..ds.n_classes {
            let mut members: Vec<usize> = (0..t).filter(|&i| ds.labels[i] == c + 1).collect();
            members.shuffle(&mut rng);
            train_idx.extend(&members[..train_alloc[c]]);
            test_idx.extend(&members[train_alloc[c]..train_alloc[c] + test_alloc[c]]);
        }
    } else {
        let mut order: Vec<usize> = (0..t).collect();
        order.shuffle(&mut rng);
        train_idx.extend(&order[..spec.n_train]);
        test_idx.extend(&order[spec.n_train..spec.n_train + spec.n_test]);
    }

    train_idx.sort_unstable();
    test_idx.sort_unstable();
    Ok((ds.take_rows(&train_idx), ds.take_rows(&test_idx)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::io::Write;
    use std::sync::atomic::{AtomicU64, Ordering};

    static FILE_NO: AtomicU64 = AtomicU64::new(0);

    fn temp_csv(content: &str) -> std::path::PathBuf {
        let n = FILE_NO.fetch_add(1, Ordering::SeqCst);
        let path = std::env::temp_dir().join(format!(
            "celm-data-test-{}-{n}.csv",
            std::process::id()
        ));
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(content.as_bytes()).unwrap();
        path
    }

    fn toy_dataset(labels: &[usize], n_classes: usize) -> Dataset {
        let t = labels.len();
        let features = DMatrix::from_fn(t, 2, |i, j| (i * 2 + j) as f64);
        Dataset {
            features,
            labels: labels.to_vec(),
            n_classes,
            feature_names: None,
            label_names: (1..=n_classes).map(|c| c.to_string()).collect(),
            norm_stats: None,
        }
    }

    #[test]
    fn load_maps_labels_by_first_appearance() {
        let path = temp_csv("1.0,2.0,a\n3.0,4.0,b\n5.0,6.0,a\n");
        let ds = load_csv(&path, None, false).unwrap();
        std::fs::remove_file(&path).ok();
        assert_eq!(ds.n_classes, 2);
        assert_eq!(ds.labels, vec![1, 2, 1]);
        assert_eq!(ds.label_names, vec!["a", "b"]);
        assert_eq!(ds.n_features(), 2);
        assert!(ds.feature_names.is_none());
    }

    #[test]
    fn load_handles_header_and_trailing_newline() {
        let with_newline = temp_csv("f1,f2,class\n1,2,x\n3,4,y\n");
        let without = temp_csv("f1,f2,class\n1,2,x\n3,4,y");
        let a = load_csv(&with_newline, None, true).unwrap();
        let b = load_csv(&without, None, true).unwrap();
        std::fs::remove_file(&with_newline).ok();
        std::fs::remove_file(&without).ok();
        assert_eq!(a, b);
        assert_eq!(a.feature_names, Some(vec!["f1".into(), "f2".into()]));
        assert_eq!(a.len(), 2);
    }

    #[test]
    fn load_reports_parse_position() {
        let path = temp_csv("1,2,a\n3,oops,b\n");
        let err = load_csv(&path, None, false).unwrap_err();
        std::fs::remove_file(&path).ok();
        match err {
            Error::Parse { row, col, .. } => {
                assert_eq!((row, col), (2, 2));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn load_rejects_ragged_rows() {
        let path = temp_csv("1,2,a\n3,4\n");
        let err = load_csv(&path, None, false).unwrap_err();
        std::fs::remove_file(&path).ok();
        assert!(matches!(err, Error::Parse { row: 2, .. }));
    }

    #[test]
    fn load_with_known_labels_rejects_new_ones() {
        let path = temp_csv("1,2,a\n3,4,c\n");
        let known = vec!["a".to_string(), "b".to_string()];
        let err = load_csv_with_labels(&path, None, false, &known).unwrap_err();
        std::fs::remove_file(&path).ok();
        match err {
            Error::Parse { row, col, msg } => {
                assert_eq!((row, col), (2, 3));
                assert!(msg.contains("unknown label"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn load_respects_label_column_override() {
        let path = temp_csv("a,1.0,2.0\nb,3.0,4.0\n");
        let ds = load_csv(&path, Some(0), false).unwrap();
        std::fs::remove_file(&path).ok();
        assert_eq!(ds.labels, vec![1, 2]);
        assert_relative_eq!(ds.features[(1, 0)], 3.0);
    }

    #[test]
    fn load_iris_shape() {
        let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("../../data/iris.csv");
        let ds = load_csv(&path, None, true).unwrap();
        assert_eq!(ds.len(), 150);
        assert_eq!(ds.n_features(), 4);
        assert_eq!(ds.n_classes, 3);
    }

    #[test]
    fn code_labels_examples() {
        let y = code_labels(2, 3).unwrap();
        assert_eq!(y.values().as_slice(), &[-1.0, 1.0, -1.0]);
        let y = code_labels(1, 2).unwrap();
        assert_eq!(y.values().as_slice(), &[1.0, -1.0]);
        let y = code_labels(4, 4).unwrap();
        assert_eq!(y.values().as_slice(), &[-1.0, -1.0, -1.0, 1.0]);
        assert!(code_labels(0, 3).is_err());
        assert!(code_labels(5, 4).is_err());
    }

    #[test]
    fn normalize_endpoints_constants_and_extrapolation() {
        let mut ds = toy_dataset(&[1, 1, 2], 2);
        ds.features = DMatrix::from_row_slice(3, 2, &[0.0, 5.0, 5.0, 5.0, 10.0, 5.0]);
        let stats = normalize_fit(&ds);
        assert_eq!(stats.0, vec![(0.0, 10.0), (5.0, 5.0)]);
        let normed = normalize_apply(&ds, &stats);
        assert_relative_eq!(normed.features[(0, 0)], -1.0);
        assert_relative_eq!(normed.features[(1, 0)], 0.0);
        assert_relative_eq!(normed.features[(2, 0)], 1.0);
        for i in 0..3 {
            assert_relative_eq!(normed.features[(i, 1)], 0.0);
        }

        let mut test = toy_dataset(&[1], 2);
        test.features = DMatrix::from_row_slice(1, 2, &[20.0, 7.0]);
        let normed_test = normalize_apply(&test, &stats);
        assert_relative_eq!(normed_test.features[(0, 0)], 3.0);
        assert_relative_eq!(normed_test.features[(0, 1)], 0.0);
    }

    #[test]
    fn normalized_train_hits_both_endpoints() {
        let mut ds = toy_dataset(&[1, 2, 1, 2, 1], 2);
        ds.features = DMatrix::from_fn(5, 2, |i, j| (i as f64 - 2.0) * (j as f64 + 1.5));
        let normed = normalize_apply(&ds, &normalize_fit(&ds));
        for j in 0..2 {
            let col = normed.features.column(j);
            let min = col.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            assert_relative_eq!(min, -1.0, epsilon = 1e-12);
            assert_relative_eq!(max, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn stratified_split_allocates_proportionally() {
        let labels: Vec<usize> = (0..150).map(|i| i / 50 + 1).collect();
        let ds = toy_dataset(&labels, 3);
        let spec = SplitSpec {
            n_train: 45,
            n_test: 105,
            seed: 3,
            stratified: true,
        };
        let (train, test) = split(&ds, &spec).unwrap();
        assert_eq!(train.class_counts(), vec![15, 15, 15]);
        assert_eq!(test.class_counts(), vec![35, 35, 35]);
    }

    #[test]
    fn stratified_remainders_go_to_largest_class() {
        let labels = vec![1, 1, 1, 1, 1, 2, 2, 2, 2];
        let ds = toy_dataset(&labels, 2);
        let spec = SplitSpec {
            n_train: 5,
            n_test: 4,
            seed: 0,
            stratified: true,
        };
        let (train, test) = split(&ds, &spec).unwrap();
        assert_eq!(train.class_counts(), vec![3, 2]);
        assert_eq!(test.class_counts(), vec![2, 2]);
    }

    #[test]
    fn split_is_deterministic_disjoint_and_ordered() {
        let labels: Vec<usize> = (0..30).map(|i| i % 3 + 1).collect();
        let ds = toy_dataset(&labels, 3);
        let spec = SplitSpec {
            n_train: 12,
            n_test: 15,
            seed: 42,
            stratified: true,
        };
        let (train_a, test_a) = split(&ds, &spec).unwrap();
        let (train_b, _) = split(&ds, &spec).unwrap();
        assert_eq!(train_a, train_b);
        assert_eq!(train_a.len(), 12);
        assert_eq!(test_a.len(), 15);

        // Row identity is recoverable from the feature values here: each
        // row is (2i, 2i+1), so disjointness and order can be checked.
        let ids = |d: &Dataset| -> Vec<usize> {
            (0..d.len()).map(|i| d.features[(i, 0)] as usize / 2).collect()
        };
        let train_ids = ids(&train_a);
        let test_ids = ids(&test_a);
        let mut sorted = train_ids.clone();
        sorted.sort_unstable();
        assert_eq!(train_ids, sorted, "train rows keep file order");
        assert!(train_ids.iter().all(|i| !test_ids.contains(i)));
    }

    #[test]
    fn split_boundaries_and_errors() {
        let labels = vec![1, 2, 1, 2];
        let ds = toy_dataset(&labels, 2);
        let all = SplitSpec {
            n_train: 4,
            n_test: 0,
            seed: 1,
            stratified: true,
        };
        let (train, test) = split(&ds, &all).unwrap();
        assert_eq!(train.len(), 4);
        assert!(test.is_empty());

        let too_big = SplitSpec {
            n_train: 3,
            n_test: 2,
            seed: 1,
            stratified: false,
        };
        assert!(split(&ds, &too_big).is_err());
    }
}
